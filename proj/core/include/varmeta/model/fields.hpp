#pragma once

#include <Eigen/Core>

#include <cassert>
#include <cmath>
#include <utility>

namespace varmeta {

/// The three prognostic components, stored in this order.
enum class Component { h = 0, hu = 1, hv = 2 };

/// Three q x q fields packed as one vector (h block, hu block, hv block),
/// each block row-major over (i, j). The tag distinguishes states from
/// tangent and adjoint quantities that share the same layout.
template <class Tag>
class GridFields {
 public:
  GridFields() = default;
  explicit GridFields(int q) : q_(q), values_(Eigen::VectorXd::Zero(3 * q * q)) {}
  GridFields(int q, Eigen::VectorXd values) : q_(q), values_(std::move(values)) {
    assert(values_.size() == 3 * q * q);
  }

  int q() const { return q_; }
  int cells() const { return q_ * q_; }
  Eigen::Index size() const { return values_.size(); }

  Eigen::VectorXd& values() { return values_; }
  const Eigen::VectorXd& values() const { return values_; }

  auto component(Component c) { return values_.segment(offset(c), cells()); }
  auto component(Component c) const { return values_.segment(offset(c), cells()); }
  auto h() { return component(Component::h); }
  auto h() const { return component(Component::h); }
  auto hu() { return component(Component::hu); }
  auto hu() const { return component(Component::hu); }
  auto hv() { return component(Component::hv); }
  auto hv() const { return component(Component::hv); }

  double& operator()(Component c, int i, int j) { return values_[offset(c) + i * q_ + j]; }
  double operator()(Component c, int i, int j) const { return values_[offset(c) + i * q_ + j]; }

  bool all_finite() const { return values_.allFinite(); }
  double norm() const { return values_.norm(); }

  friend bool operator==(const GridFields& a, const GridFields& b) {
    return a.q_ == b.q_ && a.values_.size() == b.values_.size() && a.values_ == b.values_;
  }

  GridFields& operator+=(const GridFields& o) {
    values_ += o.values_;
    return *this;
  }
  GridFields& operator-=(const GridFields& o) {
    values_ -= o.values_;
    return *this;
  }
  GridFields& operator*=(double s) {
    values_ *= s;
    return *this;
  }

  static GridFields zeros_like(const GridFields& o) { return GridFields(o.q()); }

 private:
  Eigen::Index offset(Component c) const { return static_cast<Eigen::Index>(c) * cells(); }

  int q_ = 0;
  Eigen::VectorXd values_;
};

struct StateTag {};
struct PerturbationTag {};
struct AdjointTag {};

/// Model state (h, hu, hv).
using StateVector = GridFields<StateTag>;
/// Tangent-linear quantity in state space; also used for gradients.
using Perturbation = GridFields<PerturbationTag>;
/// Adjoint (dual) variable.
using AdjointVariable = GridFields<AdjointTag>;

template <class Tag>
GridFields<Tag> operator+(GridFields<Tag> a, const GridFields<Tag>& b) {
  a += b;
  return a;
}
template <class Tag>
GridFields<Tag> operator-(GridFields<Tag> a, const GridFields<Tag>& b) {
  a -= b;
  return a;
}
template <class Tag>
GridFields<Tag> operator*(double s, GridFields<Tag> a) {
  a *= s;
  return a;
}

inline Perturbation difference(const StateVector& a, const StateVector& b) {
  return Perturbation(a.q(), a.values() - b.values());
}
inline StateVector displaced(const StateVector& x, const Perturbation& d) {
  return StateVector(x.q(), x.values() + d.values());
}

template <class A, class B>
double dot(const GridFields<A>& a, const GridFields<B>& b) {
  return a.values().dot(b.values());
}

/// Reinterpret one layout as another (e.g. an adjoint variable as a gradient).
template <class To, class From>
GridFields<To> retag(const GridFields<From>& f) {
  return GridFields<To>(f.q(), f.values());
}

}  // namespace varmeta
