#include "varmeta/optim/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>
#include <string>

#include "varmeta/errors.hpp"

namespace varmeta {

std::string_view to_string(OptimizerStatus s) {
  switch (s) {
    case OptimizerStatus::max_iterations:
      return "max_iterations";
    case OptimizerStatus::converged:
      return "converged";
    case OptimizerStatus::line_search_failed:
      return "line_search_failed";
  }
  return "unknown";
}

void SolverSettings::validate(Eigen::Index n) const {
  if (max_iterations < 0) throw std::invalid_argument("solver: max_iterations must be >= 0");
  if (memory < 1) throw std::invalid_argument("solver: memory must be >= 1");
  if (!(wolfe_c1 > 0.0 && wolfe_c1 < wolfe_c2 && wolfe_c2 < 1.0))
    throw std::invalid_argument("solver: need 0 < c1 < c2 < 1");
  if (grad_tolerance < 0.0) throw std::invalid_argument("solver: grad_tolerance must be >= 0");
  if (max_line_search_evaluations < 1)
    throw std::invalid_argument("solver: max_line_search_evaluations must be >= 1");
  if (bounds) {
    if (bounds->lower.size() != n || bounds->upper.size() != n)
      throw std::invalid_argument("solver: bounds dimension mismatch");
    if ((bounds->lower.array() > bounds->upper.array()).any())
      throw std::invalid_argument("solver: lower bound exceeds upper bound");
  }
}

namespace {

struct Trial {
  double alpha = 0.0;
  double f = 0.0;
  double dphi = 0.0;
  Eigen::VectorXd x;
  Eigen::VectorXd g;
};

struct CorrectionPair {
  Eigen::VectorXd s;
  Eigen::VectorXd y;
  double rho;
};

// Minimizer of the cubic matching (a0, f0, d0) and (a1, f1, d1); NaN if none.
double cubic_minimizer(double a0, double f0, double d0, double a1, double f1, double d1) {
  const double t = d0 + d1 - 3.0 * (f0 - f1) / (a0 - a1);
  const double disc = t * t - d0 * d1;
  if (disc < 0.0) return std::numeric_limits<double>::quiet_NaN();
  const double r = std::copysign(std::sqrt(disc), a1 - a0);
  const double denom = d1 - d0 + 2.0 * r;
  if (denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return a1 - (a1 - a0) * (d1 + r - t) / denom;
}

class Minimizer {
 public:
  Minimizer(const Objective& objective, const SolverSettings& settings)
      : objective_(objective), settings_(settings) {}

  MinimizeResult run(Eigen::VectorXd x, const IterationCallback& on_iteration) {
    const Eigen::Index n = x.size();
    settings_.validate(n);
    if (settings_.bounds) x = settings_.bounds->project(x);

    MinimizeResult result;
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
    double f = objective_(x, g);
    result.evaluations = 1;
    if (!std::isfinite(f) || !g.allFinite())
      throw NonFiniteError("objective is not finite at the starting point");

    auto record = [&](int it, double step, double step_norm) {
      IterationRecord rec{it, f, projected_gradient(x, g).norm(), step, step_norm};
      result.history.push_back(rec);
      if (on_iteration) on_iteration(rec, x);
    };
    record(0, 0.0, 0.0);

    std::deque<CorrectionPair> memory;
    result.status = OptimizerStatus::max_iterations;
    for (int it = 1; it <= settings_.max_iterations; ++it) {
      const Eigen::VectorXd pg = projected_gradient(x, g);
      const double pg_norm = pg.norm();
      if (pg_norm == 0.0 || pg_norm <= settings_.grad_tolerance) {
        result.status = OptimizerStatus::converged;
        break;
      }

      Eigen::VectorXd d = direction(pg, memory);
      clip_outward(x, d);
      double dphi0 = g.dot(d);
      if (!(dphi0 < 0.0)) {
        memory.clear();
        d = -pg;
        clip_outward(x, d);
        dphi0 = g.dot(d);
        if (!(dphi0 < 0.0)) {
          result.status = OptimizerStatus::converged;
          break;
        }
      }

      const double alpha0 = memory.empty() ? std::min(1.0, 1.0 / d.norm()) : 1.0;
      std::optional<Trial> accepted = line_search(x, f, g, d, dphi0, alpha0, result.evaluations);
      if (!accepted) {
        result.status = OptimizerStatus::line_search_failed;
        break;
      }

      Eigen::VectorXd s = accepted->x - x;
      Eigen::VectorXd y = accepted->g - g;
      const double sy = s.dot(y);
      if (sy > 1e-12 * s.norm() * y.norm() && sy > 0.0) {
        memory.push_back({s, y, 1.0 / sy});
        if (static_cast<int>(memory.size()) > settings_.memory) memory.pop_front();
      }
      const double step_norm = s.norm();
      x = std::move(accepted->x);
      g = std::move(accepted->g);
      f = accepted->f;
      record(it, accepted->alpha, step_norm);
    }

    result.x = std::move(x);
    result.value = f;
    result.gradient = std::move(g);
    return result;
  }

 private:
  bool at_lower(const Eigen::VectorXd& x, Eigen::Index i) const {
    return settings_.bounds && x[i] <= settings_.bounds->lower[i];
  }
  bool at_upper(const Eigen::VectorXd& x, Eigen::Index i) const {
    return settings_.bounds && x[i] >= settings_.bounds->upper[i];
  }

  Eigen::VectorXd projected_gradient(const Eigen::VectorXd& x, const Eigen::VectorXd& g) const {
    if (!settings_.bounds) return g;
    Eigen::VectorXd pg = g;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if ((at_lower(x, i) && g[i] > 0.0) || (at_upper(x, i) && g[i] < 0.0)) pg[i] = 0.0;
    }
    return pg;
  }

  // Zeroes components that would immediately leave the box.
  void clip_outward(const Eigen::VectorXd& x, Eigen::VectorXd& d) const {
    if (!settings_.bounds) return;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if ((at_lower(x, i) && d[i] < 0.0) || (at_upper(x, i) && d[i] > 0.0)) d[i] = 0.0;
    }
  }

  // Two-loop recursion on the free coordinates (those with pg != 0 or interior).
  Eigen::VectorXd direction(const Eigen::VectorXd& pg,
                            const std::deque<CorrectionPair>& memory) const {
    Eigen::VectorXd r = pg;
    if (memory.empty()) return -r;
    std::vector<double> a(memory.size());
    for (std::size_t k = memory.size(); k-- > 0;) {
      a[k] = memory[k].rho * memory[k].s.dot(r);
      r -= a[k] * memory[k].y;
    }
    const CorrectionPair& last = memory.back();
    r *= last.s.dot(last.y) / last.y.squaredNorm();
    for (std::size_t k = 0; k < memory.size(); ++k) {
      const double b = memory[k].rho * memory[k].y.dot(r);
      r += (a[k] - b) * memory[k].s;
    }
    if (settings_.bounds) {
      for (Eigen::Index i = 0; i < pg.size(); ++i)
        if (pg[i] == 0.0) r[i] = 0.0;
    }
    return -r;
  }

  Trial evaluate(const Eigen::VectorXd& x0, const Eigen::VectorXd& d, double alpha,
                 int& evaluations) const {
    Trial t;
    t.alpha = alpha;
    t.x = x0 + alpha * d;
    Eigen::VectorXd d_eff = d;
    if (settings_.bounds) {
      const Bounds& b = *settings_.bounds;
      for (Eigen::Index i = 0; i < t.x.size(); ++i) {
        if (t.x[i] <= b.lower[i]) {
          t.x[i] = b.lower[i];
          d_eff[i] = 0.0;
        } else if (t.x[i] >= b.upper[i]) {
          t.x[i] = b.upper[i];
          d_eff[i] = 0.0;
        }
      }
    }
    t.g = Eigen::VectorXd::Zero(x0.size());
    t.f = objective_(t.x, t.g);
    ++evaluations;
    if (!std::isfinite(t.f) || !t.g.allFinite()) {
      t.f = std::numeric_limits<double>::infinity();
      t.dphi = std::numeric_limits<double>::quiet_NaN();
    } else {
      t.dphi = t.g.dot(d_eff);
    }
    return t;
  }

  std::optional<Trial> line_search(const Eigen::VectorXd& x0, double f0, const Eigen::VectorXd& g0,
                                   const Eigen::VectorXd& d, double dphi0, double alpha0,
                                   int& evaluations) const {
    const double c1 = settings_.wolfe_c1;
    const double c2 = settings_.wolfe_c2;
    const int budget = settings_.max_line_search_evaluations;
    int used = 0;

    auto sufficient_decrease = [&](const Trial& t) {
      return std::isfinite(t.f) && t.f <= f0 + c1 * g0.dot(t.x - x0) && t.f < f0;
    };
    auto curvature = [&](const Trial& t) { return std::abs(t.dphi) <= -c2 * dphi0; };

    auto zoom = [&](Trial lo, Trial hi) -> std::optional<Trial> {
      while (used < budget) {
        const double lo_a = std::min(lo.alpha, hi.alpha);
        const double hi_a = std::max(lo.alpha, hi.alpha);
        const double width = hi_a - lo_a;
        if (width <= 1e-14 * std::max(1.0, hi_a)) break;
        double a = std::numeric_limits<double>::quiet_NaN();
        if (std::isfinite(hi.f) && std::isfinite(hi.dphi))
          a = cubic_minimizer(lo.alpha, lo.f, lo.dphi, hi.alpha, hi.f, hi.dphi);
        if (!std::isfinite(a) || a < lo_a + 0.1 * width || a > hi_a - 0.1 * width)
          a = 0.5 * (lo.alpha + hi.alpha);
        Trial t = evaluate(x0, d, a, evaluations);
        ++used;
        if (!sufficient_decrease(t) || t.f >= lo.f) {
          hi = std::move(t);
        } else {
          if (curvature(t)) return t;
          if (t.dphi * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
          lo = std::move(t);
        }
      }
      if (lo.alpha > 0.0) return lo;
      return std::nullopt;
    };

    Trial prev{0.0, f0, dphi0, x0, g0};
    double alpha = alpha0;
    while (used < budget) {
      Trial t = evaluate(x0, d, alpha, evaluations);
      ++used;
      if (!sufficient_decrease(t) || (prev.alpha > 0.0 && t.f >= prev.f))
        return zoom(std::move(prev), std::move(t));
      if (curvature(t)) return t;
      if (t.dphi >= 0.0) return zoom(std::move(t), std::move(prev));
      // Projection saturated: further extrapolation cannot move the point.
      if (prev.alpha > 0.0 && t.x == prev.x) return t;
      prev = std::move(t);
      alpha *= 4.0;
    }
    if (prev.alpha > 0.0) return prev;
    return std::nullopt;
  }

  const Objective& objective_;
  SolverSettings settings_;
};

}  // namespace

MinimizeResult lbfgs_minimize(const Objective& objective, Eigen::VectorXd x_init,
                              const SolverSettings& settings,
                              const IterationCallback& on_iteration) {
  Minimizer m(objective, settings);
  return m.run(std::move(x_init), on_iteration);
}

}  // namespace varmeta
