#pragma once

#include <stdexcept>
#include <string>

namespace varmeta {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A model, tangent-linear or adjoint evaluation produced NaN/Inf.
class NonFiniteError : public Error {
 public:
  explicit NonFiniteError(const std::string& what, int step = -1)
      : Error(step >= 0 ? what + " (step " + std::to_string(step) + ")" : what), step_(step) {}
  int step() const noexcept { return step_; }

 private:
  int step_;
};

class FactorizationFailed : public Error {
 public:
  using Error::Error;
};

/// IDW location gradient requested too close to a data site.
class DegenerateLocation : public Error {
 public:
  DegenerateLocation(const std::string& what, std::size_t location_index)
      : Error(what), location_index_(location_index) {}
  std::size_t location_index() const noexcept { return location_index_; }

 private:
  std::size_t location_index_;
};

/// Conjugate gradients met a direction of non-positive curvature.
class IndefiniteDetected : public Error {
 public:
  IndefiniteDetected(const std::string& what, int iteration, double curvature)
      : Error(what), iteration_(iteration), curvature_(curvature) {}
  int iteration() const noexcept { return iteration_; }
  double curvature() const noexcept { return curvature_; }

 private:
  int iteration_;
  double curvature_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace varmeta
