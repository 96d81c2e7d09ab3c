#pragma once

#include <Eigen/Core>

#include <functional>
#include <vector>

namespace varmeta {

struct CgSettings {
  double rel_tolerance = 1e-8;
  int max_iterations = 200;

  void validate() const;
};

struct CgResult {
  Eigen::VectorXd x;
  /// ||b - A x_i|| after each iteration, starting with ||b||.
  std::vector<double> residual_history;
  int iterations = 0;
  bool converged = false;

  double final_relative_residual() const;
};

using LinearOperator = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Conjugate gradients for A x = b with A symmetric positive definite.
/// An optional SPD preconditioner applies an approximation of A^{-1}.
/// Throws IndefiniteDetected if a search direction has p^T A p <= 0.
/// Hitting max_iterations is reported through `converged`, not thrown.
CgResult cg_solve(const LinearOperator& apply_a, const Eigen::VectorXd& b,
                  const CgSettings& settings, const LinearOperator& preconditioner = {});

}  // namespace varmeta
