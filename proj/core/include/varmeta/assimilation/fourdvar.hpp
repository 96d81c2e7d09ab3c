#pragma once

#include <Eigen/Core>

#include <optional>
#include <vector>

#include "varmeta/adjoint/tangent_adjoint.hpp"
#include "varmeta/assimilation/problem.hpp"
#include "varmeta/optim/lbfgs.hpp"

namespace varmeta {

struct CostTerms {
  double background = 0.0;
  double observation = 0.0;
  double total() const { return background + observation; }
};

/// Forward run long enough to cover every observation time.
Trajectory observation_trajectory(const AssimilationProblem& problem, const StateVector& x0);

/// H_k(x_k) - y_k for every entry, in observation-set order.
Eigen::VectorXd innovations(const AssimilationProblem& problem, const Trajectory& traj);

/// Observation term of the gradient before the adjoint sweep: one forcing
/// H_k^T w_k per observation time, for a weight vector in set order.
std::vector<TimedForcing> observation_forcings(const AssimilationProblem& problem,
                                               const Eigen::VectorXd& weighted);

/// H_k M_{0,k} delta for every entry, in set order (one TLM sweep).
Eigen::VectorXd observe_tangent(const AssimilationProblem& problem, const Trajectory& traj,
                                const Perturbation& delta0);

CostTerms cost_terms(const AssimilationProblem& problem, const StateVector& x0);
double cost_4dvar(const AssimilationProblem& problem, const StateVector& x0);
Perturbation grad_4dvar(const AssimilationProblem& problem, const StateVector& x0);
/// Cost and gradient from a single forward/adjoint pass.
double cost_and_grad_4dvar(const AssimilationProblem& problem, const StateVector& x0,
                           Perturbation& grad);

struct AnalysisResult {
  StateVector analysis;
  /// Cost and gradient norm per inner iteration. The norm is taken in the
  /// whitened control space the minimizer works in.
  std::vector<IterationRecord> history;
  OptimizerStatus status = OptimizerStatus::max_iterations;
  int evaluations = 0;
  double grad_norm_background = 0.0;
  double grad_norm_analysis = 0.0;
  /// ||grad J(x^a)|| / ||grad J(x^b)|| in state space (0 when the background
  /// gradient vanishes).
  double optimality_residual() const {
    return grad_norm_background > 0.0 ? grad_norm_analysis / grad_norm_background : 0.0;
  }
};

/// Minimizes the 4D-Var cost with L-BFGS over the control variable
/// v = U^{-1} (x0 - x^b), B0 = U U^T, for the problem's inner budget.
AnalysisResult solve_4dvar(const AssimilationProblem& problem,
                           const std::optional<StateVector>& x0_init = std::nullopt);

}  // namespace varmeta
