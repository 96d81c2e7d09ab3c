#pragma once

#include <Eigen/Core>

#include <functional>
#include <optional>
#include <string_view>
#include <vector>

namespace varmeta {

/// Per-coordinate box [lower, upper]; use +-infinity for free sides.
struct Bounds {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Eigen::VectorXd project(const Eigen::VectorXd& x) const {
    return x.cwiseMax(lower).cwiseMin(upper);
  }
};

struct SolverSettings {
  int max_iterations = 100;
  /// Number of stored (s, y) correction pairs.
  int memory = 5;
  double wolfe_c1 = 1e-4;
  double wolfe_c2 = 0.9;
  /// Stop early once the projected gradient norm drops to this value; 0 runs
  /// the full budget unless the gradient vanishes exactly.
  double grad_tolerance = 0.0;
  std::optional<Bounds> bounds;
  /// Function evaluations allowed per line search.
  int max_line_search_evaluations = 25;

  /// Throws std::invalid_argument; `n` is the problem dimension.
  void validate(Eigen::Index n) const;
};

enum class OptimizerStatus {
  max_iterations,
  converged,
  line_search_failed,
};

std::string_view to_string(OptimizerStatus s);

struct IterationRecord {
  int iteration = 0;
  double value = 0.0;
  /// Norm of the projected gradient at the iterate.
  double grad_norm = 0.0;
  /// Accepted line-search step length (0 for the initial point).
  double step_size = 0.0;
  /// Euclidean length of the accepted displacement.
  double step_norm = 0.0;
};

struct MinimizeResult {
  Eigen::VectorXd x;
  double value = 0.0;
  Eigen::VectorXd gradient;
  /// history[0] is the starting point, then one record per accepted step.
  std::vector<IterationRecord> history;
  OptimizerStatus status = OptimizerStatus::max_iterations;
  int evaluations = 0;

  int accepted_steps() const { return static_cast<int>(history.size()) - 1; }
};

/// Returns f(x) and writes the gradient into `grad` (already sized). A
/// non-finite return value marks x as infeasible for the line search.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

/// Invoked after every accepted step (and once for the starting point).
using IterationCallback = std::function<void(const IterationRecord&, const Eigen::VectorXd& x)>;

/// Limited-memory BFGS with optional box constraints.
///
/// Bounds are handled with gradient projection: variables pinned at a bound
/// with the gradient pointing outward are frozen, the two-loop direction is
/// computed on the free set, and the line search runs along the projected
/// path P(x + a d). The line search enforces the strong Wolfe conditions
/// (sufficient decrease measured along the projected displacement) and is
/// fully deterministic.
///
/// Throws NonFiniteError if the objective is not finite at x_init.
MinimizeResult lbfgs_minimize(const Objective& objective, Eigen::VectorXd x_init,
                              const SolverSettings& settings,
                              const IterationCallback& on_iteration = {});

}  // namespace varmeta
