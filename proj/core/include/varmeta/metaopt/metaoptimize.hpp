#pragma once

#include <Eigen/Core>

#include <functional>
#include <string>
#include <vector>

#include "varmeta/assimilation/fourdvar.hpp"
#include "varmeta/metaopt/gradients.hpp"

namespace varmeta {

/// One outer objective evaluation: inner solve, Psi and its gradient.
struct OuterEvaluation {
  double psi = 0.0;
  Eigen::VectorXd gradient;
  AnalysisResult analysis;
  Supersensitivity supersensitivity;
};

/// Throws on inner failure (NonFiniteError, DegenerateLocation, ...).
OuterEvaluation evaluate_outer(const MetaProblem& meta, const Eigen::VectorXd& parameters);

struct OuterRecord {
  int outer_iter = 0;
  double psi = 0.0;
  double inner_grad_residual = 0.0;
  int cg_iters = 0;
  double cg_residual = 0.0;
  double step_norm = 0.0;
  Eigen::VectorXd parameters;
};

enum class MetaStatus { completed, converged, broke_down };
std::string_view to_string(MetaStatus s);

struct MetaResult {
  Eigen::VectorXd parameters;
  /// history[0] is the starting point; one record per accepted outer step.
  std::vector<OuterRecord> history;
  AnalysisResult final_analysis;
  double psi_initial = 0.0;
  double psi_final = 0.0;
  MetaStatus status = MetaStatus::completed;
  int evaluations = 0;
  std::vector<std::string> warnings;
};

using OuterCallback = std::function<void(const OuterRecord&)>;

/// Outer L-BFGS over the parameters of meta.parameter_kind. Locations are
/// boxed to the domain, weights bounded below by 1e-8, values free. Failed
/// inner evaluations count as +infinity for the line search; a failed line
/// search or a failed starting point ends the run with status broke_down.
MetaResult metaoptimize(const MetaProblem& meta, const OuterCallback& on_iteration = {});

inline constexpr double kMinInverseVariance = 1e-8;

/// Outer box constraints for the given parameter kind, if any.
std::optional<Bounds> outer_bounds(const MetaProblem& meta);

}  // namespace varmeta
