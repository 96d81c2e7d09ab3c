#pragma once

#include <Eigen/Core>

#include <string_view>
#include <vector>

#include "varmeta/assimilation/problem.hpp"
#include "varmeta/metaopt/verification.hpp"
#include "varmeta/optim/cg.hpp"
#include "varmeta/optim/lbfgs.hpp"

namespace varmeta {

enum class ParameterKind { obs_values, obs_weights, obs_locations };
enum class LocationGradientMode { approximate, full };

std::string_view to_string(ParameterKind k);

struct MetaProblem {
  AssimilationProblem inner;
  VerificationSpec verification;
  ParameterKind parameter_kind = ParameterKind::obs_values;
  SolverSettings outer;
  CgSettings cg;
  LocationGradientMode location_mode = LocationGradientMode::approximate;
  /// Initial B0^{-1} damping used after an indefinite CG curvature; doubled
  /// on each further failure.
  double damping = 1e-2;
  int max_damping_retries = 8;
  /// Precondition the supersensitivity CG with B0.
  bool precondition_cg = true;
  /// Inner optimality residual above which an outer evaluation warns.
  double inner_residual_warning = 1e-2;

  /// Throws std::invalid_argument.
  void validate() const;
};

struct Supersensitivity {
  Perturbation mu;
  int cg_iterations = 0;
  /// ||H mu - b|| / ||b|| at exit (0 when b = 0).
  double cg_residual = 0.0;
  bool converged = true;
  /// Damping that produced mu (0 unless indefiniteness was hit).
  double damping = 0.0;
  /// Psi at the analysis, a by-product of the right-hand side.
  double psi = 0.0;
};

/// mu = H^{-1} M_{0,v}^T C (x^a_v - x^verif), H the Gauss-Newton Hessian at
/// the analysis, solved with CG.
Supersensitivity compute_supersensitivity(const MetaProblem& meta, const StateVector& analysis_x0);

/// dPsi/dy in observation-set order: R^{-1} H M mu.
Eigen::VectorXd grad_psi_obs_values(const MetaProblem& meta, const StateVector& analysis_x0,
                                    const Perturbation& mu);

/// dPsi/dw for w = 1/sigma^2, in observation-set order: -d_i (H M mu)_i.
Eigen::VectorXd grad_psi_obs_weights(const MetaProblem& meta, const StateVector& analysis_x0,
                                     const Perturbation& mu);

/// dPsi/dR_k as dense matrices (R^{-1} d) (R^{-1} H M mu)^T, one per
/// observation time.
std::vector<Eigen::MatrixXd> grad_psi_obs_covariance(const MetaProblem& meta,
                                                     const StateVector& analysis_x0,
                                                     const Perturbation& mu);

/// Weight gradient obtained from the dense covariance gradient by the chain
/// rule dPsi/dw_i = -R_ii^2 dPsi/dR_ii.
Eigen::VectorXd grad_psi_obs_weights_kronecker(const MetaProblem& meta,
                                               const StateVector& analysis_x0,
                                               const Perturbation& mu);

struct LocationGradients {
  /// (dPsi/dlx, dPsi/dly) per Cartesian sensor, interleaved.
  Eigen::VectorXd gradient;
  /// Sensors whose gradient was zeroed because they sit on a grid node.
  std::vector<std::size_t> degenerate;
};

LocationGradients grad_psi_obs_locations(const MetaProblem& meta, const StateVector& analysis_x0,
                                         const Perturbation& mu,
                                         LocationGradientMode mode = LocationGradientMode::approximate);

/// Current parameter vector for the problem's parameter kind.
Eigen::VectorXd pack_parameters(const MetaProblem& meta);
/// Inner problem with the parameters installed.
AssimilationProblem install_parameters(const MetaProblem& meta, const Eigen::VectorXd& p);
/// Outer gradient for the problem's parameter kind.
Eigen::VectorXd outer_gradient(const MetaProblem& meta, const StateVector& analysis_x0,
                               const Perturbation& mu);

}  // namespace varmeta
