#pragma once

#include <Eigen/Core>

#include "varmeta/model/fields.hpp"
#include "varmeta/model/grid.hpp"
#include "varmeta/model/swe_model.hpp"

namespace varmeta {

/// Quadratic forecast-error functional
///   Psi = 1/2 (x_v - x^verif)^T C (x_v - x^verif),  x_v = M_{0->t_v}(x0).
struct VerificationSpec {
  StateVector verif_state;
  int t_v = 0;
  /// Diagonal of C; empty means C = I.
  Eigen::VectorXd weight;

  void validate(const Grid& grid) const;
  Eigen::VectorXd apply_c(const Eigen::VectorXd& e) const;
};

/// Forecast error x_v - x^verif for a given forecast state.
Perturbation forecast_error(const StateVector& forecast, const VerificationSpec& spec);

double verification_cost(const StateVector& analysis_x0, const VerificationSpec& spec,
                         const Grid& grid, const ModelParams& params);

/// Psi from an already computed forecast at t_v.
double verification_cost_at(const StateVector& forecast, const VerificationSpec& spec);

}  // namespace varmeta
