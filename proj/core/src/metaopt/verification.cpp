#include "varmeta/metaopt/verification.hpp"

#include <stdexcept>

namespace varmeta {

void VerificationSpec::validate(const Grid& grid) const {
  if (t_v < 0 || t_v > grid.n_steps) throw std::invalid_argument("t_v outside the window");
  if (verif_state.q() != grid.q) throw std::invalid_argument("verification state does not match grid");
  if (weight.size() != 0) {
    if (weight.size() != verif_state.size())
      throw std::invalid_argument("verification weight has the wrong length");
    if ((weight.array() < 0.0).any() || !weight.allFinite())
      throw std::invalid_argument("verification weight must be finite and >= 0");
  }
}

Eigen::VectorXd VerificationSpec::apply_c(const Eigen::VectorXd& e) const {
  return weight.size() == 0 ? e : Eigen::VectorXd(weight.cwiseProduct(e));
}

Perturbation forecast_error(const StateVector& forecast, const VerificationSpec& spec) {
  return difference(forecast, spec.verif_state);
}

double verification_cost_at(const StateVector& forecast, const VerificationSpec& spec) {
  const Eigen::VectorXd e = forecast_error(forecast, spec).values();
  return 0.5 * e.dot(spec.apply_c(e));
}

double verification_cost(const StateVector& analysis_x0, const VerificationSpec& spec,
                         const Grid& grid, const ModelParams& params) {
  const Trajectory t = integrate(analysis_x0, grid, params, spec.t_v);
  return verification_cost_at(t.final(), spec);
}

}  // namespace varmeta
