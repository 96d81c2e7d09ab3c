#include "varmeta/optim/cg.hpp"

#include <stdexcept>
#include <string>

#include "varmeta/errors.hpp"

namespace varmeta {

void CgSettings::validate() const {
  if (!(rel_tolerance > 0.0)) throw std::invalid_argument("cg: rel_tolerance must be > 0");
  if (max_iterations < 1) throw std::invalid_argument("cg: max_iterations must be >= 1");
}

double CgResult::final_relative_residual() const {
  if (residual_history.empty() || residual_history.front() == 0.0) return 0.0;
  return residual_history.back() / residual_history.front();
}

CgResult cg_solve(const LinearOperator& apply_a, const Eigen::VectorXd& b,
                  const CgSettings& settings, const LinearOperator& preconditioner) {
  settings.validate();
  CgResult out;
  out.x = Eigen::VectorXd::Zero(b.size());
  const double b_norm = b.norm();
  out.residual_history.push_back(b_norm);
  if (b_norm == 0.0) {
    out.converged = true;
    return out;
  }

  Eigen::VectorXd r = b;
  Eigen::VectorXd z = preconditioner ? preconditioner(r) : r;
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  const double target = settings.rel_tolerance * b_norm;

  for (int it = 1; it <= settings.max_iterations; ++it) {
    const Eigen::VectorXd ap = apply_a(p);
    const double curvature = p.dot(ap);
    if (!(curvature > 0.0)) {
      throw IndefiniteDetected("cg: non-positive curvature p^T A p = " + std::to_string(curvature),
                               it, curvature);
    }
    const double alpha = rz / curvature;
    out.x += alpha * p;
    r -= alpha * ap;
    out.iterations = it;
    const double r_norm = r.norm();
    out.residual_history.push_back(r_norm);
    if (r_norm <= target) {
      out.converged = true;
      break;
    }
    z = preconditioner ? preconditioner(r) : r;
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  return out;
}

}  // namespace varmeta
