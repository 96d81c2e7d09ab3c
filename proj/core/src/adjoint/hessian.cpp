#include "varmeta/adjoint/hessian.hpp"

#include <algorithm>

#include "varmeta/assimilation/fourdvar.hpp"

namespace varmeta {

GaussNewtonHessian::GaussNewtonHessian(const AssimilationProblem& problem, const StateVector& x0,
                                       double damping)
    : problem_(&problem), traj_(observation_trajectory(problem, x0)), damping_(damping) {}

GaussNewtonHessian GaussNewtonHessian::with_damping(double damping) const {
  GaussNewtonHessian h = *this;
  h.damping_ = damping;
  return h;
}

Perturbation GaussNewtonHessian::apply(const Perturbation& v) const {
  Perturbation out = problem_->b_cov().apply_binv(v);
  if (damping_ != 0.0) out *= 1.0 + damping_;
  if (problem_->obs().empty()) return out;
  const Eigen::VectorXd hv = observe_tangent(*problem_, traj_, v);
  const Eigen::VectorXd w = problem_->obs().inv_variances().cwiseProduct(hv);
  out += retag<PerturbationTag>(adjoint_accumulate(traj_, observation_forcings(*problem_, w)));
  return out;
}

Perturbation hessian_vector(const AssimilationProblem& problem, const StateVector& x0,
                            const Perturbation& v, HessianMode mode) {
  const double vn = v.norm();
  if (vn == 0.0) return Perturbation(v.q());
  if (mode == HessianMode::gauss_newton) return GaussNewtonHessian(problem, x0).apply(v);

  const double eps = 1e-6 * std::max(1.0, x0.values().lpNorm<Eigen::Infinity>()) / vn;
  const Perturbation step = eps * v;
  const Perturbation gp = grad_4dvar(problem, displaced(x0, step));
  const Perturbation gm = grad_4dvar(problem, displaced(x0, -1.0 * step));
  return (0.5 / eps) * (gp - gm);
}

}  // namespace varmeta
