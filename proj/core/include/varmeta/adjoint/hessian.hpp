#pragma once

#include "varmeta/assimilation/problem.hpp"
#include "varmeta/model/fields.hpp"
#include "varmeta/model/swe_model.hpp"

namespace varmeta {

enum class HessianMode { gauss_newton, fd_gradient };

/// Hessian of the 4D-Var cost at x0 applied to v.
Perturbation hessian_vector(const AssimilationProblem& problem, const StateVector& x0,
                            const Perturbation& v, HessianMode mode = HessianMode::gauss_newton);

/// Gauss-Newton Hessian at a fixed linearization point. The trajectory is
/// computed once; every product costs one TLM and one adjoint sweep.
///
///   H v = (1 + damping) B0^{-1} v + sum_k M_{0,k}^T H_k^T R_k^{-1} H_k M_{0,k} v
class GaussNewtonHessian {
 public:
  GaussNewtonHessian(const AssimilationProblem& problem, const StateVector& x0,
                     double damping = 0.0);

  Perturbation apply(const Perturbation& v) const;
  const Trajectory& trajectory() const { return traj_; }
  double damping() const { return damping_; }
  GaussNewtonHessian with_damping(double damping) const;

 private:
  const AssimilationProblem* problem_;
  Trajectory traj_;
  double damping_;
};

}  // namespace varmeta
