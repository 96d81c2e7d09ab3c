#pragma once

#include <span>
#include <vector>

#include "varmeta/model/swe_model.hpp"

namespace varmeta {

/// Jacobian of `step` at `base` applied to `delta`.
Perturbation tlm_step(const StateVector& base, const Perturbation& delta, const Grid& grid,
                      const ModelParams& params);

/// Exact transpose of tlm_step at the same base state.
AdjointVariable adj_step(const StateVector& base, const AdjointVariable& lambda, const Grid& grid,
                         const ModelParams& params);

/// M_{0,k} delta0, linearized along the trajectory checkpoints.
Perturbation tlm_propagate(const Trajectory& traj, const Perturbation& delta0, int k);

/// M_{0,k}^T lambda_k.
AdjointVariable adj_propagate(const Trajectory& traj, const AdjointVariable& lambda_k, int k);

/// Runs one tangent-linear sweep and returns M_{0,k} delta0 for each k in `times`
/// (ascending, each within [0, traj.steps()]).
std::vector<Perturbation> tlm_sweep(const Trajectory& traj, const Perturbation& delta0,
                                    std::span<const int> times);

struct TimedForcing {
  int k = 0;
  AdjointVariable value;
};

/// sum_k M_{0,k}^T f_k in a single backward sweep.
AdjointVariable adjoint_accumulate(const Trajectory& traj, std::span<const TimedForcing> forcings);

}  // namespace varmeta
