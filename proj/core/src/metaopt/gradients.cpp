#include "varmeta/metaopt/gradients.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "varmeta/adjoint/hessian.hpp"
#include "varmeta/assimilation/fourdvar.hpp"
#include "varmeta/errors.hpp"

namespace varmeta {

std::string_view to_string(ParameterKind k) {
  switch (k) {
    case ParameterKind::obs_values:
      return "obs_values";
    case ParameterKind::obs_weights:
      return "obs_weights";
    case ParameterKind::obs_locations:
      return "obs_locations";
  }
  return "?";
}

void MetaProblem::validate() const {
  verification.validate(inner.grid());
  cg.validate();
  if (!(damping > 0.0)) throw std::invalid_argument("damping must be > 0");
  if (parameter_kind == ParameterKind::obs_locations) {
    if (inner.operator_kind() != ObsOperatorKind::idw)
      throw std::invalid_argument("location optimization needs the IDW operator");
    if (inner.obs().cart_count() == 0)
      throw std::invalid_argument("location optimization needs Cartesian sensors");
  }
  if (parameter_kind == ParameterKind::obs_weights &&
      (inner.obs().inv_variances().array() <= 0.0).any())
    throw std::invalid_argument("weights must start strictly positive");
}

Supersensitivity compute_supersensitivity(const MetaProblem& meta, const StateVector& analysis_x0) {
  const auto& problem = meta.inner;
  const Grid& grid = problem.grid();
  const int t_v = meta.verification.t_v;

  const Trajectory forecast = integrate(analysis_x0, grid, problem.params(), t_v);
  Supersensitivity out;
  out.psi = verification_cost_at(forecast.final(), meta.verification);
  const Eigen::VectorXd ce =
      meta.verification.apply_c(forecast_error(forecast.final(), meta.verification).values());
  const AdjointVariable rhs = adj_propagate(forecast, AdjointVariable(grid.q, ce), t_v);
  out.mu = Perturbation(grid.q);
  if (rhs.norm() == 0.0) return out;

  GaussNewtonHessian hess(problem, analysis_x0);
  LinearOperator precond;
  if (meta.precondition_cg) {
    precond = [&](const Eigen::VectorXd& r) {
      return problem.b_cov().apply_b(Perturbation(grid.q, r)).values();
    };
  }

  double damping = 0.0;
  for (int attempt = 0;; ++attempt) {
    const GaussNewtonHessian h = hess.with_damping(damping);
    const LinearOperator apply = [&](const Eigen::VectorXd& v) {
      return h.apply(Perturbation(grid.q, v)).values();
    };
    try {
      const CgResult r = cg_solve(apply, rhs.values(), meta.cg, precond);
      out.mu = Perturbation(grid.q, r.x);
      out.cg_iterations = r.iterations;
      out.cg_residual = r.final_relative_residual();
      out.converged = r.converged;
      out.damping = damping;
      return out;
    } catch (const IndefiniteDetected&) {
      if (attempt >= meta.max_damping_retries) throw;
      damping = damping == 0.0 ? meta.damping : 2.0 * damping;
    }
  }
}

namespace {

// H_k M_{0,k} mu for every entry, plus the analysis trajectory.
struct TangentSamples {
  Trajectory traj;
  Eigen::VectorXd hm_mu;
};

TangentSamples tangent_samples(const AssimilationProblem& problem, const StateVector& xa,
                               const Perturbation& mu) {
  TangentSamples s{observation_trajectory(problem, xa), {}};
  s.hm_mu = observe_tangent(problem, s.traj, mu);
  return s;
}

}  // namespace

Eigen::VectorXd grad_psi_obs_values(const MetaProblem& meta, const StateVector& analysis_x0,
                                    const Perturbation& mu) {
  const auto& problem = meta.inner;
  const Eigen::VectorXd w = problem.obs().inv_variances();
  if (mu.norm() == 0.0) return Eigen::VectorXd::Zero(w.size());
  const TangentSamples s = tangent_samples(problem, analysis_x0, mu);
  return w.cwiseProduct(s.hm_mu);
}

Eigen::VectorXd grad_psi_obs_weights(const MetaProblem& meta, const StateVector& analysis_x0,
                                     const Perturbation& mu) {
  const auto& problem = meta.inner;
  const Eigen::Index m = static_cast<Eigen::Index>(problem.obs().size());
  if (mu.norm() == 0.0) return Eigen::VectorXd::Zero(m);
  const TangentSamples s = tangent_samples(problem, analysis_x0, mu);
  const Eigen::VectorXd d = innovations(problem, s.traj);
  return -d.cwiseProduct(s.hm_mu);
}

std::vector<Eigen::MatrixXd> grad_psi_obs_covariance(const MetaProblem& meta,
                                                     const StateVector& analysis_x0,
                                                     const Perturbation& mu) {
  const auto& problem = meta.inner;
  const TangentSamples s = tangent_samples(problem, analysis_x0, mu);
  const Eigen::VectorXd w = problem.obs().inv_variances();
  const Eigen::VectorXd rd = w.cwiseProduct(innovations(problem, s.traj));
  const Eigen::VectorXd grad_y = w.cwiseProduct(s.hm_mu);
  std::vector<Eigen::MatrixXd> out;
  for (int k : problem.op().times()) {
    const auto [first, last] = problem.op().range_at(k);
    const auto n = static_cast<Eigen::Index>(last - first);
    out.push_back(rd.segment(first, n) * grad_y.segment(first, n).transpose());
  }
  return out;
}

Eigen::VectorXd grad_psi_obs_weights_kronecker(const MetaProblem& meta,
                                               const StateVector& analysis_x0,
                                               const Perturbation& mu) {
  const auto& problem = meta.inner;
  const auto blocks = grad_psi_obs_covariance(meta, analysis_x0, mu);
  const Eigen::VectorXd w = problem.obs().inv_variances();
  Eigen::VectorXd g(w.size());
  const auto& times = problem.op().times();
  for (std::size_t t = 0; t < times.size(); ++t) {
    const auto first = static_cast<Eigen::Index>(problem.op().range_at(times[t]).first);
    const Eigen::VectorXd diag = blocks[t].diagonal();
    for (Eigen::Index i = 0; i < diag.size(); ++i) {
      const double r = 1.0 / w[first + i];
      g[first + i] = -r * r * diag[i];
    }
  }
  return g;
}

LocationGradients grad_psi_obs_locations(const MetaProblem& meta, const StateVector& analysis_x0,
                                         const Perturbation& mu, LocationGradientMode mode) {
  const auto& problem = meta.inner;
  const auto& obs = problem.obs();
  const auto& op = problem.op();
  LocationGradients out;
  out.gradient = Eigen::VectorXd::Zero(2 * static_cast<Eigen::Index>(obs.cart_count()));
  if (mu.norm() == 0.0) return out;

  const TangentSamples s = tangent_samples(problem, analysis_x0, mu);
  const Eigen::VectorXd d = mode == LocationGradientMode::full
                                ? innovations(problem, s.traj)
                                : Eigen::VectorXd();
  std::vector<Perturbation> m_mu;
  if (mode == LocationGradientMode::full) m_mu = tlm_sweep(s.traj, mu, op.times());

  Eigen::Index slot = 0;
  for (std::size_t e = 0; e < obs.size(); ++e) {
    const auto& entry = obs[e];
    if (entry.kind != LocationKind::cart) continue;
    const Eigen::Index at = slot;
    slot += 2;
    if (op.min_distance(e) < kIdwDegenerateDistance) {
      out.degenerate.push_back(e);
      continue;
    }
    const double w = entry.inv_variance;
    const LocationGradient dh = op.location_derivative(e, s.traj.states.at(entry.k).values());
    double gx = -w * dh.dx * s.hm_mu[e];
    double gy = -w * dh.dy * s.hm_mu[e];
    if (mode == LocationGradientMode::full) {
      const auto t = static_cast<std::size_t>(
          std::lower_bound(op.times().begin(), op.times().end(), entry.k) - op.times().begin());
      const LocationGradient dm = op.location_derivative(e, m_mu[t].values());
      gx -= w * d[e] * dm.dx;
      gy -= w * d[e] * dm.dy;
    }
    out.gradient[at] = gx;
    out.gradient[at + 1] = gy;
  }
  return out;
}

Eigen::VectorXd pack_parameters(const MetaProblem& meta) {
  switch (meta.parameter_kind) {
    case ParameterKind::obs_values:
      return meta.inner.obs().values();
    case ParameterKind::obs_weights:
      return meta.inner.obs().inv_variances();
    case ParameterKind::obs_locations:
      return meta.inner.obs().locations();
  }
  return {};
}

AssimilationProblem install_parameters(const MetaProblem& meta, const Eigen::VectorXd& p) {
  const auto& obs = meta.inner.obs();
  switch (meta.parameter_kind) {
    case ParameterKind::obs_values:
      return meta.inner.with_observations(obs.with_values(p));
    case ParameterKind::obs_weights:
      return meta.inner.with_observations(obs.with_inv_variances(p));
    case ParameterKind::obs_locations:
      return meta.inner.with_observations(obs.with_locations(p));
  }
  throw std::logic_error("unknown parameter kind");
}

Eigen::VectorXd outer_gradient(const MetaProblem& meta, const StateVector& analysis_x0,
                               const Perturbation& mu) {
  switch (meta.parameter_kind) {
    case ParameterKind::obs_values:
      return grad_psi_obs_values(meta, analysis_x0, mu);
    case ParameterKind::obs_weights:
      return grad_psi_obs_weights(meta, analysis_x0, mu);
    case ParameterKind::obs_locations:
      return grad_psi_obs_locations(meta, analysis_x0, mu, meta.location_mode).gradient;
  }
  throw std::logic_error("unknown parameter kind");
}

}  // namespace varmeta
