#include "varmeta/assimilation/fourdvar.hpp"

#include <algorithm>
#include <limits>

#include "varmeta/errors.hpp"

namespace varmeta {

namespace {

int last_observation_time(const AssimilationProblem& problem) {
  const auto& t = problem.op().times();
  return t.empty() ? 0 : t.back();
}

// Observation part of the cost; writes its gradient into g_obs.
double observation_cost_and_grad(const AssimilationProblem& problem, const StateVector& x0,
                                 Perturbation& g_obs) {
  const Trajectory traj = observation_trajectory(problem, x0);
  const Eigen::VectorXd d = innovations(problem, traj);
  const Eigen::VectorXd wd = problem.obs().inv_variances().cwiseProduct(d);
  const auto forcings = observation_forcings(problem, wd);
  g_obs = retag<PerturbationTag>(adjoint_accumulate(traj, forcings));
  return 0.5 * d.dot(wd);
}

}  // namespace

Trajectory observation_trajectory(const AssimilationProblem& problem, const StateVector& x0) {
  return integrate(x0, problem.grid(), problem.params(), last_observation_time(problem));
}

Eigen::VectorXd innovations(const AssimilationProblem& problem, const Trajectory& traj) {
  const auto& op = problem.op();
  Eigen::VectorXd d(static_cast<Eigen::Index>(op.size()));
  for (int k : op.times()) {
    const auto [first, last] = op.range_at(k);
    d.segment(first, last - first) = op.apply(first, last, traj.states.at(k).values());
  }
  return d - problem.obs().values();
}

std::vector<TimedForcing> observation_forcings(const AssimilationProblem& problem,
                                               const Eigen::VectorXd& weighted) {
  const auto& op = problem.op();
  std::vector<TimedForcing> out;
  out.reserve(op.times().size());
  for (int k : op.times()) {
    const auto [first, last] = op.range_at(k);
    AdjointVariable f(problem.grid().q);
    op.apply_transpose_add(first, last, weighted.segment(first, last - first), f.values());
    out.push_back({k, std::move(f)});
  }
  return out;
}

Eigen::VectorXd observe_tangent(const AssimilationProblem& problem, const Trajectory& traj,
                                const Perturbation& delta0) {
  const auto& op = problem.op();
  Eigen::VectorXd out(static_cast<Eigen::Index>(op.size()));
  if (op.times().empty()) return out;
  const auto sweep = tlm_sweep(traj, delta0, op.times());
  for (std::size_t t = 0; t < op.times().size(); ++t) {
    const auto [first, last] = op.range_at(op.times()[t]);
    out.segment(first, last - first) = op.apply(first, last, sweep[t].values());
  }
  return out;
}

CostTerms cost_terms(const AssimilationProblem& problem, const StateVector& x0) {
  const Perturbation dx = difference(x0, problem.background());
  CostTerms c;
  c.background = 0.5 * dot(dx, problem.b_cov().apply_binv(dx));
  const Trajectory traj = observation_trajectory(problem, x0);
  const Eigen::VectorXd d = innovations(problem, traj);
  c.observation = 0.5 * d.dot(problem.obs().inv_variances().cwiseProduct(d));
  return c;
}

double cost_4dvar(const AssimilationProblem& problem, const StateVector& x0) {
  return cost_terms(problem, x0).total();
}

double cost_and_grad_4dvar(const AssimilationProblem& problem, const StateVector& x0,
                           Perturbation& grad) {
  const Perturbation dx = difference(x0, problem.background());
  const Perturbation gb = problem.b_cov().apply_binv(dx);
  Perturbation go;
  const double jo = observation_cost_and_grad(problem, x0, go);
  grad = gb + go;
  return 0.5 * dot(dx, gb) + jo;
}

Perturbation grad_4dvar(const AssimilationProblem& problem, const StateVector& x0) {
  Perturbation g;
  cost_and_grad_4dvar(problem, x0, g);
  return g;
}

AnalysisResult solve_4dvar(const AssimilationProblem& problem,
                           const std::optional<StateVector>& x0_init) {
  const auto& b = problem.b_cov();
  const StateVector& xb = problem.background();
  const Eigen::Index n = xb.size();

  Eigen::VectorXd v0 = Eigen::VectorXd::Zero(n);
  if (x0_init && !(*x0_init == xb)) v0 = b.apply_sqrt_inverse(difference(*x0_init, xb));

  const Objective objective = [&](const Eigen::VectorXd& v, Eigen::VectorXd& gv) {
    const StateVector x = displaced(xb, b.apply_sqrt(v));
    Perturbation go;
    double jo;
    try {
      jo = observation_cost_and_grad(problem, x, go);
    } catch (const NonFiniteError&) {
      return std::numeric_limits<double>::infinity();
    }
    gv = v + b.apply_sqrt_transpose(go);
    return 0.5 * v.squaredNorm() + jo;
  };

  SolverSettings settings = problem.inner();
  settings.bounds.reset();
  MinimizeResult r = lbfgs_minimize(objective, v0, settings);

  AnalysisResult out;
  out.analysis = displaced(xb, b.apply_sqrt(r.x));
  out.history = std::move(r.history);
  out.status = r.status;
  out.evaluations = r.evaluations;

  Perturbation go_b;
  observation_cost_and_grad(problem, xb, go_b);
  out.grad_norm_background = go_b.norm();
  Perturbation go_a;
  observation_cost_and_grad(problem, out.analysis, go_a);
  out.grad_norm_analysis = (b.apply_sqrt_inverse_transpose(r.x) + go_a).norm();
  return out;
}

}  // namespace varmeta
