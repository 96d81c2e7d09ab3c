#include "varmeta/harness/checks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "varmeta/adjoint/tangent_adjoint.hpp"
#include "varmeta/assimilation/fourdvar.hpp"
#include "varmeta/harness/experiment.hpp"
#include "varmeta/harness/rng.hpp"
#include "varmeta/harness/scenario.hpp"
#include "varmeta/harness/twin.hpp"
#include "varmeta/metaopt/metaoptimize.hpp"

namespace varmeta {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

CheckResult finish(std::string name, double value, double threshold, std::string detail = {}) {
  CheckResult c;
  c.name = std::move(name);
  c.value = value;
  c.threshold = threshold;
  c.passed = std::isfinite(value) && value < threshold;
  c.detail = std::move(detail);
  return c;
}

AssimilationProblem twin_problem(const ExperimentConfig& cfg, ObsOperatorKind kind,
                                 const Trajectory& truth) {
  const auto b_cov = BackgroundCovariance::build(cfg.grid, truth.initial(), cfg.covariance);
  ObservationPlan plan;
  plan.kind = kind;
  plan.time = cfg.resolved_obs_time();
  plan.noise_fraction = cfg.noise_fraction;
  plan.idw = cfg.idw;
  if (kind == ObsOperatorKind::idw) plan.sensors = sensor_layout(cfg.grid, 1, cfg.sensors);
  SolverSettings inner;
  inner.max_iterations = cfg.inner_iterations;
  return AssimilationProblem(cfg.grid, cfg.model,
                             generate_background(truth.initial(), b_cov, cfg.seed_background),
                             b_cov, generate_observations(truth, plan, cfg.seed_obs_noise), kind,
                             cfg.idw, inner);
}

}  // namespace

CheckResult check_adjoint_dot_product(const ExperimentConfig& cfg, int pairs, std::uint64_t seed,
                                      double tolerance) {
  const StateVector x0 = gaussian_bell_initial(cfg.grid, cfg.bell_width, cfg.bell_peak, cfg.bell_base);
  const Trajectory traj = integrate(x0, cfg.grid, cfg.model);
  Rng rng(seed);
  const int n = traj.steps();
  double worst = 0.0;
  for (int p = 0; p < pairs; ++p) {
    const Perturbation d(cfg.grid.q, rng.normal_vector(x0.size()));
    const AdjointVariable l(cfg.grid.q, rng.normal_vector(x0.size()));
    const double a = dot(tlm_propagate(traj, d, n), l);
    const double b = dot(d, adj_propagate(traj, l, n));
    worst = std::max(worst, std::abs(a - b) / std::max(std::abs(a), std::abs(b)));
  }
  return finish("adjoint dot product, N=" + std::to_string(n) + ", " + std::to_string(pairs) +
                    " pairs",
                worst, tolerance);
}

CheckResult check_inner_gradient(const ExperimentConfig& cfg, ObsOperatorKind kind, int directions,
                                 std::uint64_t seed, double tolerance) {
  const StateVector x_ref =
      gaussian_bell_initial(cfg.grid, cfg.bell_width, cfg.bell_peak, cfg.bell_base);
  const Trajectory truth = integrate(x_ref, cfg.grid, cfg.model);
  const AssimilationProblem problem = twin_problem(cfg, kind, truth);
  const StateVector& x0 = problem.background();
  const Perturbation g = grad_4dvar(problem, x0);
  Rng rng(seed);
  double worst = 0.0;
  for (int d = 0; d < directions; ++d) {
    const Perturbation dir = problem.b_cov().apply_sqrt(rng.normal_vector(x0.size()));
    const double analytic = dot(g, dir);
    double best = std::numeric_limits<double>::infinity();
    for (double eps = 1e-1; eps >= 1e-7; eps *= 0.1) {
      const double jp = cost_4dvar(problem, displaced(x0, eps * dir));
      const double jm = cost_4dvar(problem, displaced(x0, -eps * dir));
      const double fd = (jp - jm) / (2.0 * eps);
      best = std::min(best, std::abs(fd - analytic) / std::abs(analytic));
    }
    worst = std::max(worst, best);
  }
  return finish("inner gradient vs finite differences (" + std::string(to_string(kind)) +
                    ", q=" + std::to_string(cfg.grid.q) + ")",
                worst, tolerance);
}

CheckResult check_outer_gradient(const ExperimentConfig& cfg, ParameterKind kind,
                                 std::uint64_t seed, double tolerance, LocationGradientMode mode,
                                 OuterProbe probe) {
  const ScenarioName name = kind == ParameterKind::obs_values    ? ScenarioName::obs_values
                            : kind == ParameterKind::obs_weights ? ScenarioName::obs_weights
                                                                 : ScenarioName::obs_locations_1;
  ExperimentConfig c = cfg;
  c.location_mode = mode;
  const Scenario s = make_scenario(c, name);
  const MetaProblem& meta = s.meta;
  const Eigen::VectorXd p0 = pack_parameters(meta);
  const OuterEvaluation ev = evaluate_outer(meta, p0);

  Rng rng(seed);
  Eigen::VectorXd dir = rng.normal_vector(p0.size());
  switch (kind) {
    case ParameterKind::obs_values:
      dir = dir.cwiseQuotient(meta.inner.obs().inv_variances().cwiseSqrt());
      break;
    case ParameterKind::obs_weights:
      dir = dir.cwiseProduct(p0);
      break;
    case ParameterKind::obs_locations:
      dir *= cfg.grid.dx();
      break;
  }
  std::string label = "random direction";
  if (probe == OuterProbe::largest_component) {
    Eigen::Index at = 0;
    ev.gradient.cwiseAbs().maxCoeff(&at);
    const double scale = std::abs(dir[at]);
    dir.setZero();
    dir[at] = scale;
    label = "parameter " + std::to_string(at);
  }
  const double analytic = ev.gradient.dot(dir);
  const auto psi_at = [&](const Eigen::VectorXd& p) {
    const AssimilationProblem inner = install_parameters(meta, p);
    const AnalysisResult a = solve_4dvar(inner);
    return verification_cost(a.analysis, meta.verification, inner.grid(), inner.params());
  };
  double best = std::numeric_limits<double>::infinity();
  std::string detail = "inner residual " + fmt(ev.analysis.optimality_residual()) + "; ";
  for (double eps : {1e-2, 1e-3}) {
    const double fd = (psi_at(p0 + eps * dir) - psi_at(p0 - eps * dir)) / (2.0 * eps);
    const double rel = std::abs(fd - analytic) / std::abs(analytic);
    detail += "eps=" + fmt(eps) + " fd=" + fmt(fd) + " analytic=" + fmt(analytic) + "; ";
    best = std::min(best, rel);
  }
  std::string what = std::string(to_string(kind));
  if (kind == ParameterKind::obs_locations)
    what += mode == LocationGradientMode::full ? " full" : " approximate";
  return finish("outer gradient vs nested finite differences (" + what + ", " + label +
                    ", q=" + std::to_string(cfg.grid.q) + ", N=" + std::to_string(cfg.grid.n_steps) +
                    ")",
                best, tolerance, detail);
}

CheckResult check_location_modes(const ExperimentConfig& cfg, double tolerance) {
  const Scenario s = make_scenario(cfg, ScenarioName::obs_locations_1);
  const OuterEvaluation ev = evaluate_outer(s.meta, pack_parameters(s.meta));
  const Eigen::VectorXd a = grad_psi_obs_locations(s.meta, ev.analysis.analysis,
                                                   ev.supersensitivity.mu,
                                                   LocationGradientMode::approximate)
                                .gradient;
  const Eigen::VectorXd f =
      grad_psi_obs_locations(s.meta, ev.analysis.analysis, ev.supersensitivity.mu,
                             LocationGradientMode::full)
          .gradient;
  int close = 0;
  for (Eigen::Index i = 0; i < f.size(); ++i)
    if (std::abs(a[i] - f[i]) < 0.1 * std::abs(f[i])) ++close;
  return finish("approximate vs full location gradient at the analysis (q=" +
                    std::to_string(cfg.grid.q) + ")",
                (a - f).norm() / f.norm(), tolerance,
                std::to_string(close) + "/" + std::to_string(f.size()) +
                    " components within 10%; cosine " + fmt(a.dot(f) / (a.norm() * f.norm())));
}

CheckResult check_mass_conservation(const ExperimentConfig& cfg, double tolerance) {
  const StateVector x0 = gaussian_bell_initial(cfg.grid, cfg.bell_width, cfg.bell_peak, cfg.bell_base);
  const Trajectory traj = integrate(x0, cfg.grid, cfg.model);
  const double m0 = total_mass(x0);
  const double drift = std::abs(total_mass(traj.final()) - m0) / m0;
  return finish("mass conservation over the reference run", drift, tolerance);
}

CheckResult check_determinism(const ExperimentConfig& cfg) {
  const StateVector x0 = gaussian_bell_initial(cfg.grid, cfg.bell_width, cfg.bell_peak, cfg.bell_base);
  const Trajectory a = integrate(x0, cfg.grid, cfg.model);
  const Trajectory b = integrate(x0, cfg.grid, cfg.model);
  bool same = a.states.size() == b.states.size();
  for (std::size_t k = 0; same && k < a.states.size(); ++k) same = a.states[k] == b.states[k];

  const Scenario s1 = make_scenario(cfg, ScenarioName::obs_weights);
  const Scenario s2 = make_scenario(cfg, ScenarioName::obs_weights);
  same = same && s1.meta.inner.background() == s2.meta.inner.background() &&
         s1.meta.inner.obs().values() == s2.meta.inner.obs().values();

  ExperimentConfig short_run = cfg;
  short_run.outer_iterations = 1;
  short_run.inner_iterations = std::min(cfg.inner_iterations, 20);
  const std::string r1 = summary_row(run_scenario(short_run, ScenarioName::obs_values));
  const std::string r2 = summary_row(run_scenario(short_run, ScenarioName::obs_values));
  same = same && r1 == r2;
  return finish("bit-identical repeated runs", same ? 0.0 : 1.0, 0.5, r1);
}

std::vector<CheckResult> run_verification_suite() {
  std::vector<CheckResult> out;
  const ExperimentConfig full_size;
  const ExperimentConfig reduced = reduced_config();
  out.push_back(check_mass_conservation(full_size));
  out.push_back(check_adjoint_dot_product(full_size, 20, 11));
  out.push_back(check_inner_gradient(reduced, ObsOperatorKind::full_grid, 5, 12));
  out.push_back(check_inner_gradient(reduced, ObsOperatorKind::idw, 5, 13));
  // nested differences need the inner problem solved well past the run budget
  ExperimentConfig oracle = reduced;
  oracle.inner_iterations = 1000;
  out.push_back(check_outer_gradient(oracle, ParameterKind::obs_values, 14, 0.05));
  out.push_back(check_outer_gradient(oracle, ParameterKind::obs_weights, 15, 0.05));
  out.push_back(check_outer_gradient(oracle, ParameterKind::obs_locations, 16, 0.10));
  out.push_back(check_outer_gradient(oracle, ParameterKind::obs_locations, 16, 0.10,
                                     LocationGradientMode::approximate,
                                     OuterProbe::largest_component));
  out.push_back(check_outer_gradient(oracle, ParameterKind::obs_locations, 16, 0.10,
                                     LocationGradientMode::full));
  out.push_back(check_location_modes(oracle, 0.10));
  out.push_back(check_determinism(reduced));
  return out;
}

std::string format_check(const CheckResult& c) {
  return std::string(c.passed ? "PASS" : "FAIL") + "  " + c.name + "  (" + fmt(c.value) +
         " < " + fmt(c.threshold) + ")" + (c.detail.empty() ? "" : "  " + c.detail);
}

}  // namespace varmeta
