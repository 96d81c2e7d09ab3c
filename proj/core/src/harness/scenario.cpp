#include "varmeta/harness/scenario.hpp"

#include <cmath>
#include <map>

namespace varmeta {

StateVector scenario_initial_state(const ExperimentConfig& cfg, ScenarioName name) {
  if (name == ScenarioName::obs_values)
    return elliptic_bell_initial(cfg.grid, cfg.bell_width * cfg.bell_aspect, cfg.bell_width,
                                 cfg.bell_peak, cfg.bell_base);
  return gaussian_bell_initial(cfg.grid, cfg.bell_width, cfg.bell_peak, cfg.bell_base);
}

ObservationSet transpose_observations(const ObservationSet& obs) {
  std::map<std::tuple<int, int, int, int>, double> by_node;
  for (const auto& e : obs.entries())
    if (e.kind == LocationKind::grid)
      by_node[{e.k, static_cast<int>(e.variable), e.ix, e.iy}] = e.value;
  Eigen::VectorXd values = obs.values();
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const auto& e = obs[i];
    if (e.kind != LocationKind::grid) continue;
    // mirrored flow: hu and hv trade places
    ObsVariable src = e.variable;
    if (src == ObsVariable::u) src = ObsVariable::v;
    else if (src == ObsVariable::v) src = ObsVariable::u;
    const auto it = by_node.find({e.k, static_cast<int>(src), e.iy, e.ix});
    if (it != by_node.end()) values[static_cast<Eigen::Index>(i)] = it->second;
  }
  return obs.with_values(values);
}

Scenario make_scenario(const ExperimentConfig& cfg, ScenarioName name) {
  cfg.validate();
  const Grid& grid = cfg.grid;
  StateVector truth0 = scenario_initial_state(cfg, name);
  Trajectory truth = integrate(truth0, grid, cfg.model);

  const BackgroundCovariance b_cov = BackgroundCovariance::build(grid, truth0, cfg.covariance);
  StateVector background = generate_background(truth0, b_cov, cfg.seed_background);

  ObservationPlan plan;
  plan.time = cfg.resolved_obs_time();
  plan.noise_fraction = cfg.noise_fraction;
  plan.initial_trust = cfg.initial_trust;
  plan.idw = cfg.idw;
  ObsOperatorKind kind = ObsOperatorKind::full_grid;
  if (is_location_scenario(name)) {
    kind = ObsOperatorKind::idw;
    const int layout = name == ScenarioName::obs_locations_1   ? 1
                       : name == ScenarioName::obs_locations_2 ? 2
                                                               : 3;
    plan.sensors = sensor_layout(grid, layout, cfg.sensors);
  }
  plan.kind = kind;

  ObservationSet clean = clean_observations(truth, plan);
  std::vector<bool> noisy(clean.size(), false);
  if (name == ScenarioName::obs_weights) {
    const auto lo_i = static_cast<int>(std::lround(cfg.rect_i0 * grid.q));
    const auto hi_i = static_cast<int>(std::lround(cfg.rect_i1 * grid.q));
    const auto lo_j = static_cast<int>(std::lround(cfg.rect_j0 * grid.q));
    const auto hi_j = static_cast<int>(std::lround(cfg.rect_j1 * grid.q));
    plan.noise_scale = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(clean.size()));
    for (std::size_t i = 0; i < clean.size(); ++i) {
      const auto& e = clean[i];
      if (e.ix >= lo_i && e.ix < hi_i && e.iy >= lo_j && e.iy < hi_j) {
        noisy[i] = true;
        plan.noise_scale[static_cast<Eigen::Index>(i)] = cfg.noise_inflation;
      }
    }
  }
  // values and weights start from R = I; locations from the noise statistics
  if (cfg.initial_trust == 0.0 && !is_location_scenario(name)) plan.initial_trust = 1.0;

  ObservationSet obs = generate_observations(truth, plan, cfg.seed_obs_noise);
  if (name == ScenarioName::obs_values) obs = transpose_observations(obs);

  SolverSettings inner;
  inner.max_iterations = cfg.inner_iterations;
  inner.memory = cfg.memory;
  SolverSettings outer;
  outer.max_iterations = cfg.resolved_outer_iterations(name);
  outer.memory = cfg.memory;

  AssimilationProblem problem(grid, cfg.model, std::move(background), b_cov, std::move(obs), kind,
                              cfg.idw, inner);
  VerificationSpec verification{truth.states.at(cfg.resolved_t_v()), cfg.resolved_t_v(), {}};

  ParameterKind pk = ParameterKind::obs_values;
  if (name == ScenarioName::obs_weights) pk = ParameterKind::obs_weights;
  if (is_location_scenario(name)) pk = ParameterKind::obs_locations;

  MetaProblem meta{std::move(problem), std::move(verification), pk, outer, cfg.cg,
                   cfg.location_mode};
  meta.validate();
  return Scenario{name, std::move(truth0), std::move(truth), std::move(clean), std::move(meta),
                  std::move(noisy)};
}

}  // namespace varmeta
