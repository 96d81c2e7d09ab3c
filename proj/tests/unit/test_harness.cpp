#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "varmeta/errors.hpp"
#include "varmeta/harness/experiment.hpp"
#include "varmeta/harness/twin.hpp"

using namespace varmeta;
namespace fs = std::filesystem;

namespace {

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("varmeta_test_" + name);
  fs::remove_all(p);
  return p;
}

double sample_std(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

// ---- configuration

TEST(Config, ParsesSectionsAndComments) {
  const ExperimentConfig c = parse(
      "# comment\n"
      "[experiment]\n"
      "scenario = obs_weights, obs_locations_3\n"
      "[grid]\n"
      "q = 24   # trailing comment\n"
      "n_steps = 30\n"
      "[seeds]\n"
      "background = 77\n"
      "[solver]\n"
      "location_gradient = full\n");
  ASSERT_EQ(c.scenarios.size(), 2u);
  EXPECT_EQ(c.scenarios[1], ScenarioName::obs_locations_3);
  EXPECT_EQ(c.grid.q, 24);
  EXPECT_EQ(c.grid.n_steps, 30);
  EXPECT_EQ(c.seed_background, 77u);
  EXPECT_EQ(c.location_mode, LocationGradientMode::full);
}

TEST(Config, UnknownKeyReportsLine) {
  try {
    parse("[grid]\nq = 20\nqq = 3\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("3"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("qq"), std::string::npos) << e.what();
  }
}

TEST(Config, RejectsMalformedInput) {
  EXPECT_THROW(parse("[nosuch]\nq = 1\n"), ConfigError);
  EXPECT_THROW(parse("[grid]\nq = twenty\n"), ConfigError);
  EXPECT_THROW(parse("q = 20\n"), ConfigError);
  EXPECT_THROW(parse("[grid]\nq 20\n"), ConfigError);
  EXPECT_THROW(parse("[experiment]\nscenario = obs_everything\n"), ConfigError);
  EXPECT_THROW(parse("[grid]\nq = 3\n"), ConfigError);
  EXPECT_THROW(parse("[observations]\nnoise_fraction = -0.1\n"), ConfigError);
  EXPECT_THROW(parse("[solver]\nlocation_gradient = sideways\n"), ConfigError);
}

TEST(Config, FormatRoundTrips) {
  ExperimentConfig c = reduced_config();
  c.scenarios = {ScenarioName::obs_locations_2, ScenarioName::obs_values};
  c.covariance.uv_std = 0.0123456789;
  c.idw.full_sum = true;
  c.seed_obs_noise = 123456789012345ull;
  const std::string text = format_config(c);
  EXPECT_EQ(format_config(parse(text)), text);
}

TEST(Config, ScenarioBudgets) {
  const ExperimentConfig c;
  EXPECT_EQ(c.resolved_outer_iterations(ScenarioName::obs_values), 5);
  EXPECT_EQ(c.resolved_outer_iterations(ScenarioName::obs_weights), 5);
  EXPECT_EQ(c.resolved_outer_iterations(ScenarioName::obs_locations_2), 30);
  EXPECT_EQ(c.resolved_t_v(), c.grid.n_steps);
  EXPECT_EQ(c.inner_iterations, 100);
}

// ---- random numbers

TEST(RngTest, PinnedToMersenneTwister) {
  Rng r(5489);
  std::mt19937_64 ref(5489);
  EXPECT_EQ(r.uniform(), static_cast<double>(ref() >> 11) * 0x1.0p-53);
  // first output of mt19937_64 with the default seed, fixed by the standard
  std::mt19937_64 def;
  EXPECT_EQ(def(), 14514284786278117030ull);
}

TEST(RngTest, SameSeedSameStream) {
  Rng a(42), b(42), c(43);
  const Eigen::VectorXd va = a.normal_vector(100);
  EXPECT_EQ(va, b.normal_vector(100));
  EXPECT_NE(va, c.normal_vector(100));
}

TEST(RngTest, NormalMoments) {
  Rng r(7);
  const int n = 200000;
  double m = 0.0, m2 = 0.0, m4 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    m += z;
    m2 += z * z;
    m4 += z * z * z * z;
  }
  m /= n;
  m2 /= n;
  m4 /= n;
  EXPECT_NEAR(m, 0.0, 0.01);
  EXPECT_NEAR(m2, 1.0, 0.015);
  EXPECT_NEAR(m4, 3.0, 0.08);
}

TEST(RngTest, UniformRange) {
  Rng r(8);
  double lo = 1.0, hi = 0.0, sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  EXPECT_GE(lo, 0.0);
  EXPECT_LT(hi, 1.0);
  EXPECT_NEAR(sum / 100000, 0.5, 0.005);
}

// ---- twin experiment generation

TEST(Twin, ZeroVarianceBackgroundIsReference) {
  Grid g;
  g.q = 10;
  CovarianceSettings s;
  s.h_std_fraction = 0.0;
  s.h_std_floor = 0.0;
  s.uv_std = 0.0;
  const StateVector ref = gaussian_bell_initial(g, 3.0, 1.5, 1.0);
  const BackgroundCovariance b = BackgroundCovariance::build(g, ref, s);
  EXPECT_EQ(generate_background(ref, b, 3), ref);
}

TEST(Twin, BackgroundStatisticsAndReproducibility) {
  Grid g;
  g.q = 12;
  const StateVector ref = gaussian_bell_initial(g, 3.0, 1.5, 1.0);
  const BackgroundCovariance b = BackgroundCovariance::build(g, ref, CovarianceSettings{});
  EXPECT_EQ(generate_background(ref, b, 5), generate_background(ref, b, 5));
  const int draws = 100;
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(g.cells());
  for (int d = 0; d < draws; ++d) {
    const Perturbation e = difference(generate_background(ref, b, 1000 + d), ref);
    sq += e.h().cwiseProduct(e.h());
  }
  const Eigen::VectorXd emp = (sq / draws).cwiseSqrt();
  // average over cells keeps the check tight; each cell is also loosely bounded
  const double ratio = (emp.array() / b.h_std().array()).mean();
  EXPECT_NEAR(ratio, 1.0, 0.2);
  EXPECT_TRUE(((emp.array() / b.h_std().array() - 1.0).abs() < 0.5).all());
}

TEST(Twin, ObservationNoise) {
  Grid g;
  g.q = 20;
  const Trajectory t = integrate(gaussian_bell_initial(g, 5.0, 1.5, 1.0), g, ModelParams{}, 10);
  ObservationPlan plan;
  plan.time = 10;
  plan.noise_fraction = 0.0;
  const ObservationSet clean = clean_observations(t, plan);
  EXPECT_EQ(clean.size(), 3u * g.cells());
  EXPECT_EQ(generate_observations(t, plan, 1).values(), clean.values());
  plan.noise_fraction = 0.01;
  const ObservationSet a = generate_observations(t, plan, 2);
  EXPECT_EQ(a.values(), generate_observations(t, plan, 2).values());
  const Eigen::VectorXd sd = observation_noise_std(clean, 0.01);
  for (ObsVariable v : {ObsVariable::h, ObsVariable::u, ObsVariable::v}) {
    std::vector<double> z;
    double target = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i].variable == v) {
        z.push_back(a[i].value - clean[i].value);
        target = sd[static_cast<Eigen::Index>(i)];
      }
    EXPECT_NEAR(sample_std(z) / target, 1.0, 0.2) << to_string(v);
  }
  // default trust is the inverse noise variance
  EXPECT_DOUBLE_EQ(a[0].inv_variance, 1.0 / (sd[0] * sd[0]));
}

TEST(Twin, SensorLayoutsHaveThreeHundredDistinctSites) {
  const Grid g;
  std::vector<std::vector<Location>> all;
  for (int layout : {1, 2, 3}) {
    const auto s = sensor_layout(g, layout, 300);
    ASSERT_EQ(s.size(), 300u);
    for (const auto& l : s) {
      EXPECT_TRUE(l.x >= g.lower && l.x <= g.upper && l.y >= g.lower && l.y <= g.upper);
      const double fx = (l.x - g.lower) / g.dx();
      const double fy = (l.y - g.lower) / g.dy();
      // never exactly on a node
      EXPECT_GT(std::abs(fx - std::round(fx)) + std::abs(fy - std::round(fy)), 1e-6);
    }
    all.push_back(s);
  }
  EXPECT_NE(all[0][1].y, all[1][1].y);
  EXPECT_NE(all[0][1].x, all[2][1].x);
  EXPECT_THROW(sensor_layout(g, 4, 300), std::invalid_argument);
}

// ---- scenarios

TEST(Scenario, ValuesFaultIsTheTransposition) {
  const ExperimentConfig cfg = vt::tiny_config();
  const Scenario s = make_scenario(cfg, ScenarioName::obs_values);
  const ObservationSet& obs = s.meta.inner.obs();
  const ObservationSet un = transpose_observations(obs);
  EXPECT_EQ(transpose_observations(un).values(), obs.values());
  // undoing the fault leaves only noise; the fault itself is far larger
  const Eigen::VectorXd sd = observation_noise_std(s.clean_obs, cfg.noise_fraction);
  EXPECT_LT(((un.values() - s.clean_obs.values()).array() / sd.array()).abs().maxCoeff(), 6.0);
  EXPECT_GT(((obs.values() - s.clean_obs.values()).array() / sd.array()).abs().maxCoeff(), 20.0);
  const Grid& g = s.meta.inner.grid();
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const auto& e = obs[i];
    if (e.variable != ObsVariable::h) continue;
    const std::size_t j = static_cast<std::size_t>(e.iy * g.q + e.ix);
    EXPECT_EQ(obs[i].value, un[j].value);
  }
  EXPECT_DOUBLE_EQ(obs[0].inv_variance, 1.0);
}

TEST(Scenario, WeightsRectangleHasTenfoldNoise) {
  ExperimentConfig cfg;
  cfg.grid.n_steps = 10;
  const Scenario s = make_scenario(cfg, ScenarioName::obs_weights);
  const ObservationSet& obs = s.meta.inner.obs();
  std::vector<double> in, out;
  const Eigen::VectorXd sd = observation_noise_std(s.clean_obs, cfg.noise_fraction);
  int inside = 0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const double z = (obs[i].value - s.clean_obs[i].value) / sd[static_cast<Eigen::Index>(i)];
    (s.noisy_region[i] ? in : out).push_back(z);
    if (s.noisy_region[i] && obs[i].variable == ObsVariable::h) {
      ++inside;
      EXPECT_TRUE(obs[i].ix >= 10 && obs[i].ix < 30 && obs[i].iy >= 15 && obs[i].iy < 25);
    }
    EXPECT_EQ(obs[i].inv_variance, 1.0);
  }
  EXPECT_EQ(inside, 200);
  EXPECT_NEAR(sample_std(in) / sample_std(out), 10.0, 2.0);
}

TEST(Scenario, LocationScenariosUseIdwSensors) {
  ExperimentConfig cfg;
  cfg.grid.n_steps = 5;
  for (ScenarioName n : {ScenarioName::obs_locations_1, ScenarioName::obs_locations_2,
                         ScenarioName::obs_locations_3}) {
    const Scenario s = make_scenario(cfg, n);
    EXPECT_EQ(s.meta.inner.operator_kind(), ObsOperatorKind::idw);
    EXPECT_EQ(s.meta.inner.obs().cart_count(), 300u);
    EXPECT_EQ(s.meta.parameter_kind, ParameterKind::obs_locations);
    EXPECT_EQ(s.meta.outer.max_iterations, 30);
  }
}

// ---- runs and reports

TEST(Experiment, RunsAreDeterministicAndReportsReproducible) {
  ExperimentConfig cfg = vt::tiny_config();
  cfg.inner_iterations = 30;
  const RunReport a = run_scenario(cfg, ScenarioName::obs_weights);
  const RunReport b = run_scenario(cfg, ScenarioName::obs_weights);
  EXPECT_EQ(a.err_before, b.err_before);
  EXPECT_EQ(a.err_after, b.err_after);
  EXPECT_EQ(a.psi_final, b.psi_final);
  EXPECT_EQ(a.parameters_after, b.parameters_after);
  EXPECT_GE(a.err_before, 0.0);
  EXPECT_LE(a.outer_iters(), 2);

  const fs::path d1 = scratch_dir("rep1"), d2 = scratch_dir("rep2");
  write_report(a, cfg, d1);
  write_report(b, cfg, d2);
  for (const char* f : {"summary.csv", "history.csv", "parameters.csv", "truth_x0.csv",
                        "analysis_after_x0.csv", "observations_after.csv"}) {
    ASSERT_TRUE(fs::exists(d1 / f)) << f;
    EXPECT_EQ(slurp(d1 / f), slurp(d2 / f)) << f;
  }
  std::istringstream hist(slurp(d1 / "history.csv"));
  std::string header;
  std::getline(hist, header);
  EXPECT_EQ(header, "outer_iter,psi,inner_grad_residual,cg_iters,cg_residual,step_norm");
  EXPECT_EQ(summary_header(), "scenario,err_before,err_after,psi_initial,psi_final,outer_iters,status");
  EXPECT_EQ(summary_row(a).rfind("obs_weights,", 0), 0u);

  const fs::path plot = scratch_dir("plot");
  write_plot_data(d1, plot);
  EXPECT_TRUE(fs::exists(plot / "convergence.csv"));
  EXPECT_TRUE(fs::exists(plot / "observation_map.csv"));
  fs::remove_all(d1);
  fs::remove_all(d2);
  fs::remove_all(plot);
}

TEST(Experiment, ThreadCapFromEnvironment) {
  ::setenv("VARMETA_THREADS", "3", 1);
  EXPECT_EQ(worker_threads(), 3);
  ::unsetenv("VARMETA_THREADS");
  EXPECT_EQ(worker_threads(), 1);
}

TEST(Experiment, ParallelRunMatchesSerial) {
  ExperimentConfig cfg = vt::tiny_config();
  cfg.inner_iterations = 20;
  cfg.outer_iterations = 1;
  cfg.scenarios = {ScenarioName::obs_values, ScenarioName::obs_locations_1};
  ::setenv("VARMETA_THREADS", "2", 1);
  const auto par = run_experiment(cfg);
  ::unsetenv("VARMETA_THREADS");
  const auto ser = run_experiment(cfg);
  ASSERT_EQ(par.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(par[i].scenario, cfg.scenarios[i]);
    EXPECT_EQ(par[i].psi_final, ser[i].psi_final);
    EXPECT_EQ(par[i].parameters_after, ser[i].parameters_after);
  }
}

TEST(Config, ShippedConfigsLoad) {
  const fs::path dir = fs::path(VARMETA_SOURCE_DIR) / "tools" / "configs";
  const ExperimentConfig full_size = load_config(dir / "full.ini");
  EXPECT_EQ(full_size.scenarios.size(), 5u);
  EXPECT_EQ(format_config(full_size), format_config([] {
              ExperimentConfig c;
              c.scenarios = {ScenarioName::obs_values, ScenarioName::obs_weights,
                             ScenarioName::obs_locations_1, ScenarioName::obs_locations_2,
                             ScenarioName::obs_locations_3};
              return c;
            }()));
  EXPECT_NO_THROW(load_config(dir / "quick.ini"));
}
