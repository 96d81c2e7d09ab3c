#include "varmeta/harness/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "varmeta/assimilation/fourdvar.hpp"
#include "varmeta/model/state_io.hpp"

namespace varmeta {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

}  // namespace

RunReport run_scenario(const ExperimentConfig& cfg, ScenarioName name,
                       const OuterCallback& on_iteration) {
  const auto t0 = std::chrono::steady_clock::now();
  Scenario s = make_scenario(cfg, name);
  RunReport r;
  r.scenario = name;
  r.truth0 = s.truth0;
  r.background = s.meta.inner.background();
  r.noisy_region = s.noisy_region;
  r.obs_before = s.meta.inner.obs();
  for (const auto& x : s.truth.states)
    r.cfl = std::max(r.cfl, cfl_number(x, cfg.grid, cfg.model));

  const AnalysisResult baseline = solve_4dvar(s.meta.inner);
  r.analysis_before = baseline.analysis;
  r.inner_residual_before = baseline.optimality_residual();
  r.err_before = difference(baseline.analysis, s.truth0).norm();

  MetaResult m = metaoptimize(s.meta, on_iteration);
  r.status = m.status;
  r.history = std::move(m.history);
  r.psi_initial = m.psi_initial;
  r.psi_final = m.psi_final;
  r.parameters_before = pack_parameters(s.meta);
  r.parameters_after = m.parameters;
  r.warnings = std::move(m.warnings);
  r.obs_after = install_parameters(s.meta, m.parameters).obs();
  if (m.final_analysis.analysis.size() > 0) {
    r.analysis_after = m.final_analysis.analysis;
    r.inner_residual_after = m.final_analysis.optimality_residual();
  } else {
    r.analysis_after = r.analysis_before;
    r.inner_residual_after = r.inner_residual_before;
  }
  r.err_after = difference(r.analysis_after, s.truth0).norm();
  r.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

int worker_threads() {
  const char* env = std::getenv("VARMETA_THREADS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1) return 1;
  return static_cast<int>(n);
}

std::vector<RunReport> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto& names = cfg.scenarios;
  std::vector<RunReport> reports(names.size());
  std::vector<std::exception_ptr> errors(names.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < names.size(); i = next++) {
      try {
        reports[i] = run_scenario(cfg, names[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n = std::min<int>(worker_threads(), static_cast<int>(names.size()));
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return reports;
}

std::string summary_header() {
  return "scenario,err_before,err_after,psi_initial,psi_final,outer_iters,status";
}

std::string summary_row(const RunReport& r) {
  return std::string(to_string(r.scenario)) + ',' + fmt(r.err_before) + ',' + fmt(r.err_after) +
         ',' + fmt(r.psi_initial) + ',' + fmt(r.psi_final) + ',' +
         std::to_string(r.outer_iters()) + ',' + std::string(to_string(r.status));
}

void write_report(const RunReport& r, const ExperimentConfig& cfg,
                  const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    auto out = open_out(dir / "summary.csv");
    out << summary_header() << '\n' << summary_row(r) << '\n';
  }
  {
    auto out = open_out(dir / "history.csv");
    out << "outer_iter,psi,inner_grad_residual,cg_iters,cg_residual,step_norm\n";
    for (const auto& h : r.history)
      out << h.outer_iter << ',' << fmt(h.psi) << ',' << fmt(h.inner_grad_residual) << ','
          << h.cg_iters << ',' << fmt(h.cg_residual) << ',' << fmt(h.step_norm) << '\n';
  }
  {
    auto out = open_out(dir / "parameters.csv");
    out << "index,before,after\n";
    for (Eigen::Index i = 0; i < r.parameters_before.size(); ++i)
      out << i << ',' << fmt(r.parameters_before[i]) << ',' << fmt(r.parameters_after[i]) << '\n';
  }
  write_state_csv(dir / "truth_x0.csv", r.truth0);
  write_state_csv(dir / "background_x0.csv", r.background);
  write_state_csv(dir / "analysis_before_x0.csv", r.analysis_before);
  write_state_csv(dir / "analysis_after_x0.csv", r.analysis_after);
  write_observations_csv(dir / "observations_before.csv", r.obs_before);
  write_observations_csv(dir / "observations_after.csv", r.obs_after);
  {
    auto out = open_out(dir / "metadata.txt");
    out << "scheme = " << kSchemeName << '\n'
        << "scenario = " << to_string(r.scenario) << '\n'
        << "max_cfl = " << fmt(r.cfl) << '\n'
        << "inner_residual_before = " << fmt(r.inner_residual_before) << '\n'
        << "inner_residual_after = " << fmt(r.inner_residual_after) << '\n'
        << "seconds = " << fmt(r.seconds) << '\n';
    for (const auto& w : r.warnings) out << "warning = " << w << '\n';
    out << "\n# configuration\n" << format_config(cfg);
  }
}

namespace {

void write_h_matrix(const StateVector& x, const std::filesystem::path& path) {
  auto out = open_out(path);
  for (int i = 0; i < x.q(); ++i) {
    for (int j = 0; j < x.q(); ++j) out << (j ? "," : "") << fmt(x(Component::h, i, j));
    out << '\n';
  }
}

std::vector<std::vector<std::string>> read_csv_rows(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) f.push_back(item);
    rows.push_back(std::move(f));
  }
  return rows;
}

}  // namespace

void write_plot_data(const std::filesystem::path& report_dir, const std::filesystem::path& out) {
  std::filesystem::create_directories(out);
  for (const char* name : {"truth_x0", "background_x0", "analysis_before_x0", "analysis_after_x0"}) {
    const auto src = report_dir / (std::string(name) + ".csv");
    write_h_matrix(read_state_csv(src), out / ("h_" + std::string(name) + ".csv"));
  }
  {
    auto o = open_out(out / "convergence.csv");
    o << "outer_iter,psi,psi_relative\n";
    const auto rows = read_csv_rows(report_dir / "history.csv");
    const double psi0 = rows.empty() ? 1.0 : std::stod(rows.front().at(1));
    for (const auto& row : rows) {
      const double psi = std::stod(row.at(1));
      o << row.at(0) << ',' << fmt(psi) << ',' << fmt(psi0 != 0.0 ? psi / psi0 : 0.0) << '\n';
    }
  }
  const ObservationSet before = read_observations_csv(report_dir / "observations_before.csv");
  const ObservationSet after = read_observations_csv(report_dir / "observations_after.csv");
  if (before.size() != after.size())
    throw std::runtime_error("observation files of the report do not match");
  Grid grid{read_state_csv(report_dir / "truth_x0.csv").q()};
  if (std::ifstream meta(report_dir / "metadata.txt"); meta) {
    std::string line;
    while (std::getline(meta, line)) {
      if (line.rfind("lower = ", 0) == 0) grid.lower = std::stod(line.substr(8));
      if (line.rfind("upper = ", 0) == 0) grid.upper = std::stod(line.substr(8));
    }
  }
  auto o = open_out(out / "observation_map.csv");
  o << "entry,k,variable,x_before,y_before,x_after,y_after,value_before,value_after,"
       "variance_before,variance_after\n";
  const auto pos = [&](const ObservationEntry& e) {
    return e.kind == LocationKind::grid ? Location{grid.x(e.ix), grid.y(e.iy)} : e.location;
  };
  for (std::size_t i = 0; i < before.size(); ++i) {
    const auto& a = before[i];
    const auto& b = after[i];
    const Location pa = pos(a);
    const Location pb = pos(b);
    o << i << ',' << a.k << ',' << to_string(a.variable) << ',' << fmt(pa.x) << ',' << fmt(pa.y)
      << ',' << fmt(pb.x) << ',' << fmt(pb.y) << ',' << fmt(a.value) << ',' << fmt(b.value) << ','
      << fmt(1.0 / a.inv_variance) << ',' << fmt(1.0 / b.inv_variance) << '\n';
  }
}

}  // namespace varmeta
