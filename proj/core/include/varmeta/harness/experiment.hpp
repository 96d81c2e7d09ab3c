#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <string>
#include <vector>

#include "varmeta/harness/config.hpp"
#include "varmeta/harness/scenario.hpp"
#include "varmeta/metaopt/metaoptimize.hpp"

namespace varmeta {

struct RunReport {
  ScenarioName scenario = ScenarioName::obs_values;
  /// ||x^a_0 - x^ref_0|| before and after meta-optimization.
  double err_before = 0.0;
  double err_after = 0.0;
  double psi_initial = 0.0;
  double psi_final = 0.0;
  MetaStatus status = MetaStatus::completed;
  std::vector<OuterRecord> history;
  Eigen::VectorXd parameters_before;
  Eigen::VectorXd parameters_after;
  StateVector truth0;
  StateVector background;
  StateVector analysis_before;
  StateVector analysis_after;
  ObservationSet obs_before;
  ObservationSet obs_after;
  std::vector<bool> noisy_region;
  double inner_residual_before = 0.0;
  double inner_residual_after = 0.0;
  double cfl = 0.0;
  double seconds = 0.0;
  std::vector<std::string> warnings;

  int outer_iters() const { return history.empty() ? 0 : static_cast<int>(history.size()) - 1; }
};

RunReport run_scenario(const ExperimentConfig& cfg, ScenarioName name,
                       const OuterCallback& on_iteration = {});

/// Runs every configured scenario, up to VARMETA_THREADS at a time.
std::vector<RunReport> run_experiment(const ExperimentConfig& cfg);

/// Worker cap from VARMETA_THREADS (default 1).
int worker_threads();

/// Writes the report artifacts into `dir` (created if needed):
/// summary.csv, history.csv, parameters.csv, state dumps, observation CSVs
/// and metadata.txt. Everything except metadata.txt is deterministic.
void write_report(const RunReport& report, const ExperimentConfig& cfg,
                  const std::filesystem::path& dir);

/// summary.csv header and row.
std::string summary_header();
std::string summary_row(const RunReport& report);

/// Reads a report directory and writes plot-ready CSVs into `out`:
/// h fields as q x q matrices, the convergence curve, and a parameter map.
void write_plot_data(const std::filesystem::path& report_dir, const std::filesystem::path& out);

}  // namespace varmeta
