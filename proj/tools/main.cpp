#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "varmeta/errors.hpp"
#include "varmeta/harness/checks.hpp"
#include "varmeta/harness/config.hpp"
#include "varmeta/harness/experiment.hpp"

namespace fs = std::filesystem;

namespace {

int cmd_run(const fs::path& config_path, const fs::path& out_dir) {
  const varmeta::ExperimentConfig cfg = varmeta::load_config(config_path);
  std::cerr << "running " << cfg.scenarios.size() << " scenario(s), q=" << cfg.grid.q
            << " N=" << cfg.grid.n_steps << "\n";
  const auto reports = varmeta::run_experiment(cfg);
  fs::create_directories(out_dir);
  std::ofstream summary(out_dir / "summary.csv");
  summary << varmeta::summary_header() << '\n';
  for (const auto& r : reports) {
    const fs::path dir = out_dir / std::string(varmeta::to_string(r.scenario));
    varmeta::write_report(r, cfg, dir);
    summary << varmeta::summary_row(r) << '\n';
    std::printf("%-16s err %.4f -> %.4f  psi %.4g -> %.4g  %d outer  %s\n",
                std::string(varmeta::to_string(r.scenario)).c_str(), r.err_before, r.err_after,
                r.psi_initial, r.psi_final, r.outer_iters(),
                std::string(varmeta::to_string(r.status)).c_str());
    for (const auto& w : r.warnings) std::fprintf(stderr, "  warning: %s\n", w.c_str());
  }
  return 0;
}

int cmd_verify() {
  bool ok = true;
  for (const auto& c : varmeta::run_verification_suite()) {
    std::cout << varmeta::format_check(c) << std::endl;
    ok = ok && c.passed;
  }
  return ok ? 0 : 1;
}

int cmd_plotdata(const fs::path& report, const fs::path& out) {
  const fs::path target = out.empty() ? report / "plot" : out;
  varmeta::write_plot_data(report, target);
  std::cout << "plot data written to " << target.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"4D-Var meta-optimization on a shallow-water test model", "varmeta"};
  app.require_subcommand(1);

  fs::path config_path;
  fs::path out_dir;
  auto* run = app.add_subcommand("run", "Run the configured experiment(s)");
  run->add_option("--config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Report directory")->required();

  auto* verify = app.add_subcommand("verify", "Run the correctness property suite");

  fs::path report_dir;
  fs::path plot_out;
  auto* plot = app.add_subcommand("plotdata", "Write plot-ready CSVs from a report");
  plot->add_option("--report", report_dir, "Report directory of one scenario")
      ->required()
      ->check(CLI::ExistingDirectory);
  plot->add_option("--out", plot_out, "Output directory (default <report>/plot)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*run) return cmd_run(config_path, out_dir);
    if (*verify) return cmd_verify();
    if (*plot) return cmd_plotdata(report_dir, plot_out);
  } catch (const varmeta::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
