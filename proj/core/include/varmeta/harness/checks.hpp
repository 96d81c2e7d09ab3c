#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "varmeta/harness/config.hpp"
#include "varmeta/metaopt/gradients.hpp"

namespace varmeta {

struct CheckResult {
  std::string name;
  bool passed = false;
  /// Measured quantity and the bound it was compared against.
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

/// <M d, l> = <d, M^T l> over the whole window for `pairs` random pairs;
/// value is the worst relative mismatch.
CheckResult check_adjoint_dot_product(const ExperimentConfig& cfg, int pairs, std::uint64_t seed,
                                      double tolerance = 1e-11);

/// grad_4dvar against central differences of cost_4dvar along random
/// directions, minimum relative error over an epsilon sweep; value is the
/// worst direction.
CheckResult check_inner_gradient(const ExperimentConfig& cfg, ObsOperatorKind kind, int directions,
                                 std::uint64_t seed, double tolerance = 1e-6);

enum class OuterProbe {
  random_direction,
  /// a single parameter, the one with the largest analytic component
  largest_component,
};

/// Analytic outer gradient against differences of Psi with the inner
/// problem re-solved. The oracle is only as good as the inner solve, so
/// use a budget that converges it. `mode` matters for locations only.
CheckResult check_outer_gradient(const ExperimentConfig& cfg, ParameterKind kind,
                                 std::uint64_t seed, double tolerance,
                                 LocationGradientMode mode = LocationGradientMode::approximate,
                                 OuterProbe probe = OuterProbe::random_direction);

/// Norm of (approximate - full) location gradient over the norm of full, at
/// the analysis of the first location scenario.
CheckResult check_location_modes(const ExperimentConfig& cfg, double tolerance);

/// Relative mass drift of the reference run.
CheckResult check_mass_conservation(const ExperimentConfig& cfg, double tolerance = 1e-12);

/// Integration, scenario construction and a short meta run repeated twice
/// must agree bit for bit.
CheckResult check_determinism(const ExperimentConfig& cfg);

/// The suite behind `varmeta verify`.
std::vector<CheckResult> run_verification_suite();

std::string format_check(const CheckResult& c);

}  // namespace varmeta
