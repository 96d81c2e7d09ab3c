#pragma once

#include <vector>

#include "varmeta/harness/config.hpp"
#include "varmeta/harness/twin.hpp"
#include "varmeta/metaopt/gradients.hpp"

namespace varmeta {

/// A fully built twin experiment.
struct Scenario {
  ScenarioName name;
  StateVector truth0;
  Trajectory truth;
  /// Noise-free model equivalents of the observation entries.
  ObservationSet clean_obs;
  MetaProblem meta;
  /// Per observation entry: inside the inflated-noise rectangle.
  std::vector<bool> noisy_region;
};

StateVector scenario_initial_state(const ExperimentConfig& cfg, ScenarioName name);

/// The "perpendicular axis" fault: every grid entry takes the value observed
/// at the transposed node, with hu and hv exchanged so the result is the
/// mirror image of a valid flow. Applying it twice is the identity.
ObservationSet transpose_observations(const ObservationSet& obs);

Scenario make_scenario(const ExperimentConfig& cfg, ScenarioName name);

}  // namespace varmeta
