#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

#include "varmeta/assimilation/covariance.hpp"
#include "varmeta/assimilation/idw.hpp"
#include "varmeta/assimilation/observations.hpp"
#include "varmeta/assimilation/problem.hpp"
#include "varmeta/model/swe_model.hpp"

namespace varmeta {

/// x^b = x^ref + B0^{1/2} xi, xi standard normal from the seeded stream.
StateVector generate_background(const StateVector& reference_x0, const BackgroundCovariance& b_cov,
                                std::uint64_t seed);

struct ObservationPlan {
  ObsOperatorKind kind = ObsOperatorKind::full_grid;
  int time = 0;
  /// Noise std per variable as a fraction of max |clean value|.
  double noise_fraction = 0.01;
  /// Inverse variance given to every entry; 0 means 1/sigma^2.
  double initial_trust = 0.0;
  /// Sensor positions (h only) for the IDW operator.
  std::vector<Location> sensors;
  IdwOptions idw;
  /// Optional per-entry noise multiplier in canonical order.
  Eigen::VectorXd noise_scale;
};

/// Clean model equivalents of the plan's entries (value = H(x_ref)).
ObservationSet clean_observations(const Trajectory& reference, const ObservationPlan& plan);

/// Clean observations plus Gaussian noise drawn from the seeded stream.
ObservationSet generate_observations(const Trajectory& reference, const ObservationPlan& plan,
                                     std::uint64_t seed);

/// Base noise std per entry (before noise_scale), canonical order.
Eigen::VectorXd observation_noise_std(const ObservationSet& clean, double noise_fraction);

/// Equidistant sensor lattice: nx x ny points with spacing width/n per axis,
/// shifted by (ox, oy) cells; the first `count` points in row-major order.
std::vector<Location> sensor_lattice(const Grid& grid, int nx, int ny, double ox, double oy,
                                     int count);

/// The three reference layouts (1, 2, 3) with `count` sensors.
std::vector<Location> sensor_layout(const Grid& grid, int layout, int count);

}  // namespace varmeta
