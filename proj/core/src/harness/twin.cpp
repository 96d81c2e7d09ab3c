#include "varmeta/harness/twin.hpp"

#include <cmath>
#include <stdexcept>

#include "varmeta/harness/rng.hpp"

namespace varmeta {

StateVector generate_background(const StateVector& reference_x0, const BackgroundCovariance& b_cov,
                                std::uint64_t seed) {
  Rng rng(seed);
  const Eigen::VectorXd xi = rng.normal_vector(reference_x0.size());
  return displaced(reference_x0, b_cov.apply_sqrt(xi));
}

ObservationSet clean_observations(const Trajectory& reference, const ObservationPlan& plan) {
  const Grid& grid = reference.grid;
  if (plan.time < 0 || plan.time > reference.steps())
    throw std::invalid_argument("observation time outside the reference trajectory");
  const StateVector& x = reference.states[plan.time];
  std::vector<ObservationEntry> entries;
  if (plan.kind == ObsOperatorKind::full_grid) {
    for (ObsVariable v : {ObsVariable::h, ObsVariable::u, ObsVariable::v})
      for (int i = 0; i < grid.q; ++i)
        for (int j = 0; j < grid.q; ++j) {
          ObservationEntry e;
          e.k = plan.time;
          e.variable = v;
          e.kind = LocationKind::grid;
          e.ix = i;
          e.iy = j;
          e.value = x(component_of(v), i, j);
          entries.push_back(e);
        }
  } else {
    const auto h = x.h();
    const std::vector<double> field(h.begin(), h.end());
    const auto values = idw_interpolate(plan.sensors, field, grid, plan.idw);
    for (std::size_t s = 0; s < plan.sensors.size(); ++s) {
      ObservationEntry e;
      e.k = plan.time;
      e.variable = ObsVariable::h;
      e.kind = LocationKind::cart;
      e.location = plan.sensors[s];
      e.value = values[s];
      entries.push_back(e);
    }
  }
  return ObservationSet(std::move(entries));
}

Eigen::VectorXd observation_noise_std(const ObservationSet& clean, double noise_fraction) {
  double max_abs[3] = {0.0, 0.0, 0.0};
  for (const auto& e : clean.entries()) {
    double& m = max_abs[static_cast<int>(e.variable)];
    m = std::max(m, std::abs(e.value));
  }
  Eigen::VectorXd sd(static_cast<Eigen::Index>(clean.size()));
  for (std::size_t i = 0; i < clean.size(); ++i)
    sd[i] = noise_fraction * max_abs[static_cast<int>(clean[i].variable)];
  return sd;
}

ObservationSet generate_observations(const Trajectory& reference, const ObservationPlan& plan,
                                     std::uint64_t seed) {
  const ObservationSet clean = clean_observations(reference, plan);
  const Eigen::VectorXd base = observation_noise_std(clean, plan.noise_fraction);
  Eigen::VectorXd sd = base;
  if (plan.noise_scale.size() != 0) {
    if (plan.noise_scale.size() != sd.size())
      throw std::invalid_argument("noise_scale has the wrong length");
    sd = sd.cwiseProduct(plan.noise_scale);
  }
  Rng rng(seed);
  const Eigen::VectorXd values = clean.values() + sd.cwiseProduct(rng.normal_vector(sd.size()));
  Eigen::VectorXd trust(sd.size());
  for (Eigen::Index i = 0; i < sd.size(); ++i) {
    if (plan.initial_trust > 0.0)
      trust[i] = plan.initial_trust;
    else
      trust[i] = base[i] > 0.0 ? 1.0 / (base[i] * base[i]) : 1.0;
  }
  return clean.with_values(values).with_inv_variances(trust);
}

std::vector<Location> sensor_lattice(const Grid& grid, int nx, int ny, double ox, double oy,
                                     int count) {
  if (nx <= 0 || ny <= 0 || count > nx * ny)
    throw std::invalid_argument("sensor lattice too small for the requested count");
  std::vector<Location> out;
  out.reserve(static_cast<std::size_t>(count));
  const double w = grid.width();
  for (int a = 0; a < nx && static_cast<int>(out.size()) < count; ++a)
    for (int b = 0; b < ny && static_cast<int>(out.size()) < count; ++b)
      out.push_back({grid.lower + a * w / nx + ox * grid.dx(),
                     grid.lower + b * w / ny + oy * grid.dy()});
  return out;
}

std::vector<Location> sensor_layout(const Grid& grid, int layout, int count) {
  switch (layout) {
    case 1:
      return sensor_lattice(grid, 20, 15, 0.5, 0.5, count);
    case 2:
      return sensor_lattice(grid, 15, 20, 0.5, 0.25, count);
    case 3:
      return sensor_lattice(grid, 17, 18, 0.25, 0.75, count);
    default:
      throw std::invalid_argument("sensor layout must be 1, 2 or 3");
  }
}

}  // namespace varmeta
