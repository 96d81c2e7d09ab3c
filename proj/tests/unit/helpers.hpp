#pragma once

#include <cmath>

#include "varmeta/harness/config.hpp"
#include "varmeta/harness/rng.hpp"
#include "varmeta/harness/scenario.hpp"
#include "varmeta/model/fields.hpp"
#include "varmeta/model/swe_model.hpp"

namespace vt {

// small but non-trivial: the bell still moves within the window
inline varmeta::ExperimentConfig tiny_config(int q = 12, int n_steps = 10) {
  varmeta::ExperimentConfig cfg = varmeta::reduced_config();
  cfg.grid.q = q;
  cfg.grid.n_steps = n_steps;
  cfg.bell_width = 3.0;
  cfg.sensors = 30;
  cfg.inner_iterations = 40;
  cfg.outer_iterations = 2;
  return cfg;
}

inline varmeta::Perturbation random_perturbation(int q, std::uint64_t seed, double scale = 1.0) {
  varmeta::Rng rng(seed);
  return varmeta::Perturbation(q, scale * rng.normal_vector(3 * q * q));
}

inline varmeta::AdjointVariable random_adjoint(int q, std::uint64_t seed) {
  varmeta::Rng rng(seed);
  return varmeta::AdjointVariable(q, rng.normal_vector(3 * q * q));
}

// bell plus small momentum so every flux term is exercised
inline varmeta::StateVector busy_state(const varmeta::Grid& grid, std::uint64_t seed) {
  varmeta::StateVector x = varmeta::gaussian_bell_initial(grid, 3.0, 1.5, 1.0);
  varmeta::Rng rng(seed);
  x.hu() += 0.05 * rng.normal_vector(grid.cells());
  x.hv() += 0.05 * rng.normal_vector(grid.cells());
  x.h() += 0.01 * rng.normal_vector(grid.cells());
  return x;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

}  // namespace vt
