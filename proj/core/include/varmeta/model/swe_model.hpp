#pragma once

#include <string_view>
#include <vector>

#include "varmeta/model/fields.hpp"
#include "varmeta/model/grid.hpp"

namespace varmeta {

struct ModelParams {
  /// Gravitational acceleration, space/time^2.
  double g = 5000.0;

  void validate() const;
};

/// Name of the time-stepping scheme, recorded in run metadata.
inline constexpr std::string_view kSchemeName = "richtmyer-two-step-lax-wendroff";

/// Checkpointed forward trajectory: states[k] = M_{0->k}(states[0]).
struct Trajectory {
  Grid grid;
  ModelParams params;
  std::vector<StateVector> states;

  int steps() const { return static_cast<int>(states.size()) - 1; }
  const StateVector& initial() const { return states.front(); }
  const StateVector& final() const { return states.back(); }
};

/// One step of the two-step Richtmyer Lax-Wendroff scheme for the 2D
/// shallow-water equations in conservation form, periodic in both axes.
/// Throws NonFiniteError if the result contains NaN/Inf.
StateVector step(const StateVector& state, const Grid& grid, const ModelParams& params);

/// Integrates grid.n_steps steps from x0 and keeps every state.
Trajectory integrate(const StateVector& x0, const Grid& grid, const ModelParams& params);

/// Integrates an explicit number of steps (0 is allowed and returns [x0]).
Trajectory integrate(const StateVector& x0, const Grid& grid, const ModelParams& params,
                     int n_steps);

/// Radially symmetric bell centred at the domain midpoint:
/// h = base + (peak - base) * exp(-r^2 / (2 s^2)) with s = width_gridpoints * dx / 2,
/// i.e. the bell spans width_gridpoints nodes at one standard deviation either side.
/// Velocities are zero.
StateVector gaussian_bell_initial(const Grid& grid, double width_gridpoints, double peak,
                                  double base = 1.0);

/// Axis-aligned elliptic variant with separate widths along x and y.
StateVector elliptic_bell_initial(const Grid& grid, double width_x_gridpoints,
                                  double width_y_gridpoints, double peak, double base = 1.0);

/// max over cells of (|velocity| + sqrt(g h)) * dt / dx.
double cfl_number(const StateVector& state, const Grid& grid, const ModelParams& params);

double total_mass(const StateVector& state);

/// Fraction of cells with h <= 0.
double nonpositive_depth_fraction(const StateVector& state);

}  // namespace varmeta
