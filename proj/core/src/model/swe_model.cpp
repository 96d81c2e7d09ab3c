#include "varmeta/model/swe_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rlw_kernels.hpp"
#include "varmeta/errors.hpp"

namespace varmeta {

using detail::Cell;

void ModelParams::validate() const {
  if (!(g > 0.0) || !std::isfinite(g)) throw std::invalid_argument("model: g must be > 0");
}

StateVector step(const StateVector& state, const Grid& grid, const ModelParams& params) {
  const int q = grid.q;
  const double g = params.g;
  const double cx = grid.dt / grid.dx();
  const double cy = grid.dt / grid.dy();

  const detail::StepLinearization lin = detail::linearize_step(state, grid, g);
  const std::size_t nc = lin.u.size();
  std::vector<Cell> fe(nc), ge(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    fe[c] = detail::flux_x(lin.edge_x[c], g);
    ge[c] = detail::flux_y(lin.edge_y[c], g);
  }

  std::vector<Cell> out(nc);
  for (int i = 0; i < q; ++i) {
    const int im = (i == 0) ? q - 1 : i - 1;
    for (int j = 0; j < q; ++j) {
      const int jm = (j == 0) ? q - 1 : j - 1;
      const int c = i * q + j;
      out[c] = lin.u[c] - cx * (fe[c] - fe[im * q + j]) - cy * (ge[c] - ge[i * q + jm]);
    }
  }

  StateVector next = detail::pack<StateTag>(q, out);
  if (!next.all_finite()) throw NonFiniteError("swe step produced a non-finite state");
  return next;
}

Trajectory integrate(const StateVector& x0, const Grid& grid, const ModelParams& params) {
  return integrate(x0, grid, params, grid.n_steps);
}

Trajectory integrate(const StateVector& x0, const Grid& grid, const ModelParams& params,
                     int n_steps) {
  if (n_steps < 0) throw std::invalid_argument("integrate: negative step count");
  if (x0.q() != grid.q) throw std::invalid_argument("integrate: state does not match grid");
  Trajectory traj{grid, params, {}};
  traj.states.reserve(static_cast<std::size_t>(n_steps) + 1);
  traj.states.push_back(x0);
  for (int k = 0; k < n_steps; ++k) {
    try {
      traj.states.push_back(step(traj.states.back(), grid, params));
    } catch (const NonFiniteError&) {
      throw NonFiniteError("forward integration blew up", k);
    }
  }
  return traj;
}

StateVector elliptic_bell_initial(const Grid& grid, double width_x_gridpoints,
                                  double width_y_gridpoints, double peak, double base) {
  if (!(width_x_gridpoints > 0.0 && width_x_gridpoints < grid.q) ||
      !(width_y_gridpoints > 0.0 && width_y_gridpoints < grid.q))
    throw std::invalid_argument("bell: width must lie in (0, q)");
  const double sx = 0.5 * width_x_gridpoints * grid.dx();
  const double sy = 0.5 * width_y_gridpoints * grid.dy();
  const double xc = 0.5 * (grid.lower + grid.upper);
  const double yc = xc;
  StateVector s(grid.q);
  for (int i = 0; i < grid.q; ++i) {
    const double rx = grid.x(i) - xc;
    for (int j = 0; j < grid.q; ++j) {
      const double ry = grid.y(j) - yc;
      const double e = rx * rx / (2.0 * sx * sx) + ry * ry / (2.0 * sy * sy);
      s(Component::h, i, j) = base + (peak - base) * std::exp(-e);
    }
  }
  return s;
}

StateVector gaussian_bell_initial(const Grid& grid, double width_gridpoints, double peak,
                                  double base) {
  return elliptic_bell_initial(grid, width_gridpoints, width_gridpoints, peak, base);
}

double cfl_number(const StateVector& state, const Grid& grid, const ModelParams& params) {
  const auto h = state.h();
  const auto m = state.hu();
  const auto n = state.hv();
  double worst = 0.0;
  for (Eigen::Index c = 0; c < h.size(); ++c) {
    if (!(h[c] > 0.0)) return std::numeric_limits<double>::infinity();
    const double speed = std::hypot(m[c], n[c]) / h[c] + std::sqrt(params.g * h[c]);
    worst = std::max(worst, speed);
  }
  return worst * grid.dt / grid.dx();
}

double total_mass(const StateVector& state) { return state.h().sum(); }

double nonpositive_depth_fraction(const StateVector& state) {
  const auto h = state.h();
  const auto bad = (h.array() <= 0.0).count();
  return static_cast<double>(bad) / static_cast<double>(h.size());
}

}  // namespace varmeta
