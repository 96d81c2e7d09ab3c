#include "varmeta/adjoint/tangent_adjoint.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "../model/rlw_kernels.hpp"
#include "varmeta/errors.hpp"

namespace varmeta {

using detail::Cell;

Perturbation tlm_step(const StateVector& base, const Perturbation& delta, const Grid& grid,
                      const ModelParams& params) {
  const int q = grid.q;
  const double g = params.g;
  const double cx = grid.dt / grid.dx();
  const double cy = grid.dt / grid.dy();
  const double hx = 0.5 * cx;
  const double hy = 0.5 * cy;

  const detail::StepLinearization lin = detail::linearize_step(base, grid, g);
  const std::vector<Cell> d = detail::unpack(delta);
  const std::size_t nc = d.size();

  std::vector<Cell> ad(nc), bd(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    ad[c] = detail::jac_x(lin.u[c], d[c], g);
    bd[c] = detail::jac_y(lin.u[c], d[c], g);
  }

  // Linearized edge fluxes A(e) de, B(e) de.
  std::vector<Cell> fe(nc), ge(nc);
  for (int i = 0; i < q; ++i) {
    const int ip = (i + 1 == q) ? 0 : i + 1;
    for (int j = 0; j < q; ++j) {
      const int jp = (j + 1 == q) ? 0 : j + 1;
      const int c = i * q + j;
      const int cxn = ip * q + j;
      const int cyn = i * q + jp;
      const Cell dex = 0.5 * (d[c] + d[cxn]) - hx * (ad[cxn] - ad[c]);
      const Cell dey = 0.5 * (d[c] + d[cyn]) - hy * (bd[cyn] - bd[c]);
      fe[c] = detail::jac_x(lin.edge_x[c], dex, g);
      ge[c] = detail::jac_y(lin.edge_y[c], dey, g);
    }
  }

  std::vector<Cell> out(nc);
  for (int i = 0; i < q; ++i) {
    const int im = (i == 0) ? q - 1 : i - 1;
    for (int j = 0; j < q; ++j) {
      const int jm = (j == 0) ? q - 1 : j - 1;
      const int c = i * q + j;
      out[c] = d[c] - cx * (fe[c] - fe[im * q + j]) - cy * (ge[c] - ge[i * q + jm]);
    }
  }
  Perturbation result = detail::pack<PerturbationTag>(q, out);
  if (!result.all_finite()) throw NonFiniteError("tangent-linear step produced non-finite values");
  return result;
}

AdjointVariable adj_step(const StateVector& base, const AdjointVariable& lambda, const Grid& grid,
                         const ModelParams& params) {
  const int q = grid.q;
  const double g = params.g;
  const double cx = grid.dt / grid.dx();
  const double cy = grid.dt / grid.dy();
  const double hx = 0.5 * cx;
  const double hy = 0.5 * cy;

  const detail::StepLinearization lin = detail::linearize_step(base, grid, g);
  const std::vector<Cell> lo = detail::unpack(lambda);
  const std::size_t nc = lo.size();

  // Identity part of the update.
  std::vector<Cell> res = lo;

  // Edge flux (i+1/2, j) enters out(i,j) with -cx and out(i+1,j) with +cx.
  // mu_x, mu_y are the adjoints of the half-step edge states.
  std::vector<Cell> mux(nc), muy(nc);
  for (int i = 0; i < q; ++i) {
    const int ip = (i + 1 == q) ? 0 : i + 1;
    for (int j = 0; j < q; ++j) {
      const int jp = (j + 1 == q) ? 0 : j + 1;
      const int c = i * q + j;
      const Cell phix = cx * (lo[ip * q + j] - lo[c]);
      const Cell phiy = cy * (lo[i * q + jp] - lo[c]);
      mux[c] = detail::jac_x_t(lin.edge_x[c], phix, g);
      muy[c] = detail::jac_y_t(lin.edge_y[c], phiy, g);
    }
  }

  // Half step: e(i) = (u_i + u_{i+1})/2 - hx (F(u_{i+1}) - F(u_i)).
  for (int i = 0; i < q; ++i) {
    const int im = (i == 0) ? q - 1 : i - 1;
    for (int j = 0; j < q; ++j) {
      const int jm = (j == 0) ? q - 1 : j - 1;
      const int c = i * q + j;
      const int cxm = im * q + j;
      const int cym = i * q + jm;
      // This cell is the left node of edge c and the right node of edge cxm / cym.
      const Cell sx = mux[c] + mux[cxm];
      const Cell sy = muy[c] + muy[cym];
      const Cell tx = mux[c] - mux[cxm];
      const Cell ty = muy[c] - muy[cym];
      res[c] = res[c] + 0.5 * (sx + sy) + hx * detail::jac_x_t(lin.u[c], tx, g) +
               hy * detail::jac_y_t(lin.u[c], ty, g);
    }
  }

  AdjointVariable result = detail::pack<AdjointTag>(q, res);
  if (!result.all_finite()) throw NonFiniteError("adjoint step produced non-finite values");
  return result;
}

namespace {

void check_index(const Trajectory& traj, int k, const char* who) {
  if (k < 0 || k > traj.steps())
    throw std::out_of_range(std::string(who) + ": time index " + std::to_string(k) +
                            " outside [0, " + std::to_string(traj.steps()) + "]");
}

}  // namespace

Perturbation tlm_propagate(const Trajectory& traj, const Perturbation& delta0, int k) {
  check_index(traj, k, "tlm_propagate");
  Perturbation d = delta0;
  for (int s = 0; s < k; ++s) {
    try {
      d = tlm_step(traj.states[s], d, traj.grid, traj.params);
    } catch (const NonFiniteError&) {
      throw NonFiniteError("tangent-linear propagation blew up", s);
    }
  }
  return d;
}

AdjointVariable adj_propagate(const Trajectory& traj, const AdjointVariable& lambda_k, int k) {
  check_index(traj, k, "adj_propagate");
  AdjointVariable l = lambda_k;
  for (int s = k - 1; s >= 0; --s) {
    try {
      l = adj_step(traj.states[s], l, traj.grid, traj.params);
    } catch (const NonFiniteError&) {
      throw NonFiniteError("adjoint propagation blew up", s);
    }
  }
  return l;
}

std::vector<Perturbation> tlm_sweep(const Trajectory& traj, const Perturbation& delta0,
                                    std::span<const int> times) {
  std::vector<Perturbation> out;
  out.reserve(times.size());
  if (times.empty()) return out;
  if (!std::is_sorted(times.begin(), times.end()))
    throw std::invalid_argument("tlm_sweep: times must be ascending");
  check_index(traj, times.front(), "tlm_sweep");
  check_index(traj, times.back(), "tlm_sweep");
  Perturbation d = delta0;
  int at = 0;
  for (int k : times) {
    for (; at < k; ++at) d = tlm_step(traj.states[at], d, traj.grid, traj.params);
    out.push_back(d);
  }
  return out;
}

AdjointVariable adjoint_accumulate(const Trajectory& traj,
                                   std::span<const TimedForcing> forcings) {
  AdjointVariable l(traj.grid.q);
  if (forcings.empty()) return l;
  int latest = 0;
  for (const TimedForcing& f : forcings) {
    check_index(traj, f.k, "adjoint_accumulate");
    latest = std::max(latest, f.k);
  }
  auto add_forcing_at = [&](int k) {
    for (const TimedForcing& f : forcings)
      if (f.k == k) l += f.value;
  };
  add_forcing_at(latest);
  for (int s = latest - 1; s >= 0; --s) {
    l = adj_step(traj.states[s], l, traj.grid, traj.params);
    add_forcing_at(s);
  }
  return l;
}

}  // namespace varmeta
