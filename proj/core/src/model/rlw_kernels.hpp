#pragma once

// Pointwise pieces of the Richtmyer scheme shared by the forward, tangent
// and adjoint sweeps. U = (h, m, n) with m = hu, n = hv.

#include <Eigen/Core>

#include <vector>

#include "varmeta/model/fields.hpp"
#include "varmeta/model/grid.hpp"

namespace varmeta::detail {

struct Cell {
  double h = 0.0;
  double m = 0.0;
  double n = 0.0;
};

inline Cell operator+(const Cell& a, const Cell& b) { return {a.h + b.h, a.m + b.m, a.n + b.n}; }
inline Cell operator-(const Cell& a, const Cell& b) { return {a.h - b.h, a.m - b.m, a.n - b.n}; }
inline Cell operator*(double s, const Cell& a) { return {s * a.h, s * a.m, s * a.n}; }

/// F(U) = (m, m^2/h + g h^2/2, m n/h)
inline Cell flux_x(const Cell& u, double g) {
  const double a = u.m / u.h;
  return {u.m, u.m * a + 0.5 * g * u.h * u.h, u.n * a};
}

/// G(U) = (n, m n/h, n^2/h + g h^2/2)
inline Cell flux_y(const Cell& u, double g) {
  const double b = u.n / u.h;
  return {u.n, u.m * b, u.n * b + 0.5 * g * u.h * u.h};
}

/// dF/dU at u applied to d.
inline Cell jac_x(const Cell& u, const Cell& d, double g) {
  const double a = u.m / u.h;
  const double b = u.n / u.h;
  return {d.m, (g * u.h - a * a) * d.h + 2.0 * a * d.m, -a * b * d.h + b * d.m + a * d.n};
}

/// (dF/dU)^T at u applied to l.
inline Cell jac_x_t(const Cell& u, const Cell& l, double g) {
  const double a = u.m / u.h;
  const double b = u.n / u.h;
  return {(g * u.h - a * a) * l.m - a * b * l.n, l.h + 2.0 * a * l.m + b * l.n, a * l.n};
}

/// dG/dU at u applied to d.
inline Cell jac_y(const Cell& u, const Cell& d, double g) {
  const double a = u.m / u.h;
  const double b = u.n / u.h;
  return {d.n, -a * b * d.h + b * d.m + a * d.n, (g * u.h - b * b) * d.h + 2.0 * b * d.n};
}

/// (dG/dU)^T at u applied to l.
inline Cell jac_y_t(const Cell& u, const Cell& l, double g) {
  const double a = u.m / u.h;
  const double b = u.n / u.h;
  return {-a * b * l.m + (g * u.h - b * b) * l.n, b * l.m, l.h + a * l.m + 2.0 * b * l.n};
}

template <class Tag>
std::vector<Cell> unpack(const GridFields<Tag>& f) {
  const int nc = f.cells();
  const double* p = f.values().data();
  std::vector<Cell> out(static_cast<std::size_t>(nc));
  for (int c = 0; c < nc; ++c) out[c] = {p[c], p[nc + c], p[2 * nc + c]};
  return out;
}

template <class Tag>
GridFields<Tag> pack(int q, const std::vector<Cell>& cells) {
  GridFields<Tag> f(q);
  const int nc = q * q;
  double* p = f.values().data();
  for (int c = 0; c < nc; ++c) {
    p[c] = cells[c].h;
    p[nc + c] = cells[c].m;
    p[2 * nc + c] = cells[c].n;
  }
  return f;
}

/// Base-state quantities of one step: cell states and the half-step
/// edge states between (i,j)-(i+1,j) and (i,j)-(i,j+1).
struct StepLinearization {
  std::vector<Cell> u;
  std::vector<Cell> edge_x;
  std::vector<Cell> edge_y;
};

inline StepLinearization linearize_step(const StateVector& state, const Grid& grid, double g) {
  const int q = grid.q;
  const double hx = 0.5 * grid.dt / grid.dx();
  const double hy = 0.5 * grid.dt / grid.dy();
  StepLinearization lin;
  lin.u = unpack(state);
  const std::size_t nc = lin.u.size();
  std::vector<Cell> fx(nc), gy(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    fx[c] = flux_x(lin.u[c], g);
    gy[c] = flux_y(lin.u[c], g);
  }
  lin.edge_x.resize(nc);
  lin.edge_y.resize(nc);
  for (int i = 0; i < q; ++i) {
    const int ip = (i + 1 == q) ? 0 : i + 1;
    for (int j = 0; j < q; ++j) {
      const int jp = (j + 1 == q) ? 0 : j + 1;
      const int c = i * q + j;
      const int cx = ip * q + j;
      const int cy = i * q + jp;
      lin.edge_x[c] = 0.5 * (lin.u[c] + lin.u[cx]) - hx * (fx[cx] - fx[c]);
      lin.edge_y[c] = 0.5 * (lin.u[c] + lin.u[cy]) - hy * (gy[cy] - gy[c]);
    }
  }
  return lin;
}

}  // namespace varmeta::detail
