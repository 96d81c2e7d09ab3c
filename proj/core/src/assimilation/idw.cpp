#include "varmeta/assimilation/idw.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "varmeta/errors.hpp"

namespace varmeta {

namespace {

double wrap_displacement(double d, double width) {
  d = std::fmod(d, width);
  if (d >= 0.5 * width) d -= width;
  if (d < -0.5 * width) d += width;
  return d;
}

struct Candidate {
  int cell;
  double rx;  // query minus node, minimum image
  double ry;
};

std::vector<Candidate> support(const Location& query, const Grid& grid, const IdwOptions& opt) {
  std::vector<Candidate> out;
  const double dx = grid.dx();
  const double w = grid.width();
  const int reach = static_cast<int>(std::ceil(opt.radius_cells)) + 1;
  if (opt.full_sum || 2 * reach + 1 >= grid.q) {
    const double limit2 = opt.full_sum ? INFINITY : std::pow(opt.radius_cells * dx, 2);
    out.reserve(static_cast<std::size_t>(grid.cells()));
    for (int i = 0; i < grid.q; ++i) {
      const double rx = wrap_displacement(query.x - grid.x(i), w);
      for (int j = 0; j < grid.q; ++j) {
        const double ry = wrap_displacement(query.y - grid.y(j), w);
        if (rx * rx + ry * ry <= limit2 * (1.0 + 1e-12)) out.push_back({grid.index(i, j), rx, ry});
      }
    }
    return out;
  }
  const double limit2 = std::pow(opt.radius_cells * dx, 2) * (1.0 + 1e-12);
  const int ci = static_cast<int>(std::floor((query.x - grid.lower) / dx));
  const int cj = static_cast<int>(std::floor((query.y - grid.lower) / dx));
  for (int di = -reach; di <= reach + 1; ++di) {
    const double rx = query.x - (grid.lower + (ci + di) * dx);
    for (int dj = -reach; dj <= reach + 1; ++dj) {
      const double ry = query.y - (grid.lower + (cj + dj) * dx);
      if (rx * rx + ry * ry <= limit2) out.push_back({grid.index(ci + di, cj + dj), rx, ry});
    }
  }
  return out;
}

}  // namespace

double IdwStencil::apply(std::span<const double> field) const {
  double s = 0.0;
  for (std::size_t k = 0; k < cells.size(); ++k) s += weights[k] * field[cells[k]];
  return s;
}

double IdwStencil::apply_dx(std::span<const double> field) const {
  double s = 0.0;
  for (std::size_t k = 0; k < cells.size(); ++k) s += dweights_dx[k] * field[cells[k]];
  return s;
}

double IdwStencil::apply_dy(std::span<const double> field) const {
  double s = 0.0;
  for (std::size_t k = 0; k < cells.size(); ++k) s += dweights_dy[k] * field[cells[k]];
  return s;
}

IdwStencil idw_stencil(const Location& query, const Grid& grid, const IdwOptions& options) {
  if (!(options.radius_cells > 0.0)) throw std::invalid_argument("idw: radius must be > 0");
  const std::vector<Candidate> cand = support(query, grid, options);
  if (cand.empty()) throw std::invalid_argument("idw: empty support set");

  IdwStencil st;
  st.min_distance = INFINITY;
  std::size_t nearest = 0;
  std::vector<double> dist(cand.size());
  for (std::size_t k = 0; k < cand.size(); ++k) {
    dist[k] = std::hypot(cand[k].rx, cand[k].ry);
    if (dist[k] < st.min_distance) {
      st.min_distance = dist[k];
      nearest = k;
    }
  }

  if (st.min_distance <= kIdwExactHitTolerance * grid.dx()) {
    st.exact_hit = true;
    st.cells = {cand[nearest].cell};
    st.weights = {1.0};
    st.dweights_dx = {0.0};
    st.dweights_dy = {0.0};
    return st;
  }

  // W_k = w_k / S with w_k = 1/d_k; dw_k/dx = -rx / d^3.
  const std::size_t n = cand.size();
  std::vector<double> w(n), dwx(n), dwy(n);
  double s = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double d = dist[k];
    w[k] = 1.0 / d;
    const double d3 = d * d * d;
    dwx[k] = -cand[k].rx / d3;
    dwy[k] = -cand[k].ry / d3;
    s += w[k];
    sx += dwx[k];
    sy += dwy[k];
  }
  st.cells.resize(n);
  st.weights.resize(n);
  st.dweights_dx.resize(n);
  st.dweights_dy.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    st.cells[k] = cand[k].cell;
    st.weights[k] = w[k] / s;
    st.dweights_dx[k] = (dwx[k] - st.weights[k] * sx) / s;
    st.dweights_dy[k] = (dwy[k] - st.weights[k] * sy) / s;
  }
  return st;
}

double idw_value(std::span<const IdwSite> sites, const Location& query) {
  if (sites.empty()) throw std::invalid_argument("idw: no sites");
  double num = 0.0;
  double den = 0.0;
  for (const IdwSite& site : sites) {
    const double d = std::hypot(query.x - site.x, query.y - site.y);
    if (d == 0.0) return site.value;
    num += site.value / d;
    den += 1.0 / d;
  }
  return num / den;
}

std::vector<double> idw_interpolate(std::span<const Location> locations,
                                    std::span<const double> field, const Grid& grid,
                                    const IdwOptions& options) {
  if (static_cast<int>(field.size()) != grid.cells())
    throw std::invalid_argument("idw: field size does not match grid");
  std::vector<double> out;
  out.reserve(locations.size());
  for (const Location& loc : locations) out.push_back(idw_stencil(loc, grid, options).apply(field));
  return out;
}

std::vector<LocationGradient> idw_location_gradient(std::span<const Location> locations,
                                                    std::span<const double> field,
                                                    const Grid& grid,
                                                    const IdwOptions& options) {
  if (static_cast<int>(field.size()) != grid.cells())
    throw std::invalid_argument("idw: field size does not match grid");
  std::vector<LocationGradient> out;
  out.reserve(locations.size());
  for (std::size_t n = 0; n < locations.size(); ++n) {
    const IdwStencil st = idw_stencil(locations[n], grid, options);
    if (st.min_distance < kIdwDegenerateDistance)
      throw DegenerateLocation("idw gradient: location " + std::to_string(n) +
                                   " coincides with a grid node",
                               n);
    out.push_back({st.apply_dx(field), st.apply_dy(field)});
  }
  return out;
}

}  // namespace varmeta
