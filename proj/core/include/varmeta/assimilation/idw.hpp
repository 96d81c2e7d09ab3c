#pragma once

#include <span>
#include <vector>

#include "varmeta/model/grid.hpp"

namespace varmeta {

struct Location {
  double x = 0.0;
  double y = 0.0;
};

/// Inverse-distance weighting with exponent 1 over grid nodes.
struct IdwOptions {
  /// Support radius in grid cells (nodes with d <= radius * dx contribute).
  double radius_cells = 4.0;
  /// Use every node of the grid instead of the truncated support.
  bool full_sum = false;
};

/// Distance below which a query counts as sitting on a node.
inline constexpr double kIdwExactHitTolerance = 1e-12;
/// Distance below which the location gradient is declared singular.
inline constexpr double kIdwDegenerateDistance = 1e-9;

/// Interpolation weights for one query, plus their derivatives with respect
/// to the query coordinates. Distances use the periodic minimum image.
struct IdwStencil {
  std::vector<int> cells;
  std::vector<double> weights;
  std::vector<double> dweights_dx;
  std::vector<double> dweights_dy;
  bool exact_hit = false;
  /// Smallest distance from the query to a support node.
  double min_distance = 0.0;

  double apply(std::span<const double> field) const;
  double apply_dx(std::span<const double> field) const;
  double apply_dy(std::span<const double> field) const;
};

IdwStencil idw_stencil(const Location& query, const Grid& grid, const IdwOptions& options = {});

/// A data site with an explicit position, independent of any grid.
struct IdwSite {
  double x = 0.0;
  double y = 0.0;
  double value = 0.0;
};

/// sum d_i^{-1} z_i / sum d_i^{-1} over the given sites (plain Euclidean
/// distances); returns z_i directly when the query coincides with site i.
double idw_value(std::span<const IdwSite> sites, const Location& query);

/// Interpolates a q x q field (row-major) at each location.
std::vector<double> idw_interpolate(std::span<const Location> locations,
                                    std::span<const double> field, const Grid& grid,
                                    const IdwOptions& options = {});

struct LocationGradient {
  double dx = 0.0;
  double dy = 0.0;
};

/// Derivative of idw_interpolate with respect to each query's coordinates.
/// Throws DegenerateLocation when a query is within kIdwDegenerateDistance of
/// a support node.
std::vector<LocationGradient> idw_location_gradient(std::span<const Location> locations,
                                                    std::span<const double> field,
                                                    const Grid& grid,
                                                    const IdwOptions& options = {});

}  // namespace varmeta
