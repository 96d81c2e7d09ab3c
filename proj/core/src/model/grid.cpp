#include "varmeta/model/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace varmeta {

void Grid::validate() const {
  if (q < 4) throw std::invalid_argument("grid: q must be >= 4, got " + std::to_string(q));
  if (!(upper > lower) || !std::isfinite(lower) || !std::isfinite(upper))
    throw std::invalid_argument("grid: domain bounds must satisfy lower < upper");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("grid: dt must be > 0");
  if (n_steps < 1) throw std::invalid_argument("grid: n_steps must be >= 1");
}

}  // namespace varmeta
