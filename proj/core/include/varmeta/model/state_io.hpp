#pragma once

#include <filesystem>
#include <iosfwd>

#include "varmeta/model/fields.hpp"

namespace varmeta {

/// CSV with header `i,j,h,hu,hv`, one row per cell, row-major over (i, j).
void write_state_csv(std::ostream& out, const StateVector& state);
void write_state_csv(const std::filesystem::path& path, const StateVector& state);

/// Reads the format written by write_state_csv; q is inferred from the row count.
StateVector read_state_csv(std::istream& in);
StateVector read_state_csv(const std::filesystem::path& path);

}  // namespace varmeta
