#include "varmeta/model/state_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace varmeta {

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_state_csv(std::ostream& out, const StateVector& state) {
  const int q = state.q();
  out << "i,j,h,hu,hv\n";
  for (int i = 0; i < q; ++i) {
    for (int j = 0; j < q; ++j) {
      out << i << ',' << j << ',' << fmt_double(state(Component::h, i, j)) << ','
          << fmt_double(state(Component::hu, i, j)) << ','
          << fmt_double(state(Component::hv, i, j)) << '\n';
    }
  }
}

void write_state_csv(const std::filesystem::path& path, const StateVector& state) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_state_csv(out, state);
}

StateVector read_state_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("i,j,h,hu,hv", 0) != 0)
    throw std::runtime_error("state csv: missing header 'i,j,h,hu,hv'");
  struct Row {
    int i, j;
    double h, hu, hv;
  };
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    Row r{};
    char c1, c2, c3, c4;
    if (!(ss >> r.i >> c1 >> r.j >> c2 >> r.h >> c3 >> r.hu >> c4 >> r.hv))
      throw std::runtime_error("state csv: malformed row '" + line + "'");
    rows.push_back(r);
  }
  const int q = static_cast<int>(std::lround(std::sqrt(static_cast<double>(rows.size()))));
  if (q * q != static_cast<int>(rows.size()) || q == 0)
    throw std::runtime_error("state csv: row count is not a perfect square");
  StateVector s(q);
  for (const Row& r : rows) {
    if (r.i < 0 || r.i >= q || r.j < 0 || r.j >= q)
      throw std::runtime_error("state csv: index out of range");
    s(Component::h, r.i, r.j) = r.h;
    s(Component::hu, r.i, r.j) = r.hu;
    s(Component::hv, r.i, r.j) = r.hv;
  }
  return s;
}

StateVector read_state_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_state_csv(in);
}

}  // namespace varmeta
