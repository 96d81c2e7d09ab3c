#include "varmeta/assimilation/observations.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace varmeta {

Component component_of(ObsVariable v) { return static_cast<Component>(static_cast<int>(v)); }

std::string_view to_string(ObsVariable v) {
  switch (v) {
    case ObsVariable::h:
      return "h";
    case ObsVariable::u:
      return "u";
    case ObsVariable::v:
      return "v";
  }
  return "?";
}

std::string_view to_string(LocationKind k) { return k == LocationKind::grid ? "grid" : "cart"; }

namespace {

// Cartesian entries sort as if at node 0 so that stable_sort keeps their order.
long sort_key_node(const ObservationEntry& e, int q_hint) {
  return e.kind == LocationKind::grid ? static_cast<long>(e.ix) * q_hint + e.iy : -1;
}

}  // namespace

ObservationSet::ObservationSet(std::vector<ObservationEntry> entries)
    : entries_(std::move(entries)) {
  int q_hint = 1;
  for (const auto& e : entries_)
    if (e.kind == LocationKind::grid) q_hint = std::max({q_hint, e.ix + 1, e.iy + 1});
  std::stable_sort(entries_.begin(), entries_.end(),
                   [q_hint](const ObservationEntry& a, const ObservationEntry& b) {
                     if (a.k != b.k) return a.k < b.k;
                     if (a.variable != b.variable) return a.variable < b.variable;
                     return sort_key_node(a, q_hint) < sort_key_node(b, q_hint);
                   });
}

std::vector<int> ObservationSet::times() const {
  std::vector<int> t;
  for (const auto& e : entries_)
    if (t.empty() || t.back() != e.k) t.push_back(e.k);
  return t;
}

Eigen::VectorXd ObservationSet::values() const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(entries_.size()));
  for (std::size_t i = 0; i < entries_.size(); ++i) v[i] = entries_[i].value;
  return v;
}

Eigen::VectorXd ObservationSet::inv_variances() const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(entries_.size()));
  for (std::size_t i = 0; i < entries_.size(); ++i) v[i] = entries_[i].inv_variance;
  return v;
}

std::size_t ObservationSet::cart_count() const {
  return static_cast<std::size_t>(std::count_if(
      entries_.begin(), entries_.end(), [](const auto& e) { return e.kind == LocationKind::cart; }));
}

Eigen::VectorXd ObservationSet::locations() const {
  Eigen::VectorXd xy(2 * static_cast<Eigen::Index>(cart_count()));
  Eigen::Index n = 0;
  for (const auto& e : entries_) {
    if (e.kind != LocationKind::cart) continue;
    xy[n++] = e.location.x;
    xy[n++] = e.location.y;
  }
  return xy;
}

ObservationSet ObservationSet::with_values(const Eigen::VectorXd& values) const {
  if (values.size() != static_cast<Eigen::Index>(entries_.size()))
    throw std::invalid_argument("observations: value vector has the wrong length");
  ObservationSet out = *this;
  for (std::size_t i = 0; i < entries_.size(); ++i) out.entries_[i].value = values[i];
  return out;
}

ObservationSet ObservationSet::with_inv_variances(const Eigen::VectorXd& w) const {
  if (w.size() != static_cast<Eigen::Index>(entries_.size()))
    throw std::invalid_argument("observations: weight vector has the wrong length");
  ObservationSet out = *this;
  for (std::size_t i = 0; i < entries_.size(); ++i) out.entries_[i].inv_variance = w[i];
  return out;
}

ObservationSet ObservationSet::with_locations(const Eigen::VectorXd& xy) const {
  if (xy.size() != 2 * static_cast<Eigen::Index>(cart_count()))
    throw std::invalid_argument("observations: location vector has the wrong length");
  ObservationSet out = *this;
  Eigen::Index n = 0;
  for (auto& e : out.entries_) {
    if (e.kind != LocationKind::cart) continue;
    e.location.x = xy[n++];
    e.location.y = xy[n++];
  }
  return out;
}

void ObservationSet::validate(const Grid& grid) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    const std::string where = "observation " + std::to_string(i) + ": ";
    if (!(e.inv_variance > 0.0) || !std::isfinite(e.inv_variance))
      throw std::invalid_argument(where + "inv_variance must be > 0");
    if (!std::isfinite(e.value)) throw std::invalid_argument(where + "value is not finite");
    if (e.k < 0 || e.k > grid.n_steps)
      throw std::invalid_argument(where + "time index outside the window");
    if (e.kind == LocationKind::grid) {
      if (e.ix < 0 || e.ix >= grid.q || e.iy < 0 || e.iy >= grid.q)
        throw std::invalid_argument(where + "grid index out of range");
    } else {
      const auto inside = [&](double c) { return c >= grid.lower && c <= grid.upper; };
      if (!inside(e.location.x) || !inside(e.location.y))
        throw std::invalid_argument(where + "location outside the domain");
    }
  }
}

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ObsVariable parse_variable(const std::string& s) {
  if (s == "h") return ObsVariable::h;
  if (s == "u") return ObsVariable::u;
  if (s == "v") return ObsVariable::v;
  throw std::runtime_error("observation csv: unknown variable '" + s + "'");
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

}  // namespace

void write_observations_csv(std::ostream& out, const ObservationSet& obs) {
  out << "k,kind,ix_or_lx,iy_or_ly,variable,value,inv_variance\n";
  for (const auto& e : obs.entries()) {
    out << e.k << ',' << to_string(e.kind) << ',';
    if (e.kind == LocationKind::grid)
      out << e.ix << ',' << e.iy;
    else
      out << fmt_double(e.location.x) << ',' << fmt_double(e.location.y);
    out << ',' << to_string(e.variable) << ',' << fmt_double(e.value) << ','
        << fmt_double(e.inv_variance) << '\n';
  }
}

void write_observations_csv(const std::filesystem::path& path, const ObservationSet& obs) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_observations_csv(out, obs);
}

ObservationSet read_observations_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("k,kind,ix_or_lx,iy_or_ly,variable,value,inv_variance", 0) != 0)
    throw std::runtime_error("observation csv: missing header");
  std::vector<ObservationEntry> entries;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 7) throw std::runtime_error("observation csv: expected 7 fields: " + line);
    ObservationEntry e;
    try {
      e.k = std::stoi(f[0]);
      if (f[1] == "grid") {
        e.kind = LocationKind::grid;
        e.ix = std::stoi(f[2]);
        e.iy = std::stoi(f[3]);
      } else if (f[1] == "cart") {
        e.kind = LocationKind::cart;
        e.location = {std::stod(f[2]), std::stod(f[3])};
      } else {
        throw std::runtime_error("observation csv: unknown kind '" + f[1] + "'");
      }
      e.variable = parse_variable(f[4]);
      e.value = std::stod(f[5]);
      e.inv_variance = std::stod(f[6]);
    } catch (const std::logic_error&) {
      throw std::runtime_error("observation csv: malformed row: " + line);
    }
    entries.push_back(e);
  }
  return ObservationSet(std::move(entries));
}

ObservationSet read_observations_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_observations_csv(in);
}

Eigen::VectorXd obs_operator_full(const StateVector& state) { return state.values(); }

StateVector unpack_full(int q, const Eigen::VectorXd& obs_space) {
  if (obs_space.size() != 3 * q * q)
    throw std::invalid_argument("unpack_full: vector length does not match 3 q^2");
  return StateVector(q, obs_space);
}

ObservationOperator::ObservationOperator(const ObservationSet& obs, const Grid& grid,
                                         const IdwOptions& idw) {
  const int nc = grid.cells();
  stencils_.reserve(obs.size());
  entry_time_.reserve(obs.size());
  for (const auto& e : obs.entries()) {
    const int offset = static_cast<int>(component_of(e.variable)) * nc;
    Stencil st;
    if (e.kind == LocationKind::grid) {
      st.index = {offset + grid.index(e.ix, e.iy)};
      st.weight = {1.0};
      st.dweight_dx = {0.0};
      st.dweight_dy = {0.0};
      st.exact_hit = true;
    } else {
      const IdwStencil s = idw_stencil(e.location, grid, idw);
      st.index.resize(s.cells.size());
      for (std::size_t k = 0; k < s.cells.size(); ++k) st.index[k] = offset + s.cells[k];
      st.weight = s.weights;
      st.dweight_dx = s.dweights_dx;
      st.dweight_dy = s.dweights_dy;
      st.exact_hit = s.exact_hit;
      st.min_distance = s.min_distance;
    }
    stencils_.push_back(std::move(st));
    entry_time_.push_back(e.k);
  }
  times_ = obs.times();
}

std::pair<std::size_t, std::size_t> ObservationOperator::range_at(int k) const {
  const auto lo = std::lower_bound(entry_time_.begin(), entry_time_.end(), k);
  const auto hi = std::upper_bound(entry_time_.begin(), entry_time_.end(), k);
  return {static_cast<std::size_t>(lo - entry_time_.begin()),
          static_cast<std::size_t>(hi - entry_time_.begin())};
}

double ObservationOperator::apply_entry(std::size_t e, const Eigen::VectorXd& fields) const {
  const Stencil& st = stencils_[e];
  double s = 0.0;
  for (std::size_t k = 0; k < st.index.size(); ++k) s += st.weight[k] * fields[st.index[k]];
  return s;
}

Eigen::VectorXd ObservationOperator::apply(std::size_t first, std::size_t last,
                                           const Eigen::VectorXd& fields) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(last - first));
  for (std::size_t e = first; e < last; ++e) out[e - first] = apply_entry(e, fields);
  return out;
}

void ObservationOperator::apply_transpose_add(std::size_t first, std::size_t last,
                                              const Eigen::VectorXd& w,
                                              Eigen::VectorXd& out) const {
  for (std::size_t e = first; e < last; ++e) {
    const Stencil& st = stencils_[e];
    const double we = w[e - first];
    for (std::size_t k = 0; k < st.index.size(); ++k) out[st.index[k]] += st.weight[k] * we;
  }
}

LocationGradient ObservationOperator::location_derivative(std::size_t e,
                                                          const Eigen::VectorXd& fields) const {
  const Stencil& st = stencils_[e];
  LocationGradient g;
  for (std::size_t k = 0; k < st.index.size(); ++k) {
    g.dx += st.dweight_dx[k] * fields[st.index[k]];
    g.dy += st.dweight_dy[k] * fields[st.index[k]];
  }
  return g;
}

}  // namespace varmeta
