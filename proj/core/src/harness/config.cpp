#include "varmeta/harness/config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "varmeta/errors.hpp"

namespace varmeta {

namespace {

constexpr std::pair<ScenarioName, std::string_view> kScenarioNames[] = {
    {ScenarioName::obs_values, "obs_values"},
    {ScenarioName::obs_weights, "obs_weights"},
    {ScenarioName::obs_locations_1, "obs_locations_1"},
    {ScenarioName::obs_locations_2, "obs_locations_2"},
    {ScenarioName::obs_locations_3, "obs_locations_3"},
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_double(const std::string& v) {
  std::size_t pos = 0;
  const double d = std::stod(v, &pos);
  if (pos != v.size()) throw std::invalid_argument(v);
  return d;
}

long long to_integer(const std::string& v) {
  std::size_t pos = 0;
  const long long i = std::stoll(v, &pos);
  if (pos != v.size()) throw std::invalid_argument(v);
  return i;
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument(v);
}

struct Key {
  std::string section;
  std::string name;
  std::function<void(const std::string&)> set;
  std::function<std::string()> get;
};

template <class T>
Key real_key(std::string s, std::string n, T& ref) {
  return {std::move(s), std::move(n), [&ref](const std::string& v) { ref = to_double(v); },
          [&ref] { return fmt(ref); }};
}

template <class T>
Key int_key(std::string s, std::string n, T& ref) {
  return {std::move(s), std::move(n),
          [&ref](const std::string& v) { ref = static_cast<T>(to_integer(v)); },
          [&ref] { return std::to_string(ref); }};
}

std::vector<Key> keys(ExperimentConfig& c) {
  std::vector<Key> k;
  k.push_back({"experiment", "scenario",
               [&c](const std::string& v) {
                 c.scenarios.clear();
                 std::stringstream ss(v);
                 std::string item;
                 while (std::getline(ss, item, ',')) c.scenarios.push_back(parse_scenario(trim(item)));
               },
               [&c] {
                 std::string out;
                 for (auto s : c.scenarios) out += (out.empty() ? "" : ", ") + std::string(to_string(s));
                 return out;
               }});
  k.push_back(int_key("grid", "q", c.grid.q));
  k.push_back(real_key("grid", "lower", c.grid.lower));
  k.push_back(real_key("grid", "upper", c.grid.upper));
  k.push_back(real_key("grid", "dt", c.grid.dt));
  k.push_back(int_key("grid", "n_steps", c.grid.n_steps));
  k.push_back(real_key("model", "g", c.model.g));
  k.push_back(real_key("model", "bell_width", c.bell_width));
  k.push_back(real_key("model", "bell_peak", c.bell_peak));
  k.push_back(real_key("model", "bell_base", c.bell_base));
  k.push_back(real_key("model", "bell_aspect", c.bell_aspect));
  k.push_back(real_key("covariance", "h_std_fraction", c.covariance.h_std_fraction));
  k.push_back(real_key("covariance", "h_std_absolute", c.covariance.h_std_absolute));
  k.push_back(real_key("covariance", "h_std_floor", c.covariance.h_std_floor));
  k.push_back(real_key("covariance", "correlation_length", c.covariance.correlation_length));
  k.push_back(real_key("covariance", "uv_std", c.covariance.uv_std));
  k.push_back(real_key("covariance", "nugget", c.covariance.nugget));
  k.push_back(real_key("observations", "noise_fraction", c.noise_fraction));
  k.push_back(int_key("observations", "obs_time", c.obs_time));
  k.push_back(real_key("observations", "initial_trust", c.initial_trust));
  k.push_back(real_key("observations", "rect_i0", c.rect_i0));
  k.push_back(real_key("observations", "rect_i1", c.rect_i1));
  k.push_back(real_key("observations", "rect_j0", c.rect_j0));
  k.push_back(real_key("observations", "rect_j1", c.rect_j1));
  k.push_back(real_key("observations", "noise_inflation", c.noise_inflation));
  k.push_back(int_key("observations", "sensors", c.sensors));
  k.push_back(real_key("observations", "idw_radius", c.idw.radius_cells));
  k.push_back({"observations", "idw_full_sum",
               [&c](const std::string& v) { c.idw.full_sum = to_bool(v); },
               [&c] { return std::string(c.idw.full_sum ? "true" : "false"); }});
  k.push_back(int_key("verification", "t_v", c.t_v));
  k.push_back(int_key("seeds", "background", c.seed_background));
  k.push_back(int_key("seeds", "obs_noise", c.seed_obs_noise));
  k.push_back(int_key("solver", "inner_iterations", c.inner_iterations));
  k.push_back(int_key("solver", "outer_iterations", c.outer_iterations));
  k.push_back(int_key("solver", "memory", c.memory));
  k.push_back(real_key("solver", "cg_tolerance", c.cg.rel_tolerance));
  k.push_back(int_key("solver", "cg_max_iterations", c.cg.max_iterations));
  k.push_back({"solver", "location_gradient",
               [&c](const std::string& v) {
                 if (v == "approximate")
                   c.location_mode = LocationGradientMode::approximate;
                 else if (v == "full")
                   c.location_mode = LocationGradientMode::full;
                 else
                   throw std::invalid_argument(v);
               },
               [&c] {
                 return std::string(c.location_mode == LocationGradientMode::full ? "full"
                                                                                  : "approximate");
               }});
  return k;
}

}  // namespace

std::string_view to_string(ScenarioName s) {
  for (const auto& [n, str] : kScenarioNames)
    if (n == s) return str;
  return "?";
}

ScenarioName parse_scenario(std::string_view s) {
  for (const auto& [n, str] : kScenarioNames)
    if (str == s) return n;
  throw ConfigError("unknown scenario '" + std::string(s) + "'");
}

bool is_location_scenario(ScenarioName s) {
  return s == ScenarioName::obs_locations_1 || s == ScenarioName::obs_locations_2 ||
         s == ScenarioName::obs_locations_3;
}

int ExperimentConfig::resolved_outer_iterations(ScenarioName s) const {
  if (outer_iterations > 0) return outer_iterations;
  return is_location_scenario(s) ? 30 : 5;
}

void ExperimentConfig::validate() const {
  const auto fail = [](const std::string& m) { throw ConfigError(m); };
  try {
    grid.validate();
    model.validate();
    covariance.validate();
    cg.validate();
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  if (scenarios.empty()) fail("no scenario given");
  if (!(bell_width > 0.0 && bell_width < grid.q)) fail("bell_width must lie in (0, q)");
  if (!(bell_base > 0.0 && bell_peak > 0.0)) fail("bell heights must be positive");
  if (!(bell_aspect > 0.0)) fail("bell_aspect must be positive");
  if (!(noise_fraction >= 0.0 && noise_fraction < 1.0)) fail("noise_fraction must lie in [0, 1)");
  if (obs_time > grid.n_steps || t_v > grid.n_steps) fail("obs_time/t_v beyond the window");
  if (initial_trust < 0.0) fail("initial_trust must be >= 0");
  if (!(0.0 <= rect_i0 && rect_i0 < rect_i1 && rect_i1 <= 1.0 && 0.0 <= rect_j0 &&
        rect_j0 < rect_j1 && rect_j1 <= 1.0))
    fail("noisy rectangle must be an ordered sub-range of [0, 1]");
  if (!(noise_inflation > 0.0)) fail("noise_inflation must be positive");
  if (sensors <= 0) fail("sensors must be positive");
  if (!(idw.radius_cells > 0.0)) fail("idw_radius must be positive");
  if (inner_iterations <= 0 || outer_iterations < 0 || memory <= 0)
    fail("solver budgets must be positive");
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  auto table = keys(cfg);
  std::string section;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const std::string where = "line " + std::to_string(lineno) + ": ";
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError(where + "malformed section header");
      section = trim(std::string_view(t).substr(1, t.size() - 2));
      bool known = false;
      for (const auto& k : table) known = known || k.section == section;
      if (!known) throw ConfigError(where + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    Key* hit = nullptr;
    for (auto& k : table)
      if (k.section == section && k.name == key) hit = &k;
    if (!hit) throw ConfigError(where + "unknown key '" + key + "' in [" + section + "]");
    try {
      hit->set(value);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError(where + "invalid value '" + value + "' for " + key);
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  return parse_config(in);
}

std::string format_config(const ExperimentConfig& cfg) {
  ExperimentConfig copy = cfg;
  std::string out;
  std::string section;
  for (const auto& k : keys(copy)) {
    if (k.section != section) {
      if (!section.empty()) out += '\n';
      section = k.section;
      out += "[" + section + "]\n";
    }
    out += k.name + " = " + k.get() + "\n";
  }
  return out;
}

ExperimentConfig reduced_config() {
  ExperimentConfig c;
  c.grid.q = 20;
  c.grid.n_steps = 50;
  c.bell_width = 5.0;
  return c;
}

}  // namespace varmeta
