#pragma once

// Flat key = value run configuration.  '#' starts a comment; unknown or
// repeated keys are errors; each error names its line.

#include "qisim/model.hpp"

#include <charconv>
#include <cstdint>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qisim/csv.hpp"

namespace qisim {

struct RunConfig {
  ScenarioParams params;
  std::string mode = "fig2a";  // fig2a | fig2b | figS1 | trajectory | bounds
  std::vector<std::string> receivers{"sfg", "ffsfg"};
  long trials = 10000;
  std::uint64_t seed = 1;
  std::vector<double> M_grid{2e6, 5e6, 1e7, 2e7, 3.2188758248682e7, 5e7};
  std::vector<double> N_S_grid{1e-4, 3e-4, 1e-3, 3e-3, 1e-2};
  double qcb = 0.1;
  std::string out = "out.csv";
  int h_true = 1;          // trajectory mode
  long sfg_threshold = 0;  // SFG count threshold

  bool operator==(const RunConfig&) const = default;
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& msg, int line)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

namespace config_detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline double to_double(const std::string& key, const std::string& v, int line) {
  double x = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (r.ec != std::errc{} || r.ptr != v.data() + v.size() || v.empty())
    throw ConfigError(key + ": cannot parse '" + v + "' as a number", line);
  return x;
}

inline long to_long(const std::string& key, const std::string& v, int line) {
  long x = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (r.ec != std::errc{} || r.ptr != v.data() + v.size() || v.empty()) {
    // accept integral values written in floating form, e.g. 1e5
    const double d = to_double(key, v, line);
    if (d != static_cast<double>(static_cast<long>(d))) throw ConfigError(key + ": expected an integer", line);
    return static_cast<long>(d);
  }
  return x;
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline void range(bool ok, const std::string& what, int line) {
  if (!ok) throw ConfigError(what, line);
}

}  // namespace config_detail

/// Sets one key.  Used for both file lines and command-line overrides; K and
/// epsilon displace each other.
inline void set_config_key(RunConfig& c, const std::string& key, const std::string& value, int line = 0) {
  using namespace config_detail;
  auto num = [&] { return to_double(key, value, line); };
  auto& p = c.params;
  if (key == "N_S") {
    p.N_S = num();
    range(p.N_S > 0.0, "N_S must be > 0", line);
  } else if (key == "kappa") {
    p.kappa = num();
    range(p.kappa >= 0.0 && p.kappa <= 1.0, "kappa must lie in [0,1]", line);
  } else if (key == "N_B") {
    p.N_B = num();
    range(p.N_B > 0.0, "N_B must be > 0", line);
  } else if (key == "M") {
    p.modes = num();
    range(p.modes >= 0.0, "M must be >= 0", line);
  } else if (key == "eta") {
    p.eta = num();
    range(p.eta > 0.0 && p.eta < 1.0, "eta must lie in (0,1), got " + value, line);
  } else if (key == "K") {
    const long k = to_long(key, value, line);
    range(k >= 1, "K must be a positive integer", line);
    p.cycles = k;
    p.epsilon.reset();
  } else if (key == "epsilon") {
    const double e = num();
    range(e > 0.0 && e < 1.0, "epsilon must lie in (0,1)", line);
    p.epsilon = e;
    p.cycles.reset();
  } else if (key == "prior_h1") {
    p.prior_h1 = num();
    range(p.prior_h1 > 0.0 && p.prior_h1 < 1.0, "prior_h1 must lie in (0,1)", line);
  } else if (key == "g") {
    p.g = num();
    range(p.g > 0.0, "g must be > 0", line);
  } else if (key == "slicing") {
    range(value == "true" || value == "false", "slicing must be true or false", line);
    p.slicing = value == "true";
  } else if (key == "mode") {
    range(value == "fig2a" || value == "fig2b" || value == "figS1" || value == "trajectory" || value == "bounds",
          "mode must be one of fig2a, fig2b, figS1, trajectory, bounds", line);
    c.mode = value;
  } else if (key == "receivers") {
    auto list = split_list(value);
    range(!list.empty(), "receivers must list sfg and/or ffsfg", line);
    for (const auto& r : list) range(r == "sfg" || r == "ffsfg", "receivers: unknown receiver '" + r + "'", line);
    c.receivers = list;
  } else if (key == "trials") {
    c.trials = to_long(key, value, line);
    range(c.trials >= 100, "trials must be >= 100", line);
  } else if (key == "seed") {
    const long s = to_long(key, value, line);
    range(s >= 0, "seed must be >= 0", line);
    c.seed = static_cast<std::uint64_t>(s);
  } else if (key == "M_grid" || key == "N_S_grid") {
    std::vector<double> g;
    for (const auto& item : split_list(value)) {
      g.push_back(to_double(key, item, line));
      range(g.back() > 0.0, key + " entries must be > 0", line);
    }
    (key == "M_grid" ? c.M_grid : c.N_S_grid) = g;
  } else if (key == "qcb") {
    c.qcb = num();
    range(c.qcb > 0.0 && c.qcb < 0.5, "qcb must lie in (0, 1/2)", line);
  } else if (key == "out") {
    range(!value.empty(), "out must not be empty", line);
    c.out = value;
  } else if (key == "h_true") {
    const long h = to_long(key, value, line);
    range(h == 0 || h == 1, "h_true must be 0 or 1", line);
    c.h_true = static_cast<int>(h);
  } else if (key == "sfg_threshold") {
    c.sfg_threshold = to_long(key, value, line);
    range(c.sfg_threshold >= 0, "sfg_threshold must be >= 0", line);
  } else {
    throw ConfigError("unknown key '" + key + "'", line);
  }
}

inline RunConfig parse_config(const std::string& text) {
  RunConfig c;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = config_detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value", line);
    const std::string key = config_detail::trim(s.substr(0, eq));
    const std::string value = config_detail::trim(s.substr(eq + 1));
    if (!seen.insert(key).second) throw ConfigError("duplicate key '" + key + "'", line);
    if ((key == "K" && seen.count("epsilon")) || (key == "epsilon" && seen.count("K")))
      throw ConfigError("supply only one of epsilon and K", line);
    set_config_key(c, key, value, line);
  }
  try {
    c.params.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what(), 0);
  }
  return c;
}

inline std::string render_config(const RunConfig& c) {
  const auto& p = c.params;
  auto list = [](const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
    return s;
  };
  std::string rs;
  for (std::size_t i = 0; i < c.receivers.size(); ++i) rs += (i ? "," : "") + c.receivers[i];
  std::ostringstream o;
  o << "N_S = " << format_double(p.N_S) << '\n'
    << "kappa = " << format_double(p.kappa) << '\n'
    << "N_B = " << format_double(p.N_B) << '\n'
    << "M = " << format_double(p.modes) << '\n'
    << "eta = " << format_double(p.eta) << '\n';
  if (p.epsilon) o << "epsilon = " << format_double(*p.epsilon) << '\n';
  else if (p.cycles) o << "K = " << *p.cycles << '\n';
  o << "prior_h1 = " << format_double(p.prior_h1) << '\n'
    << "g = " << format_double(p.g) << '\n'
    << "slicing = " << (p.slicing ? "true" : "false") << '\n'
    << "mode = " << c.mode << '\n'
    << "receivers = " << rs << '\n'
    << "trials = " << c.trials << '\n'
    << "seed = " << c.seed << '\n'
    << "M_grid = " << list(c.M_grid) << '\n'
    << "N_S_grid = " << list(c.N_S_grid) << '\n'
    << "qcb = " << format_double(c.qcb) << '\n'
    << "out = " << c.out << '\n'
    << "h_true = " << c.h_true << '\n'
    << "sfg_threshold = " << c.sfg_threshold << '\n';
  return o.str();
}

}  // namespace qisim
