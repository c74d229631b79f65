#include "impulse_game/config.hpp"

#include <algorithm>
#include <charconv>
#include <fmt/format.h>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace impulse_game {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) throw ConfigError(key, "not a number: '" + text + "'");
  return v;
}

int parse_int(const std::string& key, const std::string& text) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) throw ConfigError(key, "not an integer: '" + text + "'");
  return v;
}

std::optional<double> parse_cap(const std::string& key, const std::string& text) {
  if (text == "none") return std::nullopt;
  return parse_double(key, text);
}

std::string show(double v) { return fmt::format("{}", v); }
std::string show(int v) { return fmt::format("{}", v); }
std::string show(const std::optional<double>& v) { return v ? show(*v) : "none"; }

struct Entry {
  const char* key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define DOUBLE_ENTRY(name, member)                                                           \
  Entry {                                                                                    \
    name, [](RunConfig& c, const std::string& v) { c.member = parse_double(name, v); },      \
        [](const RunConfig& c) { return show(c.member); }                                    \
  }
#define INT_ENTRY(name, member)                                                              \
  Entry {                                                                                    \
    name, [](RunConfig& c, const std::string& v) { c.member = parse_int(name, v); },         \
        [](const RunConfig& c) { return show(c.member); }                                    \
  }
#define CAP_ENTRY(name, member)                                                              \
  Entry {                                                                                    \
    name, [](RunConfig& c, const std::string& v) { c.member = parse_cap(name, v); },         \
        [](const RunConfig& c) { return show(c.member); }                                    \
  }

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table{
      DOUBLE_ENTRY("T", model.T),
      DOUBLE_ENTRY("mu", model.mu),
      DOUBLE_ENTRY("sigma", model.sigma),
      DOUBLE_ENTRY("rho1", model.rho1),
      DOUBLE_ENTRY("rho2", model.rho2),
      DOUBLE_ENTRY("lambda", model.lambda),
      DOUBLE_ENTRY("zeta_min", model.zeta_min),
      DOUBLE_ENTRY("zeta_max", model.zeta_max),
      DOUBLE_ENTRY("delta", model.delta),
      CAP_ENTRY("k1", model.k1),
      CAP_ENTRY("k2", model.k2),
      DOUBLE_ENTRY("phi1", model.phi1),
      DOUBLE_ENTRY("phi2", model.phi2),
      DOUBLE_ENTRY("kappa", model.kappa),
      INT_ENTRY("m_time", grid.m_time),
      INT_ENTRY("n_x", grid.n_x),
      INT_ENTRY("n_y", grid.n_y),
      DOUBLE_ENTRY("x_min", grid.x_min),
      DOUBLE_ENTRY("x_max", grid.x_max),
      DOUBLE_ENTRY("y_min", grid.y_min),
      DOUBLE_ENTRY("y_max", grid.y_max),
      INT_ENTRY("n_zeta", grid.n_zeta),
      DOUBLE_ENTRY("epsilon", solver.epsilon),
      INT_ENTRY("n_max", solver.n_max),
      DOUBLE_ENTRY("alpha", solver.alpha),
      DOUBLE_ENTRY("r0", solver.r0),
      DOUBLE_ENTRY("inner_epsilon", solver.inner_epsilon),
      INT_ENTRY("inner_n_max", solver.inner_n_max),
      INT_ENTRY("quantizer_n", quantizer_n),
      DOUBLE_ENTRY("quantizer_tol", quantizer_tol),
      INT_ENTRY("quantizer_max_iter", quantizer_max_iter),
      Entry{"quantizer_file", [](RunConfig& c, const std::string& v) { c.quantizer_file = v; },
            [](const RunConfig& c) { return c.quantizer_file; }},
      DOUBLE_ENTRY("x0", initial.x),
      DOUBLE_ENTRY("y1_0", initial.y1),
      DOUBLE_ENTRY("y2_0", initial.y2),
  };
  return table;
}

#undef DOUBLE_ENTRY
#undef INT_ENTRY
#undef CAP_ENTRY

}  // namespace

RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(line, fmt::format("line {}: expected 'key = value'", lineno));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto& table = entries();
    const auto it = std::find_if(table.begin(), table.end(), [&](const Entry& e) { return key == e.key; });
    if (it == table.end()) throw ConfigError(key, "unknown key");
    if (!seen.insert(key).second) throw ConfigError(key, "given more than once");
    if (value.empty() && key != "quantizer_file") throw ConfigError(key, "missing value");
    it->set(cfg, value);
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  return parse_config(in);
}

void validate(const RunConfig& cfg) {
  validate(cfg.model);
  const Grid grid(cfg.grid, cfg.model);
  validate(cfg.solver);
  if (cfg.quantizer_n < 1) throw ConfigError("quantizer_n", "need at least one level");
  if (!(cfg.quantizer_tol > 0.0)) throw ConfigError("quantizer_tol", "tolerance must be positive");
  if (cfg.quantizer_max_iter < 1) throw ConfigError("quantizer_max_iter", "need at least one iteration");
  auto inside = [](double v, const Axis& a) { return v >= a.min() && v <= a.max(); };
  if (!inside(cfg.initial.x, grid.x())) throw ConfigError("x0", "initial state outside grid box");
  if (!inside(cfg.initial.y1, grid.y())) throw ConfigError("y1_0", "initial state outside grid box");
  if (!inside(cfg.initial.y2, grid.y())) throw ConfigError("y2_0", "initial state outside grid box");
}

std::string format_config(const RunConfig& cfg) {
  std::ostringstream out;
  for (const auto& e : entries()) out << e.key << " = " << e.get(cfg) << '\n';
  return out.str();
}

Quantizer make_quantizer(const RunConfig& cfg, const std::filesystem::path& base_dir) {
  if (cfg.quantizer_file.empty()) return build_gaussian_quantizer(cfg.quantizer_n, cfg.quantizer_tol, cfg.quantizer_max_iter);
  std::filesystem::path file(cfg.quantizer_file);
  if (file.is_relative() && !base_dir.empty()) file = base_dir / file;
  return read_quantizer_csv(file);
}

}  // namespace impulse_game
