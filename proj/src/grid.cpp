#include "impulse_game/grid.hpp"

#include <fmt/format.h>
#include <fmt/os.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>

namespace impulse_game {

Axis::Axis(double lo, double hi, int n) : nodes_(static_cast<std::size_t>(n)), step_((hi - lo) / (n - 1)) {
  for (int i = 0; i < n; ++i) nodes_[i] = lo + i * step_;
  nodes_.back() = hi;
}

double Axis::clamp(double v) const { return std::clamp(v, min(), max()); }

int Axis::nearest(double v) const {
  const double pos = (clamp(v) - min()) / step_;
  return std::clamp(static_cast<int>(std::lround(pos)), 0, size() - 1);
}

Stencil locate(const Axis& axis, double v) {
  double pos = (axis.clamp(v) - axis.min()) / axis.step();
  const double r = std::round(pos);
  if (std::abs(pos - r) < 1e-9) pos = r;
  const int lo = std::min(static_cast<int>(std::floor(pos)), axis.size() - 2);
  return {lo, pos - lo};
}

Grid::Grid(const GridSpec& spec, const ModelParams& params) : spec_(spec) {
  if (spec.m_time < 1) throw ConfigError("m_time", "need at least one time step");
  if (spec.n_x < 2) throw ConfigError("n_x", "need at least two nodes");
  if (spec.n_y < 2) throw ConfigError("n_y", "need at least two nodes");
  if (!(spec.x_min < spec.x_max) || spec.x_min < 0.0) throw ConfigError("x_min", "need 0 <= x_min < x_max");
  if (!(spec.y_min < spec.y_max) || spec.y_min < 0.0) throw ConfigError("y_min", "need 0 <= y_min < y_max");
  if (spec.n_zeta < 2) throw ConfigError("n_zeta", "need at least two impulse sizes");
  if (!(params.zeta_min < 0.0 && params.zeta_max > 0.0)) {
    throw ConfigError("zeta_min", "impulse range must straddle zero");
  }

  h_ = params.T / spec.m_time;
  x_ = Axis(spec.x_min, spec.x_max, spec.n_x);
  y_ = Axis(spec.y_min, spec.y_max, spec.n_y);

  const Axis impulses(params.zeta_min, params.zeta_max, spec.n_zeta);
  zeta_ = impulses.nodes();
  const bool has_zero = std::any_of(zeta_.begin(), zeta_.end(), [](double z) { return std::abs(z) < 1e-12; });
  if (has_zero) {
    for (double& z : zeta_) if (std::abs(z) < 1e-12) z = 0.0;
  } else {
    zeta_.push_back(0.0);
    std::sort(zeta_.begin(), zeta_.end());
  }
  zero_zeta_index_ = static_cast<int>(std::find(zeta_.begin(), zeta_.end(), 0.0) - zeta_.begin());

  zeta_priority_.resize(zeta_.size());
  std::iota(zeta_priority_.begin(), zeta_priority_.end(), 0);
  std::stable_sort(zeta_priority_.begin(), zeta_priority_.end(), [this](int a, int b) {
    const double za = zeta_[a], zb = zeta_[b];
    if (std::abs(za) != std::abs(zb)) return std::abs(za) < std::abs(zb);
    return za < zb;
  });
}

Grid::NodeIndex Grid::unravel(std::size_t n) const {
  const int i2 = static_cast<int>(n % ny());
  n /= ny();
  const int i1 = static_cast<int>(n % ny());
  return {static_cast<int>(n / ny()), i1, i2};
}

ValueField::ValueField(const Grid& grid, double fill)
    : slices_(grid.steps() + 1),
      slice_size_(grid.nodes_per_slice()),
      data_(static_cast<std::size_t>(slices_) * slice_size_, fill) {}

void fill_terminal(std::span<double> slice, Player player, const Grid& grid, const ModelParams& params) {
  for (int ix = 0; ix < grid.nx(); ++ix) {
    for (int i1 = 0; i1 < grid.ny(); ++i1) {
      for (int i2 = 0; i2 < grid.ny(); ++i2) {
        const double y1 = grid.y()[i1];
        const double y2 = grid.y()[i2];
        const bool one = player == Player::One;
        slice[grid.node(ix, i1, i2)] =
            terminal_payoff(player, grid.x()[ix], one ? y1 : y2, one ? y2 : y1, params);
      }
    }
  }
}

ValueField terminal_field(Player player, const Grid& grid, const ModelParams& params) {
  ValueField v(grid);
  fill_terminal(v.slice(grid.steps()), player, grid, params);
  const auto terminal = v.slice(grid.steps());
  for (int k = 0; k < grid.steps(); ++k) std::copy(terminal.begin(), terminal.end(), v.slice(k).begin());
  return v;
}

PolicyField::PolicyField(const Grid& grid)
    : slices_(grid.steps()),
      slice_size_(grid.nodes_per_slice()),
      data_(static_cast<std::size_t>(slices_) * slice_size_) {}

const char* to_string(ActionTag tag) {
  switch (tag) {
    case ActionTag::Wait: return "wait";
    case ActionTag::Intervene: return "intervene";
    case ActionTag::Endure: return "endure";
  }
  return "?";
}

ActionTag action_tag_from_string(const std::string& s) {
  if (s == "wait") return ActionTag::Wait;
  if (s == "intervene") return ActionTag::Intervene;
  if (s == "endure") return ActionTag::Endure;
  throw std::invalid_argument("unknown action tag '" + s + "'");
}

double interp_value(const Grid& grid, std::span<const double> slice, double x, double y1, double y2) {
  const Stencil sx = locate(grid.x(), x);
  const Stencil s1 = locate(grid.y(), y1);
  const Stencil s2 = locate(grid.y(), y2);
  auto at = [&](int dx, int d1, int d2) { return slice[grid.node(sx.lo + dx, s1.lo + d1, s2.lo + d2)]; };
  auto along_x = [&](int d1, int d2) { return std::lerp(at(0, d1, d2), at(1, d1, d2), sx.w); };
  const double lo2 = std::lerp(along_x(0, 0), along_x(1, 0), s1.w);
  const double hi2 = std::lerp(along_x(0, 1), along_x(1, 1), s1.w);
  return std::lerp(lo2, hi2, s2.w);
}

void write_field_csv(const std::string& path, const Grid& grid, const ValueField& v1, const ValueField& v2,
                     const PolicyField& p1, const PolicyField& p2) {
  auto out = fmt::output_file(path);
  out.print("t,x,y1,y2,v1,v2,action1,zeta1,action2,zeta2\n");
  auto action_cols = [&](const PolicyField& p, int k, std::size_t n) -> std::pair<const char*, double> {
    if (k >= p.slices()) return {"none", 0.0};
    const Action a = p.slice(k)[n];
    return {to_string(a.tag), a.tag == ActionTag::Intervene ? grid.zeta()[a.zeta_index] : 0.0};
  };
  for (int k = 0; k <= grid.steps(); ++k) {
    const auto s1 = v1.slice(k);
    const auto s2 = v2.slice(k);
    for (std::size_t n = 0; n < grid.nodes_per_slice(); ++n) {
      const auto [ix, i1, i2] = grid.unravel(n);
      const auto [tag1, z1] = action_cols(p1, k, n);
      const auto [tag2, z2] = action_cols(p2, k, n);
      out.print("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{},{:.17g},{},{:.17g}\n", grid.time(k),
                grid.x()[ix], grid.y()[i1], grid.y()[i2], s1[n], s2[n], tag1, z1, tag2, z2);
    }
  }
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cols;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cols.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cols;
}

int zeta_index_of(const Grid& grid, double zeta) {
  const auto& z = grid.zeta();
  int best = 0;
  for (int m = 1; m < static_cast<int>(z.size()); ++m) {
    if (std::abs(z[m] - zeta) < std::abs(z[best] - zeta)) best = m;
  }
  return best;
}

}  // namespace

FieldArtifacts read_field_csv(const std::string& path, const Grid& grid) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open field file " + path);
  std::string line;
  if (!std::getline(in, line) || line != "t,x,y1,y2,v1,v2,action1,zeta1,action2,zeta2") {
    throw std::runtime_error("field file " + path + " has an unexpected header");
  }
  FieldArtifacts out{ValueField(grid), ValueField(grid), PolicyField(grid), PolicyField(grid)};
  const std::size_t per_slice = grid.nodes_per_slice();
  const std::size_t expected = per_slice * (grid.steps() + 1);
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (row >= expected) throw std::runtime_error("field file " + path + " has more rows than the grid");
    const auto cols = split_csv(line);
    if (cols.size() != 10) throw std::runtime_error(fmt::format("field file {}: row {} malformed", path, row + 2));
    const int k = static_cast<int>(row / per_slice);
    const std::size_t n = row % per_slice;
    const auto [ix, i1, i2] = grid.unravel(n);
    const double x = std::strtod(cols[1].c_str(), nullptr);
    const double y1 = std::strtod(cols[2].c_str(), nullptr);
    const double y2 = std::strtod(cols[3].c_str(), nullptr);
    if (std::abs(x - grid.x()[ix]) > 1e-9 || std::abs(y1 - grid.y()[i1]) > 1e-9 ||
        std::abs(y2 - grid.y()[i2]) > 1e-9) {
      throw std::runtime_error(fmt::format("field file {}: row {} does not match the grid", path, row + 2));
    }
    out.v1.slice(k)[n] = std::strtod(cols[4].c_str(), nullptr);
    out.v2.slice(k)[n] = std::strtod(cols[5].c_str(), nullptr);
    if (k < grid.steps()) {
      auto parse = [&](const std::string& tag, const std::string& zeta) {
        Action a{action_tag_from_string(tag), -1};
        if (a.tag == ActionTag::Intervene) a.zeta_index = zeta_index_of(grid, std::strtod(zeta.c_str(), nullptr));
        return a;
      };
      out.p1.slice(k)[n] = parse(cols[6], cols[7]);
      out.p2.slice(k)[n] = parse(cols[8], cols[9]);
    }
    ++row;
  }
  if (row != expected) {
    throw std::runtime_error(fmt::format("field file {} has {} rows, grid needs {}", path, row, expected));
  }
  return out;
}

}  // namespace impulse_game
