#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "impulse_game/model.hpp"

namespace impulse_game {

/// Discretization of [0,T] x [x_min,x_max] x [y_min,y_max]^2 plus the impulse
/// grid. Both retail-price axes share the same bounds and node count.
struct GridSpec {
  int m_time = 20;
  int n_x = 20;
  int n_y = 20;
  double x_min = 10.0;
  double x_max = 90.0;
  double y_min = 10.0;
  double y_max = 90.0;
  int n_zeta = 9;
};

/// Uniform axis with clamped lookup.
class Axis {
 public:
  Axis() = default;
  Axis(double lo, double hi, int n);

  int size() const { return static_cast<int>(nodes_.size()); }
  double operator[](int i) const { return nodes_[i]; }
  double min() const { return nodes_.front(); }
  double max() const { return nodes_.back(); }
  double step() const { return step_; }
  const std::vector<double>& nodes() const { return nodes_; }

  double clamp(double v) const;
  /// Index of the nearest node after clamping.
  int nearest(double v) const;

 private:
  std::vector<double> nodes_;
  double step_ = 0.0;
};

/// Left node and weight of the right node for linear interpolation on an axis.
struct Stencil {
  int lo = 0;
  double w = 0.0;
};

/// Clamps `v` into the axis and returns its bracketing stencil. Exact at nodes
/// (weight 0 on the node's own index).
Stencil locate(const Axis& axis, double v);

class Grid {
 public:
  /// build_grid: validates the spec and lays out uniform axes with h = T/M.
  Grid(const GridSpec& spec, const ModelParams& params);

  const GridSpec& spec() const { return spec_; }
  int steps() const { return spec_.m_time; }
  double h() const { return h_; }
  double time(int k) const { return k * h_; }
  const Axis& x() const { return x_; }
  const Axis& y() const { return y_; }
  /// Impulse sizes: uniform on [zeta_min, zeta_max] with 0 inserted, sorted.
  const std::vector<double>& zeta() const { return zeta_; }
  /// Impulse indices ordered by tie-break priority: smallest |zeta|, then smaller zeta.
  const std::vector<int>& zeta_priority() const { return zeta_priority_; }
  int zero_zeta_index() const { return zero_zeta_index_; }

  int nx() const { return x_.size(); }
  int ny() const { return y_.size(); }
  std::size_t nodes_per_slice() const { return static_cast<std::size_t>(nx()) * ny() * ny(); }
  std::size_t node(int ix, int i1, int i2) const {
    return (static_cast<std::size_t>(ix) * ny() + i1) * ny() + i2;
  }
  struct NodeIndex {
    int ix, i1, i2;
  };
  NodeIndex unravel(std::size_t n) const;

 private:
  GridSpec spec_;
  double h_ = 0.0;
  Axis x_;
  Axis y_;
  std::vector<double> zeta_;
  std::vector<int> zeta_priority_;
  int zero_zeta_index_ = 0;
};

/// Dense value array v[k][ix][i1][i2] for k = 0..M.
class ValueField {
 public:
  ValueField() = default;
  explicit ValueField(const Grid& grid, double fill = 0.0);

  int slices() const { return slices_; }
  std::size_t slice_size() const { return slice_size_; }
  std::span<double> slice(int k) { return {data_.data() + k * slice_size_, slice_size_}; }
  std::span<const double> slice(int k) const { return {data_.data() + k * slice_size_, slice_size_}; }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  friend bool operator==(const ValueField&, const ValueField&) = default;

 private:
  int slices_ = 0;
  std::size_t slice_size_ = 0;
  std::vector<double> data_;
};

/// Terminal payoff replicated over every time slice.
ValueField terminal_field(Player player, const Grid& grid, const ModelParams& params);
/// Writes g^i at every node of one slice.
void fill_terminal(std::span<double> slice, Player player, const Grid& grid, const ModelParams& params);

enum class ActionTag : std::uint8_t { Wait, Intervene, Endure };

struct Action {
  ActionTag tag = ActionTag::Wait;
  int zeta_index = -1;  // valid only for Intervene

  friend bool operator==(const Action&, const Action&) = default;
};

const char* to_string(ActionTag tag);
ActionTag action_tag_from_string(const std::string& s);

/// Per-node actions for time steps k = 0..M-1 (no action at the terminal date).
class PolicyField {
 public:
  PolicyField() = default;
  explicit PolicyField(const Grid& grid);

  int slices() const { return slices_; }
  std::span<Action> slice(int k) { return {data_.data() + k * slice_size_, slice_size_}; }
  std::span<const Action> slice(int k) const { return {data_.data() + k * slice_size_, slice_size_}; }

  friend bool operator==(const PolicyField&, const PolicyField&) = default;

 private:
  int slices_ = 0;
  std::size_t slice_size_ = 0;
  std::vector<Action> data_;
};

/// Trilinear interpolation of a slice at (x, y1, y2) after clamping into the box.
double interp_value(const Grid& grid, std::span<const double> slice, double x, double y1, double y2);

/// Writes all slices as CSV with columns t,x,y1,y2,v1,v2,action1,zeta1,action2,zeta2.
/// Terminal rows carry action "none".
void write_field_csv(const std::string& path, const Grid& grid, const ValueField& v1, const ValueField& v2,
                     const PolicyField& p1, const PolicyField& p2);

struct FieldArtifacts {
  ValueField v1, v2;
  PolicyField p1, p2;
};
/// Inverse of write_field_csv for a grid built from the same spec.
FieldArtifacts read_field_csv(const std::string& path, const Grid& grid);

}  // namespace impulse_game
