#pragma once

// Straightforward reference implementations used as test oracles. They share
// no code with the library beyond the Grid accessors.

#include <algorithm>
#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "impulse_game/grid.hpp"
#include "impulse_game/model.hpp"

namespace oracle {

using namespace impulse_game;

inline double axis_pos(const Axis& a, double v) {
  v = std::min(std::max(v, a.min()), a.max());
  return (v - a.min()) / (a.max() - a.min()) * (a.size() - 1);
}

inline double trilinear(const Grid& g, std::span<const double> f, double x, double y1, double y2) {
  const double p[3] = {axis_pos(g.x(), x), axis_pos(g.y(), y1), axis_pos(g.y(), y2)};
  const int n[3] = {g.nx(), g.ny(), g.ny()};
  int lo[3];
  double w[3];
  for (int d = 0; d < 3; ++d) {
    lo[d] = std::min(static_cast<int>(std::floor(p[d] + 1e-12)), n[d] - 2);
    w[d] = p[d] - lo[d];
  }
  double s = 0.0;
  for (int c = 0; c < 8; ++c) {
    const int b[3] = {c & 1, (c >> 1) & 1, (c >> 2) & 1};
    double wt = 1.0;
    for (int d = 0; d < 3; ++d) wt *= b[d] ? w[d] : 1.0 - w[d];
    if (wt == 0.0) continue;
    s += wt * f[g.node(lo[0] + b[0], lo[1] + b[1], lo[2] + b[2])];
  }
  return s;
}

inline double gamma(double y, double zeta, double lambda) { return y * std::exp(lambda * zeta); }

struct Choice {
  double value;
  int index;
};

// Tie-break: first strictly larger value wins when scanning by |zeta| then zeta.
inline std::vector<int> priority(const Grid& g) {
  std::vector<int> order(g.zeta().size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double za = g.zeta()[a], zb = g.zeta()[b];
    return std::abs(za) != std::abs(zb) ? std::abs(za) < std::abs(zb) : za < zb;
  });
  return order;
}

// Player i's post-impulse value with the opponent price shifted by zeta_j (index, -1 for none).
inline Choice best_impulse(Player i, const Grid& g, std::span<const double> v, std::size_t node, int zeta_j,
                           const ModelParams& p, bool charge_kappa) {
  const auto [ix, i1, i2] = g.unravel(node);
  const double x = g.x()[ix];
  double y1 = g.y()[i1], y2 = g.y()[i2];
  const bool one = i == Player::One;
  double& yj = one ? y2 : y1;
  if (zeta_j >= 0) yj = gamma(yj, g.zeta()[zeta_j], p.lambda);
  Choice best{-INFINITY, -1};
  for (int m : priority(g)) {
    const double z = g.zeta()[m];
    const double a = one ? gamma(y1, z, p.lambda) : y1;
    const double b = one ? y2 : gamma(y2, z, p.lambda);
    const double val = trilinear(g, v, x, a, b) - p.phi(i) - (charge_kappa ? p.kappa : 0.0);
    if (val > best.value) best = {val, m};
  }
  return best;
}

inline double endured(Player i, const Grid& g, std::span<const double> v, std::size_t node, int zeta_j,
                      const ModelParams& p) {
  const auto [ix, i1, i2] = g.unravel(node);
  double y1 = g.y()[i1], y2 = g.y()[i2];
  double& yj = i == Player::One ? y2 : y1;
  yj = gamma(yj, g.zeta()[zeta_j], p.lambda);
  return trilinear(g, v, g.x()[ix], y1, y2) - p.kappa;
}

inline std::vector<double> random_field(const Grid& g, std::mt19937_64& rng, double scale = 10.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<double> f(g.nodes_per_slice());
  for (double& v : f) v = u(rng);
  return f;
}

}  // namespace oracle
