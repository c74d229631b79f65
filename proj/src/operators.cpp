#include "impulse_game/operators.hpp"

#include <cmath>

#include "impulse_game/parallel.hpp"

namespace impulse_game {

namespace {

// Stencils of Gamma(y_a, zeta_m) on the price axis, indexed [a * n_zeta + m].
std::vector<Stencil> impulse_stencils(const Grid& grid, const ModelParams& params) {
  const auto& zeta = grid.zeta();
  std::vector<Stencil> out(static_cast<std::size_t>(grid.ny()) * zeta.size());
  for (int a = 0; a < grid.ny(); ++a) {
    for (std::size_t m = 0; m < zeta.size(); ++m) {
      out[a * zeta.size() + m] = locate(grid.y(), impulse_map(grid.y()[a], zeta[m], params.lambda));
    }
  }
  return out;
}

// Node addressing in (own price, opponent price) coordinates.
struct PlayerView {
  std::size_t own_stride;
  std::size_t opp_stride;
  std::size_t block;

  PlayerView(const Grid& grid, bool one)
      : own_stride(one ? grid.ny() : 1), opp_stride(one ? 1 : grid.ny()),
        block(static_cast<std::size_t>(grid.ny()) * grid.ny()) {}

  std::size_t node(int ix, int own, int opp) const { return ix * block + own * own_stride + opp * opp_stride; }
};

template <typename NodeBody>
void for_each_node(const Grid& grid, NodeBody&& body) {
  parallel_for(static_cast<std::size_t>(grid.nx()), [&](std::size_t ix) {
    for (int own = 0; own < grid.ny(); ++own) {
      for (int opp = 0; opp < grid.ny(); ++opp) body(static_cast<int>(ix), own, opp);
    }
  });
}

}  // namespace

ImpulseField apply_M(Player player, std::span<const double> v_own, const Grid& grid, const ModelParams& params) {
  const auto stencils = impulse_stencils(grid, params);
  const std::size_t nz = grid.zeta().size();
  const PlayerView view(grid, player == Player::One);
  ImpulseField out{std::vector<double>(grid.nodes_per_slice()), std::vector<int>(grid.nodes_per_slice())};

  for_each_node(grid, [&](int ix, int own, int opp) {
    const double y = grid.y()[own];
    const double* line = v_own.data() + view.node(ix, 0, opp);
    double best = -INFINITY;
    int best_m = grid.zero_zeta_index();
    for (int m : grid.zeta_priority()) {
      const Stencil s = stencils[own * nz + m];
      const double* lo = line + s.lo * view.own_stride;
      const double value =
          std::lerp(lo[0], lo[view.own_stride], s.w) - intervention_cost(player, y, grid.zeta()[m], params);
      if (value > best) {
        best = value;
        best_m = m;
      }
    }
    const std::size_t n = view.node(ix, own, opp);
    out.value[n] = best;
    out.argmax[n] = best_m;
  });
  return out;
}

std::vector<int> best_response_impulse(Player player_j, std::span<const double> v_opp, const Grid& grid,
                                       const ModelParams& params) {
  return apply_M(player_j, v_opp, grid, params).argmax;
}

std::vector<double> apply_H(Player player_i, std::span<const double> v_own, std::span<const int> zeta_j,
                            const Grid& grid, const ModelParams& params) {
  const auto stencils = impulse_stencils(grid, params);
  const std::size_t nz = grid.zeta().size();
  const PlayerView view(grid, player_i == Player::One);
  std::vector<double> out(grid.nodes_per_slice());

  for_each_node(grid, [&](int ix, int own, int opp) {
    const std::size_t n = view.node(ix, own, opp);
    const Stencil s = stencils[opp * nz + zeta_j[n]];
    out[n] = std::lerp(v_own[view.node(ix, own, s.lo)], v_own[view.node(ix, own, s.lo + 1)], s.w) - params.kappa;
  });
  return out;
}

ImpulseField apply_MH(Player player_i, std::span<const double> v_own, std::span<const int> zeta_j,
                      const Grid& grid, const ModelParams& params) {
  const auto stencils = impulse_stencils(grid, params);
  const std::size_t nz = grid.zeta().size();
  const PlayerView view(grid, player_i == Player::One);
  ImpulseField out{std::vector<double>(grid.nodes_per_slice()), std::vector<int>(grid.nodes_per_slice())};

  for_each_node(grid, [&](int ix, int own, int opp) {
    const std::size_t n = view.node(ix, own, opp);
    const Stencil sj = stencils[opp * nz + zeta_j[n]];
    const double y = grid.y()[own];
    double best = -INFINITY;
    int best_m = grid.zero_zeta_index();
    for (int m : grid.zeta_priority()) {
      const Stencil si = stencils[own * nz + m];
      auto along_own = [&](int b) {
        return std::lerp(v_own[view.node(ix, si.lo, b)], v_own[view.node(ix, si.lo + 1, b)], si.w);
      };
      const double value = std::lerp(along_own(sj.lo), along_own(sj.lo + 1), sj.w) -
                           intervention_cost(player_i, y, grid.zeta()[m], params) - params.kappa;
      if (value > best) {
        best = value;
        best_m = m;
      }
    }
    out.value[n] = best;
    out.argmax[n] = best_m;
  });
  return out;
}

std::vector<std::uint8_t> intervention_mask(Player player_l, std::span<const double> v_l, double r,
                                            const Grid& grid, const ModelParams& params) {
  const ImpulseField m = apply_M(player_l, v_l, grid, params);
  std::vector<std::uint8_t> mask(v_l.size());
  for (std::size_t n = 0; n < v_l.size(); ++n) mask[n] = (m.value[n] - v_l[n] < -r) ? 1 : 0;
  return mask;
}

ImpulseChoice evaluate_M(Player player, const StateFunction& f, double x, double y1, double y2, const Grid& grid,
                         const ModelParams& params) {
  const bool one = player == Player::One;
  const double y_own = one ? y1 : y2;
  ImpulseChoice best{-INFINITY, grid.zero_zeta_index()};
  for (int m : grid.zeta_priority()) {
    const double jumped = impulse_map(y_own, grid.zeta()[m], params.lambda);
    const double value = (one ? f(x, jumped, y2) : f(x, y1, jumped)) -
                         intervention_cost(player, y_own, grid.zeta()[m], params);
    if (value > best.value) best = {value, m};
  }
  return best;
}

double evaluate_H(Player player_i, const StateFunction& f, double x, double y1, double y2, int zeta_j_index,
                  const Grid& grid, const ModelParams& params) {
  const double zeta = grid.zeta()[zeta_j_index];
  if (player_i == Player::One) return f(x, y1, impulse_map(y2, zeta, params.lambda)) - params.kappa;
  return f(x, impulse_map(y1, zeta, params.lambda), y2) - params.kappa;
}

}  // namespace impulse_game
