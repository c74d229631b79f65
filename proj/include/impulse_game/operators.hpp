#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "impulse_game/grid.hpp"
#include "impulse_game/model.hpp"

namespace impulse_game {

// Intervention operators on one time slice of a value field.
//
// Off-grid values are read through the clamped trilinear interpolant. Every
// argmax over the impulse grid breaks ties by smallest |zeta|, then smaller
// zeta. The opponent's impulse zeta^j is computed once per node at the
// pre-intervention state and held fixed inside M^i H^i, under which
// M^i H^i v = H^i M^i v holds node by node.

/// Maximal value and a maximizing impulse index, per node.
struct ImpulseField {
  std::vector<double> value;
  std::vector<int> argmax;
};

/// M^i v: best post-impulse value of `player` net of its intervention cost.
ImpulseField apply_M(Player player, std::span<const double> v_own, const Grid& grid, const ModelParams& params);

/// zeta^j per node: the argmax of player j's own M^j over its value slice.
std::vector<int> best_response_impulse(Player player_j, std::span<const double> v_opp, const Grid& grid,
                                       const ModelParams& params);

/// H^i v: `player_i`'s value after the opponent jumps by zeta_j, minus kappa.
std::vector<double> apply_H(Player player_i, std::span<const double> v_own, std::span<const int> zeta_j,
                            const Grid& grid, const ModelParams& params);

/// M^i H^i v with zeta_j frozen per node; argmax is player i's impulse.
ImpulseField apply_MH(Player player_i, std::span<const double> v_own, std::span<const int> zeta_j,
                      const Grid& grid, const ModelParams& params);

/// 1 where M^l v_l - v_l < -r (player l keeps waiting), 0 elsewhere.
std::vector<std::uint8_t> intervention_mask(Player player_l, std::span<const double> v_l, double r,
                                            const Grid& grid, const ModelParams& params);

// Pointwise forms acting on an arbitrary function of the state. They define
// the operators independently of the node-stencil fast paths above.

using StateFunction = std::function<double(double x, double y1, double y2)>;

struct ImpulseChoice {
  double value = 0.0;
  int zeta_index = 0;
};

ImpulseChoice evaluate_M(Player player, const StateFunction& f, double x, double y1, double y2, const Grid& grid,
                         const ModelParams& params);

double evaluate_H(Player player_i, const StateFunction& f, double x, double y1, double y2, int zeta_j_index,
                  const Grid& grid, const ModelParams& params);

}  // namespace impulse_game
