#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "impulse_game/grid.hpp"
#include "impulse_game/model.hpp"
#include "impulse_game/quantizer.hpp"

namespace impulse_game {

/// Tolerances and relaxation schedule of the nested policy iteration.
struct SolverConfig {
  double epsilon = 1e-4;
  int n_max = 100;
  double alpha = 0.5;
  double r0 = 1.0;
  double inner_epsilon = 1e-5;
  int inner_n_max = 200;
};

void validate(const SolverConfig& cfg);

struct SolveReport {
  std::vector<double> residual_history;
  std::vector<double> relaxation_history;
  int iterations_used = 0;
  bool converged = false;
  double wall_time = 0.0;
  /// Relaxation threshold r^n that defined the continuation masks of the last sweep.
  double final_threshold = 0.0;
  /// Largest M^i v^i - v^i over all nodes after the last sweep (0 when the
  /// intervention constraint holds everywhere).
  double max_constraint_violation = 0.0;
  /// Inner sweeps used per outer iteration and player.
  std::vector<int> inner_iterations;
};

/// JSON text with keys residual_history, relaxation_history, iterations_used,
/// converged, wall_time, final_threshold, max_constraint_violation, inner_iterations.
std::string to_json(const SolveReport& report);

/// Quantized conditional expectation E[v(t_{k+1}, X_{t_{k+1}}, y1, y2) | X_{t_k} = x_j].
///
/// The successors x_j exp((mu - sigma^2/2) h + sigma sqrt(h) u_l) are located on
/// the (clamped) x axis once, so applying the operator is an n_x by n_x matrix
/// product per (y1, y2) column.
class ExpectationOperator {
 public:
  ExpectationOperator(const Grid& grid, const Quantizer& q, const ModelParams& params);

  /// out[node] = discount * sum_l P_l v_next(successor_l(x), y1, y2).
  void apply(std::span<const double> v_next, std::span<double> out, double discount) const;

  /// Row of transition weights for x node j.
  std::span<const double> row(int j) const { return {matrix_.data() + j * n_, static_cast<std::size_t>(n_)}; }

 private:
  const Grid* grid_;
  int n_;
  std::vector<double> matrix_;
};

struct StepResult {
  std::vector<double> value;
  std::vector<double> continuation;
  /// Wait where the continuation wins, Intervene where the obstacle does.
  std::vector<ActionTag> action;
};

/// One backward step of the quantized scheme at t_k:
///   continuation = e^{-rho h} E_q[v_next] + h f^i(node),
///   value = max(continuation, obstacle).
/// An empty obstacle disables the intervention branch.
StepResult backward_step(Player player, std::span<const double> v_next, std::span<const double> obstacle,
                         const Grid& grid, const Quantizer& q, const ModelParams& params);
StepResult backward_step(Player player, std::span<const double> v_next, std::span<const double> obstacle,
                         const Grid& grid, const ExpectationOperator& expectation, const ModelParams& params);

/// What the single-player solve sees of its opponent: where the opponent keeps
/// waiting (mask 1) and, elsewhere, the value the player gets from enduring
/// (or answering) the opponent's intervention.
struct OpponentContext {
  std::vector<std::vector<std::uint8_t>> continuation_mask;  // [k][node], k < M
  std::vector<std::vector<double>> endured;                   // [k][node], read where mask is 0
};

/// Opponent that never intervenes.
OpponentContext passive_opponent(const Grid& grid);

struct PlayerSolution {
  ValueField value;
  PolicyField policy;
  SolveReport report;
};

/// Policy iteration for one player's QVI with the opponent frozen.
///
/// Each sweep runs backward from g^i with the intervention obstacle M^i taken
/// from the previous sweep; nodes where the opponent intervenes take
/// max(endured, M^i v). Stops when the sup-norm change is at most
/// cfg.inner_epsilon or after cfg.inner_n_max sweeps. `initial` seeds the
/// first obstacle; the terminal payoff is used when it is null.
PlayerSolution solve_single_player(Player player, const OpponentContext& opponent, const Grid& grid,
                                   const Quantizer& q, const ModelParams& params, const SolverConfig& cfg,
                                   const ValueField* initial = nullptr);

struct SystemSolution {
  std::array<ValueField, 2> value;
  std::array<PolicyField, 2> policy;
  SolveReport report;

  const ValueField& v(Player p) const { return value[player_index(p)]; }
  const PolicyField& pi(Player p) const { return policy[player_index(p)]; }
};

/// Policy iteration for the coupled two-player system. Each outer iteration
/// rebuilds both players' values from the previous iterate (Jacobi order):
/// outside the opponent's relaxed continuation region C = {M^l v^l - v^l < -r}
/// the value is max(M^i H^i v^i, H^i v^i); inside it the single-player solve
/// runs. The threshold follows r <- max(alpha R, epsilon).
SystemSolution solve_system(const Grid& grid, const Quantizer& q, const ModelParams& params,
                            const SolverConfig& cfg);

/// solve_system with H^i charging the endured-intervention cost `kappa`.
SystemSolution solve_kappa(double kappa, const Grid& grid, const Quantizer& q, const ModelParams& params,
                           const SolverConfig& cfg);

/// Expected discounted payoff when neither player ever intervenes.
ValueField no_impulse_value(Player player, const Grid& grid, const Quantizer& q, const ModelParams& params);

/// Closed-form value on the corner line y1 = y2 = 0.
double corner_line_value(double t, double x, const ModelParams& params, Player player);

/// Nash policies read off converged values: a player intervenes where
/// M^i v^i - v^i >= -threshold, endures where only the opponent does, and
/// waits elsewhere. When both intervene, each impulse is the argmax of M^i H^i.
std::array<PolicyField, 2> derive_policies(const std::array<ValueField, 2>& values, double threshold,
                                           const Grid& grid, const ModelParams& params);

/// Residuals of the discretized QVI system at a candidate solution.
struct QviResidual {
  /// max over nodes of M^i v^i - v^i (positive part).
  double obstacle_violation = 0.0;
  /// max |v - active branch| where the opponent waits: max(continuation, M v).
  double continuation_residual = 0.0;
  /// max |v - max(M H v, H v, M v)| where the opponent intervenes.
  double endured_residual = 0.0;
  std::size_t continuation_nodes = 0;
  std::size_t endured_nodes = 0;
};

QviResidual qvi_residual(Player player, const SystemSolution& solution, const Grid& grid, const Quantizer& q,
                         const ModelParams& params);

}  // namespace impulse_game
