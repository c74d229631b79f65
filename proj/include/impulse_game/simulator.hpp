#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "impulse_game/grid.hpp"
#include "impulse_game/model.hpp"

namespace impulse_game {

struct InitialState {
  double x = 30.0;
  double y1 = 40.0;
  double y2 = 35.0;
};

struct Intervention {
  double t = 0.0;
  Player player = Player::One;
  double zeta = 0.0;
  double cost = 0.0;
};

/// One simulated trajectory. Prices are recorded before the interventions of
/// the same date, so y only changes between consecutive rows.
struct PathRecord {
  std::vector<double> times;
  std::vector<double> x;
  std::vector<double> y1;
  std::vector<double> y2;
  std::vector<Intervention> interventions;
  /// Discounted running and terminal payoffs net of intervention (and endured) costs.
  std::array<double, 2> realized_payoffs{};
};

/// Rolls the controlled state forward on the solver's time grid. Both players
/// read their action at the grid node nearest to the pre-intervention state
/// (clamped to the box); player 1's impulse is applied first.
PathRecord simulate_path(const std::array<PolicyField, 2>& policies, const InitialState& initial, std::uint64_t seed,
                         const Grid& grid, const ModelParams& params);

struct EnsembleSummary {
  std::size_t n_paths = 0;
  std::vector<double> times;
  std::array<std::vector<double>, 3> mean;  // x, y1, y2 per date
  std::array<std::vector<double>, 3> se;
  std::vector<double> mean_abs_spread;  // E|Y1 - Y2| per date
  std::array<double, 2> payoff_mean{};
  std::array<double, 2> payoff_se{};
  std::array<double, 2> interventions_mean{};
  std::array<std::size_t, 2> interventions_max{};
};

/// Independent paths seeded base_seed + index; merged in index order.
EnsembleSummary simulate_ensemble(std::size_t n_paths, const std::array<PolicyField, 2>& policies,
                                  const InitialState& initial, std::uint64_t base_seed, const Grid& grid,
                                  const ModelParams& params);

struct PayoffCheck {
  std::array<double, 2> value{};
  std::array<double, 2> realized{};
  std::array<double, 2> se{};
  std::array<bool, 2> pass{};
  bool ok() const { return pass[0] && pass[1]; }
};

/// Compares mean realized payoffs with v^i(0, initial); a player passes when
/// |realized - value| <= tol + 3 se.
PayoffCheck realized_vs_value_check(const EnsembleSummary& summary, const std::array<ValueField, 2>& values,
                                    const InitialState& initial, double tol, const Grid& grid);

void write_path_csv(const std::string& path, const PathRecord& record);
void write_interventions_csv(const std::string& path, const PathRecord& record);
/// Columns t,x,y1,y2 holding either the means or their standard errors.
void write_ensemble_csv(const std::string& path, const EnsembleSummary& summary, bool standard_errors = false);

}  // namespace impulse_game
