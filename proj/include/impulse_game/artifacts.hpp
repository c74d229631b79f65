#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "impulse_game/config.hpp"
#include "impulse_game/grid.hpp"
#include "impulse_game/simulator.hpp"
#include "impulse_game/solver.hpp"

namespace impulse_game {

// Layout of a solve directory:
//   field.csv      t,x,y1,y2,v1,v2,action1,zeta1,action2,zeta2
//   report.json    SolveReport
//   config.txt     effective configuration (reloads the same run)
//   quantizer.csv  level,weight
//   README.txt     column reference

void write_solve_artifacts(const std::filesystem::path& dir, const RunConfig& cfg, const Grid& grid,
                           const Quantizer& q, const SystemSolution& solution);

struct LoadedRun {
  RunConfig config;
  Grid grid;
  FieldArtifacts fields;

  std::array<PolicyField, 2> policies() const { return {fields.p1, fields.p2}; }
  std::array<ValueField, 2> values() const { return {fields.v1, fields.v2}; }
};

LoadedRun load_solve_artifacts(const std::filesystem::path& dir);

/// Time index of a policy date. Throws ConfigError("t") outside [0, T) or off the time grid.
int policy_slice_index(const Grid& grid, double t);

/// Rows y1,y2,action1,zeta1,action2,zeta2 of the (y1, y2) plane at date t and
/// the x node nearest to `x`. Throws ConfigError("x") when x leaves the grid.
void write_policy_slice(std::ostream& out, const Grid& grid, const FieldArtifacts& fields, double t, double x);

/// path.csv and interventions.csv for the first path; with more than one
/// path also ensemble_mean.csv, ensemble_se.csv and ensemble.json.
void write_simulation_artifacts(const std::filesystem::path& dir, const PathRecord& first,
                                const std::optional<EnsembleSummary>& ensemble,
                                const std::optional<PayoffCheck>& check);

}  // namespace impulse_game
