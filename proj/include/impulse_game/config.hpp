#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "impulse_game/grid.hpp"
#include "impulse_game/model.hpp"
#include "impulse_game/quantizer.hpp"
#include "impulse_game/simulator.hpp"
#include "impulse_game/solver.hpp"

namespace impulse_game {

/// Everything a run needs. Parsed from a flat `key = value` file.
struct RunConfig {
  ModelParams model;
  GridSpec grid;
  SolverConfig solver;
  int quantizer_n = 50;
  double quantizer_tol = 1e-10;
  int quantizer_max_iter = 10'000;
  /// Optional `level,weight` CSV used instead of building the grid.
  std::string quantizer_file;
  InitialState initial;
};

/// Parses `key = value` lines; `#` starts a comment. Unknown keys, duplicate
/// keys and malformed values raise ConfigError naming the key. k1/k2 accept
/// "none". Missing keys keep their defaults.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::filesystem::path& path);

/// Checks model, grid, solver, quantizer and initial-state settings.
void validate(const RunConfig& cfg);

/// Every key with its resolved value, in a stable order, parseable by parse_config.
std::string format_config(const RunConfig& cfg);

/// Reads `quantizer_file` when set (relative paths resolve against `base_dir`),
/// otherwise builds the Gaussian quantizer.
Quantizer make_quantizer(const RunConfig& cfg, const std::filesystem::path& base_dir = {});

}  // namespace impulse_game
