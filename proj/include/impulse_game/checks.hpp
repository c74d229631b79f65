#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "impulse_game/config.hpp"

namespace impulse_game {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Fast invariant battery: quantizer moments, market-share symmetry,
/// commutation of M and H on random fields, corner-line closed form, and
/// terminal pinning on a one-step solve.
std::vector<CheckResult> run_checks(const RunConfig& cfg, const std::filesystem::path& base_dir = {});

}  // namespace impulse_game
