#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace impulse_game::cli {

struct SimulateOptions {
  std::filesystem::path dir = "out";
  std::filesystem::path out;  // defaults to dir / "sim"
  std::size_t paths = 1;
  std::uint64_t seed = 1;
  std::optional<double> x0, y1_0, y2_0;
  double tol = 1.0;
};

// Each command returns a process exit status and reports to `log`.
int cmd_solve(const std::filesystem::path& config, const std::filesystem::path& out_dir, std::ostream& log);
int cmd_policy_slice(const std::filesystem::path& dir, double t, double x, const std::string& out_file,
                     std::ostream& log);
int cmd_simulate(const SimulateOptions& opts, std::ostream& log);
int cmd_check(const std::filesystem::path& config, std::ostream& log);

/// Parses argv and dispatches to a command.
int run(int argc, char** argv);

}  // namespace impulse_game::cli
