#include "commands.hpp"

#include <CLI11.hpp>
#include <fmt/ostream.h>
#include <fstream>
#include <iostream>

#include "impulse_game/artifacts.hpp"
#include "impulse_game/checks.hpp"
#include "impulse_game/config.hpp"
#include "impulse_game/simulator.hpp"
#include "impulse_game/solver.hpp"

namespace impulse_game::cli {

namespace fs = std::filesystem;

namespace {

template <typename Fn>
int guarded(std::ostream& log, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    fmt::print(log, "error: invalid setting '{}': {}\n", e.key(), e.what());
    return 2;
  } catch (const std::exception& e) {
    fmt::print(log, "error: {}\n", e.what());
    return 1;
  }
}

}  // namespace

int cmd_solve(const fs::path& config, const fs::path& out_dir, std::ostream& log) {
  return guarded(log, [&] {
    const RunConfig cfg = load_config(config);
    validate(cfg);
    const Grid grid(cfg.grid, cfg.model);
    const Quantizer q = make_quantizer(cfg, config.parent_path());
    const SystemSolution sol = cfg.model.kappa > 0.0 ? solve_kappa(cfg.model.kappa, grid, q, cfg.model, cfg.solver)
                                                     : solve_system(grid, q, cfg.model, cfg.solver);
    write_solve_artifacts(out_dir, cfg, grid, q, sol);
    const auto& r = sol.report;
    fmt::print(log, "solve: {} after {} iterations, last residual {:.6g}, {:.1f} s; wrote {}\n",
               r.converged ? "converged" : "NOT converged", r.iterations_used,
               r.residual_history.empty() ? 0.0 : r.residual_history.back(), r.wall_time, out_dir.string());
    return 0;
  });
}

int cmd_policy_slice(const fs::path& dir, double t, double x, const std::string& out_file, std::ostream& log) {
  return guarded(log, [&] {
    const LoadedRun run = load_solve_artifacts(dir);
    if (out_file.empty() || out_file == "-") {
      write_policy_slice(std::cout, run.grid, run.fields, t, x);
    } else {
      std::ofstream out(out_file);
      if (!out) throw std::runtime_error("cannot write " + out_file);
      write_policy_slice(out, run.grid, run.fields, t, x);
    }
    return 0;
  });
}

int cmd_simulate(const SimulateOptions& opts, std::ostream& log) {
  return guarded(log, [&] {
    const LoadedRun run = load_solve_artifacts(opts.dir);
    InitialState init = run.config.initial;
    if (opts.x0) init.x = *opts.x0;
    if (opts.y1_0) init.y1 = *opts.y1_0;
    if (opts.y2_0) init.y2 = *opts.y2_0;
    if (opts.paths < 1) throw ConfigError("paths", "need at least one path");
    const auto policies = run.policies();
    const fs::path out = opts.out.empty() ? opts.dir / "sim" : opts.out;
    const PathRecord first = simulate_path(policies, init, opts.seed, run.grid, run.config.model);
    std::optional<EnsembleSummary> ensemble;
    std::optional<PayoffCheck> check;
    if (opts.paths > 1) {
      ensemble = simulate_ensemble(opts.paths, policies, init, opts.seed, run.grid, run.config.model);
      check = realized_vs_value_check(*ensemble, run.values(), init, opts.tol, run.grid);
    }
    write_simulation_artifacts(out, first, ensemble, check);
    fmt::print(log, "simulate: {} path(s) from ({}, {}, {}), seed {}; wrote {}\n", opts.paths, init.x, init.y1,
               init.y2, opts.seed, out.string());
    if (check) {
      for (int i = 0; i < 2; ++i) {
        fmt::print(log, "  player {}: realized {:.4f} +- {:.4f}, value {:.4f} [{}]\n", i + 1, check->realized[i],
                   check->se[i], check->value[i], check->pass[i] ? "consistent" : "MISMATCH");
      }
    }
    return 0;
  });
}

int cmd_check(const fs::path& config, std::ostream& log) {
  return guarded(log, [&] {
    const RunConfig cfg = load_config(config);
    validate(cfg);
    bool ok = true;
    for (const auto& c : run_checks(cfg, config.parent_path())) {
      fmt::print(log, "[{}] {}: {}\n", c.pass ? "PASS" : "FAIL", c.name, c.detail);
      ok = ok && c.pass;
    }
    return ok ? 0 : 1;
  });
}

int run(int argc, char** argv) {
  CLI::App app{"Retail price competition as a stochastic impulse game"};
  app.require_subcommand(1);

  fs::path config, out_dir = "out";
  auto* solve = app.add_subcommand("solve", "Solve the game and write value/policy artifacts");
  solve->add_option("--config", config, "Configuration file")->required();
  solve->add_option("--out", out_dir, "Output directory")->capture_default_str();

  double t = 0.0, x = 0.0;
  fs::path dir = "out";
  std::string slice_out;
  auto* slice = app.add_subcommand("policy-slice", "Print the (y1, y2) policy plane at a date and wholesale price");
  slice->add_option("--t", t, "Date")->required();
  slice->add_option("--x", x, "Wholesale price")->required();
  slice->add_option("--dir", dir, "Solve output directory")->capture_default_str();
  slice->add_option("--out", slice_out, "CSV file (default: stdout)");

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Simulate paths under the solved policies");
  simulate->add_option("--paths", sim.paths, "Number of paths")->capture_default_str();
  simulate->add_option("--seed", sim.seed, "Base seed")->capture_default_str();
  simulate->add_option("--dir", sim.dir, "Solve output directory")->capture_default_str();
  simulate->add_option("--out", sim.out, "Output directory (default: DIR/sim)");
  simulate->add_option("--x0", sim.x0, "Initial wholesale price (default: from config)");
  simulate->add_option("--y1", sim.y1_0, "Initial price of player 1 (default: from config)");
  simulate->add_option("--y2", sim.y2_0, "Initial price of player 2 (default: from config)");
  simulate->add_option("--tol", sim.tol, "Tolerance of the realized-vs-value check")->capture_default_str();

  fs::path check_config;
  auto* check = app.add_subcommand("check", "Run the invariant battery");
  check->add_option("--config", check_config, "Configuration file")->required();

  CLI11_PARSE(app, argc, argv);

  if (*solve) return cmd_solve(config, out_dir, std::cerr);
  if (*slice) return cmd_policy_slice(dir, t, x, slice_out, std::cerr);
  if (*simulate) return cmd_simulate(sim, std::cerr);
  return cmd_check(check_config, std::cout);
}

}  // namespace impulse_game::cli
