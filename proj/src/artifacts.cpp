#include "impulse_game/artifacts.hpp"

#include <cmath>
#include <fmt/os.h>
#include <fmt/ostream.h>
#include <fstream>
#include <json.hpp>
#include <ostream>

namespace impulse_game {

namespace fs = std::filesystem;

namespace {

constexpr const char* kReadme = R"(Files written by `solve`:

field.csv
  t,x,y1,y2,v1,v2,action1,zeta1,action2,zeta2
  One row per node and date, dates outer, then x, y1, y2.
  action is wait, intervene or endure; zeta is the impulse size when
  action is intervene and 0 otherwise. Rows at t = T carry action none.
report.json
  residual_history, relaxation_history, iterations_used, converged,
  wall_time, final_threshold, max_constraint_violation, inner_iterations
config.txt
  effective configuration; `solve --config config.txt` reproduces the run
quantizer.csv
  level,weight

Files written by `simulate`:

path.csv            t,x,y1,y2 (prices before the interventions of each date)
interventions.csv   t,player,zeta,cost
ensemble_mean.csv   t,x,y1,y2 means over paths
ensemble_se.csv     t,x,y1,y2 standard errors of those means
ensemble.json       payoff means, intervention counts, realized-vs-value check
)";

}  // namespace

void write_solve_artifacts(const fs::path& dir, const RunConfig& cfg, const Grid& grid, const Quantizer& q,
                           const SystemSolution& solution) {
  fs::create_directories(dir);
  write_field_csv((dir / "field.csv").string(), grid, solution.value[0], solution.value[1], solution.policy[0],
                  solution.policy[1]);
  {
    auto out = fmt::output_file((dir / "report.json").string());
    out.print("{}\n", to_json(solution.report));
  }
  write_quantizer_csv(q, dir / "quantizer.csv");
  RunConfig effective = cfg;
  effective.quantizer_file = "quantizer.csv";
  {
    auto out = fmt::output_file((dir / "config.txt").string());
    out.print("{}", format_config(effective));
  }
  {
    auto out = fmt::output_file((dir / "README.txt").string());
    out.print("{}", kReadme);
  }
}

LoadedRun load_solve_artifacts(const fs::path& dir) {
  const fs::path config = dir / "config.txt";
  if (!fs::exists(config)) throw std::runtime_error("no solve artifacts in " + dir.string() + " (config.txt missing)");
  RunConfig cfg = load_config(config);
  validate(cfg);
  Grid grid(cfg.grid, cfg.model);
  FieldArtifacts fields = read_field_csv((dir / "field.csv").string(), grid);
  return {std::move(cfg), std::move(grid), std::move(fields)};
}

int policy_slice_index(const Grid& grid, double t) {
  const double T = grid.h() * grid.steps();
  if (!(t >= 0.0) || t > T + 1e-12) throw ConfigError("t", fmt::format("{} lies outside [0, {}]", t, T));
  const double pos = t / grid.h();
  const long k = std::lround(pos);
  if (std::abs(pos - static_cast<double>(k)) > 1e-6) {
    throw ConfigError("t", fmt::format("{} is not a grid date (step {})", t, grid.h()));
  }
  if (k >= grid.steps()) throw ConfigError("t", "no policy at the terminal date");
  return static_cast<int>(k);
}

void write_policy_slice(std::ostream& out, const Grid& grid, const FieldArtifacts& fields, double t, double x) {
  const int k = policy_slice_index(grid, t);
  if (!(x >= grid.x().min() && x <= grid.x().max())) {
    throw ConfigError("x", fmt::format("{} lies outside [{}, {}]", x, grid.x().min(), grid.x().max()));
  }
  const int ix = grid.x().nearest(x);
  auto zeta_of = [&](const Action& a) { return a.tag == ActionTag::Intervene ? grid.zeta()[a.zeta_index] : 0.0; };
  fmt::print(out, "y1,y2,action1,zeta1,action2,zeta2\n");
  for (int i1 = 0; i1 < grid.ny(); ++i1) {
    for (int i2 = 0; i2 < grid.ny(); ++i2) {
      const std::size_t n = grid.node(ix, i1, i2);
      const Action a1 = fields.p1.slice(k)[n];
      const Action a2 = fields.p2.slice(k)[n];
      fmt::print(out, "{:.17g},{:.17g},{},{:.17g},{},{:.17g}\n", grid.y()[i1], grid.y()[i2], to_string(a1.tag),
                 zeta_of(a1), to_string(a2.tag), zeta_of(a2));
    }
  }
}

void write_simulation_artifacts(const fs::path& dir, const PathRecord& first,
                                const std::optional<EnsembleSummary>& ensemble,
                                const std::optional<PayoffCheck>& check) {
  fs::create_directories(dir);
  write_path_csv((dir / "path.csv").string(), first);
  write_interventions_csv((dir / "interventions.csv").string(), first);
  if (!ensemble) return;
  write_ensemble_csv((dir / "ensemble_mean.csv").string(), *ensemble);
  write_ensemble_csv((dir / "ensemble_se.csv").string(), *ensemble, true);

  nlohmann::ordered_json j;
  j["n_paths"] = ensemble->n_paths;
  j["payoff_mean"] = ensemble->payoff_mean;
  j["payoff_se"] = ensemble->payoff_se;
  j["interventions_mean"] = ensemble->interventions_mean;
  j["interventions_max"] = ensemble->interventions_max;
  j["mean_abs_spread"] = ensemble->mean_abs_spread;
  if (check) {
    j["value_at_start"] = check->value;
    j["value_check_pass"] = check->pass;
  }
  auto out = fmt::output_file((dir / "ensemble.json").string());
  out.print("{}\n", j.dump(2));
}

}  // namespace impulse_game
