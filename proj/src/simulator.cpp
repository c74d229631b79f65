#include "impulse_game/simulator.hpp"

#include <cmath>
#include <fmt/os.h>
#include <random>

#include "impulse_game/parallel.hpp"

namespace impulse_game {

PathRecord simulate_path(const std::array<PolicyField, 2>& policies, const InitialState& initial, std::uint64_t seed,
                         const Grid& grid, const ModelParams& params) {
  if (initial.x < grid.x().min() || initial.x > grid.x().max()) throw ConfigError("x0", "initial state outside grid box");
  if (initial.y1 < grid.y().min() || initial.y1 > grid.y().max()) throw ConfigError("y1_0", "initial state outside grid box");
  if (initial.y2 < grid.y().min() || initial.y2 > grid.y().max()) throw ConfigError("y2_0", "initial state outside grid box");

  const int steps = grid.steps();
  const double h = grid.h();
  const double drift = (params.mu - 0.5 * params.sigma * params.sigma) * h;
  const double vol = params.sigma * std::sqrt(h);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;

  PathRecord rec;
  rec.times.reserve(steps + 1);
  rec.x.reserve(steps + 1);
  rec.y1.reserve(steps + 1);
  rec.y2.reserve(steps + 1);

  double x = initial.x;
  std::array<double, 2> y{initial.y1, initial.y2};
  for (int k = 0; k < steps; ++k) {
    const double t = grid.time(k);
    rec.times.push_back(t);
    rec.x.push_back(x);
    rec.y1.push_back(y[0]);
    rec.y2.push_back(y[1]);

    const std::size_t node = grid.node(grid.x().nearest(x), grid.y().nearest(y[0]), grid.y().nearest(y[1]));
    const std::array<Action, 2> acts{policies[0].slice(k)[node], policies[1].slice(k)[node]};
    for (Player p : kPlayers) {
      const int i = player_index(p);
      if (acts[i].tag != ActionTag::Intervene) continue;
      const double zeta = grid.zeta()[acts[i].zeta_index];
      const double cost = intervention_cost(p, y[i], zeta, params);
      rec.realized_payoffs[i] -= std::exp(-params.rho(p) * t) * cost;
      if (params.kappa != 0.0) {
        const Player q = opponent(p);
        rec.realized_payoffs[player_index(q)] -= std::exp(-params.rho(q) * t) * params.kappa;
      }
      rec.interventions.push_back({t, p, zeta, cost});
      y[i] = impulse_map(y[i], zeta, params.lambda);
    }
    for (Player p : kPlayers) {
      const int i = player_index(p);
      rec.realized_payoffs[i] += std::exp(-params.rho(p) * t) * h * running_payoff(p, x, y[i], y[1 - i], params);
    }
    x *= std::exp(drift + vol * normal(rng));
  }
  rec.times.push_back(params.T);
  rec.x.push_back(x);
  rec.y1.push_back(y[0]);
  rec.y2.push_back(y[1]);
  for (Player p : kPlayers) {
    const int i = player_index(p);
    rec.realized_payoffs[i] += std::exp(-params.rho(p) * params.T) * terminal_payoff(p, x, y[i], y[1 - i], params);
  }
  return rec;
}

EnsembleSummary simulate_ensemble(std::size_t n_paths, const std::array<PolicyField, 2>& policies,
                                  const InitialState& initial, std::uint64_t base_seed, const Grid& grid,
                                  const ModelParams& params) {
  if (n_paths < 1) throw ConfigError("paths", "need at least one path");
  std::vector<PathRecord> paths(n_paths);
  parallel_for(n_paths, [&](std::size_t i) { paths[i] = simulate_path(policies, initial, base_seed + i, grid, params); });

  EnsembleSummary s;
  s.n_paths = n_paths;
  s.times = paths.front().times;
  const std::size_t dates = s.times.size();
  const double n = static_cast<double>(n_paths);
  auto mean_se = [&](auto&& sample, double& mean, double& se) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n_paths; ++i) sum += sample(paths[i]);
    mean = sum / n;
    double ss = 0.0;
    for (std::size_t i = 0; i < n_paths; ++i) ss += std::pow(sample(paths[i]) - mean, 2);
    se = n_paths > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  };

  for (auto& v : s.mean) v.resize(dates);
  for (auto& v : s.se) v.resize(dates);
  s.mean_abs_spread.resize(dates);
  for (std::size_t k = 0; k < dates; ++k) {
    mean_se([k](const PathRecord& r) { return r.x[k]; }, s.mean[0][k], s.se[0][k]);
    mean_se([k](const PathRecord& r) { return r.y1[k]; }, s.mean[1][k], s.se[1][k]);
    mean_se([k](const PathRecord& r) { return r.y2[k]; }, s.mean[2][k], s.se[2][k]);
    double unused = 0.0;
    mean_se([k](const PathRecord& r) { return std::abs(r.y1[k] - r.y2[k]); }, s.mean_abs_spread[k], unused);
  }
  for (Player p : kPlayers) {
    const int i = player_index(p);
    mean_se([i](const PathRecord& r) { return r.realized_payoffs[i]; }, s.payoff_mean[i], s.payoff_se[i]);
    double total = 0.0;
    for (const auto& r : paths) {
      std::size_t count = 0;
      for (const auto& iv : r.interventions) count += iv.player == p;
      total += static_cast<double>(count);
      s.interventions_max[i] = std::max(s.interventions_max[i], count);
    }
    s.interventions_mean[i] = total / n;
  }
  return s;
}

PayoffCheck realized_vs_value_check(const EnsembleSummary& summary, const std::array<ValueField, 2>& values,
                                    const InitialState& initial, double tol, const Grid& grid) {
  PayoffCheck out;
  for (int i = 0; i < 2; ++i) {
    out.value[i] = interp_value(grid, values[i].slice(0), initial.x, initial.y1, initial.y2);
    out.realized[i] = summary.payoff_mean[i];
    out.se[i] = summary.payoff_se[i];
    out.pass[i] = std::abs(out.realized[i] - out.value[i]) <= tol + 3.0 * out.se[i];
  }
  return out;
}

void write_path_csv(const std::string& path, const PathRecord& record) {
  auto out = fmt::output_file(path);
  out.print("t,x,y1,y2\n");
  for (std::size_t k = 0; k < record.times.size(); ++k) {
    out.print("{:.17g},{:.17g},{:.17g},{:.17g}\n", record.times[k], record.x[k], record.y1[k], record.y2[k]);
  }
}

void write_interventions_csv(const std::string& path, const PathRecord& record) {
  auto out = fmt::output_file(path);
  out.print("t,player,zeta,cost\n");
  for (const auto& iv : record.interventions) {
    out.print("{:.17g},{},{:.17g},{:.17g}\n", iv.t, static_cast<int>(iv.player), iv.zeta, iv.cost);
  }
}

void write_ensemble_csv(const std::string& path, const EnsembleSummary& summary, bool standard_errors) {
  const auto& cols = standard_errors ? summary.se : summary.mean;
  auto out = fmt::output_file(path);
  out.print("t,x,y1,y2\n");
  for (std::size_t k = 0; k < summary.times.size(); ++k) {
    out.print("{:.17g},{:.17g},{:.17g},{:.17g}\n", summary.times[k], cols[0][k], cols[1][k], cols[2][k]);
  }
}

}  // namespace impulse_game
