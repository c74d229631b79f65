// Acceptance run: evaluates criteria 1-11 and prints one PASS/FAIL line each.
//
// Usage: acceptance [--report FILE] [--strict] [--only N,M,...]
// Without --strict the exit status only reflects whether every criterion could
// be evaluated; with --strict any FAIL gives status 1.

#include <fmt/format.h>
#include <fmt/os.h>
#include <fmt/ranges.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include "commands.hpp"
#include "impulse_game/config.hpp"
#include "impulse_game/operators.hpp"
#include "impulse_game/quantizer.hpp"
#include "impulse_game/simulator.hpp"
#include "impulse_game/solver.hpp"

using namespace impulse_game;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double sup_diff(const ValueField& a, const ValueField& b) {
  double d = 0.0;
  for (std::size_t n = 0; n < a.data().size(); ++n) d = std::max(d, std::abs(a.data()[n] - b.data()[n]));
  return d;
}

// Simpson quadrature of the Gaussian density over each Voronoi cell.
double quadrature_second_moment(const Quantizer& q) {
  auto pdf = [](double u) { return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi); };
  double s = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double lo = i == 0 ? -12.0 : 0.5 * (q.points[i - 1] + q.points[i]);
    const double hi = i + 1 == q.size() ? 12.0 : 0.5 * (q.points[i] + q.points[i + 1]);
    const int n = 4000;
    const double h = (hi - lo) / n;
    double m = pdf(lo) + pdf(hi);
    for (int k = 1; k < n; ++k) m += pdf(lo + k * h) * (k % 2 ? 4.0 : 2.0);
    s += m * h / 3.0 * q.points[i] * q.points[i];
  }
  return s;
}

// Shared state: solves are expensive, so each configuration is solved once.
class Context {
 public:
  Context() : quantizer_(build_gaussian_quantizer(50)) {}

  const Quantizer& quantizer() const { return quantizer_; }

  static ModelParams base_params() { return ModelParams{}; }
  static GridSpec base_grid() { return GridSpec{}; }

  const SystemSolution& solve(const std::string& name, const ModelParams& p) {
    auto it = solutions_.find(name);
    if (it != solutions_.end()) return it->second;
    const auto t0 = std::chrono::steady_clock::now();
    const Grid grid(base_grid(), p);
    SystemSolution sol = solve_system(grid, quantizer_, p, SolverConfig{});
    std::cerr << fmt::format("  [{} solve: {} iterations, converged={}, last R={:.4g}, {:.1f} s]\n", name,
                             sol.report.iterations_used, sol.report.converged, sol.report.residual_history.back(),
                             seconds_since(t0));
    return solutions_.emplace(name, std::move(sol)).first->second;
  }

  const SystemSolution& default_solution() { return solve("default", base_params()); }

 private:
  Quantizer quantizer_;
  std::map<std::string, SystemSolution> solutions_;
};

Outcome criterion1(Context&) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::string> bad;
  std::map<int, Quantizer> qs;
  for (int n : {1, 2, 50}) {
    qs[n] = build_gaussian_quantizer(n);
    const auto m = quantizer_moments(qs[n]);
    if (std::abs(m.mass - 1.0) > 1e-12) bad.push_back(fmt::format("n={} mass {:.3e}", n, m.mass - 1.0));
    if (std::abs(m.mean) > 1e-12) bad.push_back(fmt::format("n={} mean {:.3e}", n, m.mean));
  }
  const double runtime = seconds_since(t0);
  const double c = std::sqrt(2.0 / std::numbers::pi);
  const double err2 = std::max(std::abs(qs[2].points[0] + c), std::abs(qs[2].points[1] - c));
  if (err2 > 1e-9) bad.push_back(fmt::format("n=2 point error {:.3e}", err2));
  const double oracle = quadrature_second_moment(qs[50]);
  const double reported = quantizer_moments(qs[50]).second_moment;
  if (!(oracle >= 0.99 && oracle <= 1.0) || std::abs(oracle - reported) > 1e-9) {
    bad.push_back(fmt::format("n=50 second moment {} (oracle {})", reported, oracle));
  }
  if (runtime >= 1.0) bad.push_back(fmt::format("runtime {:.2f} s", runtime));
  return {bad.empty(), fmt::format("n=2 point error {:.1e}; n=50 second moment {:.6f} (quadrature {:.6f}); "
                                   "build time {:.3f} s{}",
                                   err2, reported, oracle, runtime, bad.empty() ? "" : "; " + fmt::format("{}", fmt::join(bad, ", ")))};
}

Outcome criterion2(Context&) {
  ModelParams p;
  const double a = corner_line_value(0, 50, p, Player::One);
  const double b = corner_line_value(p.T, 50, p, Player::One);
  ModelParams near = p;
  near.mu = 1e-9;
  const double jump = std::abs(corner_line_value(0, 50, near, Player::One) - a);
  const bool pass = std::abs(a + 50.0) <= 1e-12 && std::abs(b + 25.0) <= 1e-12 && jump <= 1e-6;
  return {pass, fmt::format("v(0,50)={} v(T,50)={} branch jump {:.2e}", a, b, jump)};
}

Outcome criterion3(Context& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  ModelParams p;
  p.phi1 = p.phi2 = 1e6;
  const Grid grid(Context::base_grid(), p);
  const SystemSolution& sol = ctx.solve("prohibitive", p);
  double gap = 0.0;
  std::array<ValueField, 2> ref;
  for (Player pl : kPlayers) {
    ref[player_index(pl)] = no_impulse_value(pl, grid, ctx.quantizer(), p);
    gap = std::max(gap, sup_diff(sol.v(pl), ref[player_index(pl)]));
  }
  const InitialState start;
  const auto summary = simulate_ensemble(100000, sol.policy, start, 20240601, grid, p);
  const auto check = realized_vs_value_check(summary, sol.value, start, 0.0, grid);
  const double runtime = seconds_since(t0);
  // Diagnostic only: the same comparison started from the nearest grid node,
  // where no interpolation of v enters.
  const InitialState node{grid.x()[grid.x().nearest(start.x)], grid.y()[grid.y().nearest(start.y1)],
                          grid.y()[grid.y().nearest(start.y2)]};
  const auto at_node = realized_vs_value_check(simulate_ensemble(100000, sol.policy, node, 20240601, grid, p),
                                               sol.value, node, 0.0, grid);
  const bool pass = gap <= 1e-6 && check.ok() && runtime < 120.0;
  return {pass, fmt::format("field gap {:.2e}; MC player 1 {:.4f} +- {:.4f} vs v {:.4f}, player 2 {:.4f} +- {:.4f} "
                            "vs v {:.4f}; {:.1f} s; from nearest node: |MC - v| = {:.2f} se, {:.2f} se",
                            gap, check.realized[0], check.se[0], check.value[0], check.realized[1], check.se[1],
                            check.value[1], runtime, std::abs(at_node.realized[0] - at_node.value[0]) / at_node.se[0],
                            std::abs(at_node.realized[1] - at_node.value[1]) / at_node.se[1])};
}

Outcome criterion4(Context& ctx) {
  const ModelParams p = Context::base_params();
  const Grid grid(Context::base_grid(), p);
  const SystemSolution& sol = ctx.default_solution();
  double obstacle = 0.0, active = 0.0;
  for (Player pl : kPlayers) {
    const auto r = qvi_residual(pl, sol, grid, ctx.quantizer(), p);
    obstacle = std::max(obstacle, r.obstacle_violation);
    active = std::max({active, r.continuation_residual, r.endured_residual});
  }
  const auto& hist = sol.report.residual_history;
  const double best = *std::min_element(hist.begin(), hist.end());
  const bool pass = sol.report.converged && obstacle <= 1e-3 && active <= 1e-3;
  return {pass, fmt::format("converged={} after {} iterations; R last {:.4g}, min {:.4g} (target 1e-4); "
                            "max(Mv - v) {:.3g}; active-branch residual {:.3g}",
                            sol.report.converged, sol.report.iterations_used, hist.back(), best, obstacle, active)};
}

Outcome criterion5(Context&) {
  ModelParams p;
  p.kappa = 0.25;
  const Grid grid(Context::base_grid(), p);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  std::uniform_int_distribution<int> z(0, static_cast<int>(grid.zeta().size()) - 1);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> v(grid.nodes_per_slice());
    for (double& x : v) x = u(rng);
    std::vector<int> zj(v.size());
    for (int& x : zj) x = z(rng);
    const Player pl = trial % 2 ? Player::Two : Player::One;
    const auto mh = apply_MH(pl, v, zj, grid, p);
    StateFunction f = [&](double x, double a, double b) { return interp_value(grid, v, x, a, b); };
    StateFunction mf = [&](double x, double a, double b) { return evaluate_M(pl, f, x, a, b, grid, p).value; };
    for (std::size_t n = 0; n < v.size(); ++n) {
      const auto [ix, i1, i2] = grid.unravel(n);
      const double hm = evaluate_H(pl, mf, grid.x()[ix], grid.y()[i1], grid.y()[i2], zj[n], grid, p);
      worst = std::max(worst, std::abs(mh.value[n] - hm));
    }
  }
  return {worst <= 1e-9, fmt::format("max |MHv - HMv| over 100 fields = {:.2e}", worst)};
}

Outcome criterion6(Context& ctx) {
  const double kappas[] = {0.5, 0.25, 0.1, 0.0};
  std::vector<const SystemSolution*> sols;
  bool all_converged = true;
  for (double k : kappas) {
    ModelParams p;
    p.kappa = k;
    sols.push_back(k == 0.0 ? &ctx.default_solution() : &ctx.solve(fmt::format("kappa={}", k), p));
    all_converged = all_converged && sols.back()->report.converged;
  }
  std::size_t violations = 0, total = 0;
  double worst = 0.0;
  for (std::size_t s = 0; s + 1 < sols.size(); ++s) {
    for (int i = 0; i < 2; ++i) {
      const auto& hi = sols[s + 1]->value[i].data();
      const auto& lo = sols[s]->value[i].data();
      for (std::size_t n = 0; n < hi.size(); ++n) {
        ++total;
        if (lo[n] > hi[n]) {
          ++violations;
          worst = std::max(worst, lo[n] - hi[n]);
        }
      }
    }
  }
  auto gap = [&](int a) { return std::max(sup_diff(sols[a]->value[0], sols[3]->value[0]), sup_diff(sols[a]->value[1], sols[3]->value[1])); };
  const double g05 = gap(0), g01 = gap(2);
  const bool pass = violations == 0 && g01 < g05;
  return {pass, fmt::format("{} of {} ordered comparisons violated (worst {:.3g}); sup gap kappa=0.1 {:.4g} vs "
                            "kappa=0.5 {:.4g}; all solves converged={}",
                            violations, total, worst, g01, g05, all_converged)};
}

Outcome criterion7(Context& ctx) {
  ModelParams p;
  p.phi2 = p.phi1;
  const Grid grid(Context::base_grid(), p);
  const SystemSolution& sol = ctx.solve("symmetric", p);
  double worst = 0.0;
  for (int k = 0; k <= grid.steps(); ++k) {
    const auto a = sol.v(Player::One).slice(k);
    const auto b = sol.v(Player::Two).slice(k);
    for (std::size_t n = 0; n < a.size(); ++n) {
      const auto [ix, i1, i2] = grid.unravel(n);
      worst = std::max(worst, std::abs(a[n] - b[grid.node(ix, i2, i1)]));
    }
  }
  const bool pass = worst <= 1e-9 && sol.report.converged;
  return {pass, fmt::format("max |v1(t,x,a,b) - v2(t,x,b,a)| = {:.2e}; converged={} (R last {:.4g})", worst,
                            sol.report.converged, sol.report.residual_history.back())};
}

Outcome criterion8(Context& ctx) {
  ModelParams p;
  p.k1 = p.k2 = 1.0;
  const Grid grid(Context::base_grid(), p);
  const SystemSolution& sol = ctx.solve("cap", p);
  double worst = -INFINITY;
  std::string where;
  for (int i = 0; i < 2; ++i) {
    for (int k = 0; k <= grid.steps(); ++k) {
      const double tau = p.T - grid.time(k);
      const double factor = (std::abs(p.mu) < 1e-15 ? tau : std::expm1(p.mu * tau) / p.mu) + std::exp(p.mu * tau);
      const auto s = sol.value[i].slice(k);
      for (std::size_t n = 0; n < s.size(); ++n) {
        const auto [ix, i1, i2] = grid.unravel(n);
        const double excess = s[n] - grid.x()[ix] * factor;
        if (excess > worst) {
          worst = excess;
          where = fmt::format("player {} t={} x={} y1={:.4g} y2={:.4g}", i + 1, grid.time(k), grid.x()[ix],
                              grid.y()[i1], grid.y()[i2]);
        }
      }
    }
  }
  // Diagnostic only: the same bound for the localized chain, i.e. the quantized
  // value of the payoff K x with x clamped to the box like the solver does.
  const ExpectationOperator expectation(grid, ctx.quantizer(), p);
  std::vector<double> next(grid.nodes_per_slice()), cur(grid.nodes_per_slice());
  for (std::size_t n = 0; n < next.size(); ++n) next[n] = grid.x()[grid.unravel(n).ix];
  double local = -INFINITY;
  for (int k = grid.steps(); k >= 0; --k) {
    if (k < grid.steps()) {
      expectation.apply(next, cur, 1.0);
      for (std::size_t n = 0; n < cur.size(); ++n) cur[n] += grid.h() * grid.x()[grid.unravel(n).ix];
      next.swap(cur);
    }
    for (int i = 0; i < 2; ++i) {
      const auto s = sol.value[i].slice(k);
      for (std::size_t n = 0; n < s.size(); ++n) local = std::max(local, s[n] - next[n]);
    }
  }
  return {worst <= 1e-3, fmt::format("max(v - bound) = {:.4g} at {}; against the localized bound: {:.4g}; "
                                     "converged={}",
                                     worst, where, local, sol.report.converged)};
}

Outcome criterion9(Context& ctx) {
  const ModelParams p = Context::base_params();
  const Grid grid(Context::base_grid(), p);
  const SystemSolution& sol = ctx.default_solution();
  const int k = static_cast<int>(std::lround(0.5 / grid.h()));
  const int ix = grid.x().nearest(50);
  auto describe = [&](double y1, double y2) {
    const std::size_t n = grid.node(ix, grid.y().nearest(y1), grid.y().nearest(y2));
    const Action a = sol.pi(Player::One).slice(k)[n];
    const double z = a.tag == ActionTag::Intervene ? grid.zeta()[a.zeta_index] : 0.0;
    return std::pair{a, z};
  };
  const auto [a, za] = describe(85, 60);
  const auto [b, zb] = describe(30, 70);
  const bool pass = a.tag == ActionTag::Intervene && za < 0 && b.tag == ActionTag::Intervene && zb > 0;
  return {pass, fmt::format("nearest nodes x={:.4g}: (y1=85,y2=60) player 1 {} zeta={}; (y1=30,y2=70) player 1 {} "
                            "zeta={}; solve converged={}",
                            grid.x()[ix], to_string(a.tag), za, to_string(b.tag), zb, sol.report.converged)};
}

Outcome criterion10(Context& ctx) {
  const ModelParams p = Context::base_params();
  const Grid grid(Context::base_grid(), p);
  const SystemSolution& sol = ctx.default_solution();
  const auto t0 = std::chrono::steady_clock::now();
  const auto s = simulate_ensemble(10000, sol.policy, InitialState{}, 1, grid, p);
  const double runtime = seconds_since(t0);
  const std::size_t last = s.times.size() - 1;
  const double rise1 = (s.mean[1][last] - s.mean[1][0]) / s.se[1][last];
  const double rise2 = (s.mean[2][last] - s.mean[2][0]) / s.se[2][last];
  const double spread = *std::max_element(s.mean_abs_spread.begin(), s.mean_abs_spread.end());
  double drift = 0.0;
  for (std::size_t k = 1; k < s.times.size(); ++k) drift = std::max(drift, std::abs(s.mean[0][k] - s.mean[0][0]) / s.se[0][k]);
  const bool pass = rise1 > 3.0 && rise2 > 3.0 && spread < p.delta && drift <= 3.0 && runtime < 300.0;
  return {pass, fmt::format("mean Y1 {:.3f} -> {:.3f} ({:.1f} se), mean Y2 {:.3f} -> {:.3f} ({:.1f} se); "
                            "max mean |Y1-Y2| {:.3f}; max |mean X - x0| {:.2f} se; {:.1f} s",
                            s.mean[1][0], s.mean[1][last], rise1, s.mean[2][0], s.mean[2][last], rise2, spread, drift,
                            runtime)};
}

Outcome criterion11(Context&) {
  const fs::path root = fs::temp_directory_path() / "impulse_game_acceptance_11";
  fs::remove_all(root);
  fs::create_directories(root);
  {
    std::ofstream cfg(root / "small.cfg");
    cfg << "m_time = 8\nn_x = 10\nn_y = 10\nn_max = 20\nquantizer_n = 20\n";
  }
  std::ostringstream log;
  for (const char* run : {"a", "b"}) {
    if (cli::cmd_solve(root / "small.cfg", root / run, log) != 0) return {false, "solve failed: " + log.str()};
    cli::SimulateOptions o;
    o.dir = root / run;
    o.out = root / run / "sim";
    o.paths = 200;
    o.seed = 7;
    if (cli::cmd_simulate(o, log) != 0) return {false, "simulate failed: " + log.str()};
  }
  auto slurp = [](const fs::path& f) {
    std::ifstream in(f, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  };
  std::size_t compared = 0;
  std::vector<std::string> differ;
  for (const auto& entry : fs::recursive_directory_iterator(root / "a")) {
    if (entry.path().extension() != ".csv") continue;
    const fs::path rel = fs::relative(entry.path(), root / "a");
    ++compared;
    if (slurp(entry.path()) != slurp(root / "b" / rel)) differ.push_back(rel.string());
  }
  fs::remove_all(root);
  return {differ.empty() && compared >= 6,
          fmt::format("{} CSV files compared, {} differ{}", compared, differ.size(),
                      differ.empty() ? "" : fmt::format(" ({})", fmt::join(differ, ", ")))};
}

}  // namespace

int main(int argc, char** argv) {
  std::optional<fs::path> report_path;
  bool strict = false;
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--report" && i + 1 < argc) {
      report_path = argv[++i];
    } else if (arg == "--strict") {
      strict = true;
    } else if (arg == "--only" && i + 1 < argc) {
      std::stringstream list(argv[++i]);
      for (std::string item; std::getline(list, item, ',');) only.insert(std::stoi(item));
    } else {
      std::cerr << "usage: acceptance [--report FILE] [--strict] [--only N,M,...]\n";
      return 2;
    }
  }

  const std::vector<std::pair<std::string, std::function<Outcome(Context&)>>> criteria{
      {"quantizer correctness", criterion1},
      {"corner-line oracle", criterion2},
      {"no-impulse consistency", criterion3},
      {"QVI residuals at convergence", criterion4},
      {"commutation of M and H", criterion5},
      {"kappa-perturbation monotonicity", criterion6},
      {"symmetry", criterion7},
      {"growth bound", criterion8},
      {"policy regions at t=0.5, x=50", criterion9},
      {"rising mean retail prices", criterion10},
      {"determinism of solve + simulate", criterion11},
  };

  Context ctx;
  std::ostringstream report;
  int passed = 0, failed = 0, errors = 0;
  for (std::size_t c = 0; c < criteria.size(); ++c) {
    const int id = static_cast<int>(c) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto& [name, fn] = criteria[c];
    std::string line;
    try {
      const Outcome o = fn(ctx);
      (o.pass ? passed : failed)++;
      line = fmt::format("criterion {:2}: {} {}: {}", id, o.pass ? "PASS" : "FAIL", name, o.detail);
    } catch (const std::exception& e) {
      ++errors;
      line = fmt::format("criterion {:2}: FAIL {}: error: {}", id, name, e.what());
    }
    std::cout << line << std::endl;
    report << line << '\n';
  }
  const std::string summary = fmt::format("acceptance: {} passed, {} failed, {} errors", passed, failed, errors);
  std::cout << summary << std::endl;
  report << summary << '\n';
  if (report_path) {
    auto out = fmt::output_file(report_path->string());
    out.print("{}", report.str());
  }
  if (errors > 0) return 1;
  return strict && failed > 0 ? 1 : 0;
}
