#include "impulse_game/checks.hpp"

#include <cmath>
#include <fmt/format.h>
#include <random>

#include "impulse_game/operators.hpp"
#include "impulse_game/solver.hpp"

namespace impulse_game {

namespace {

CheckResult quantizer_check(const RunConfig& cfg, const std::filesystem::path& base_dir) {
  try {
    const Quantizer q = make_quantizer(cfg, base_dir);
    const QuantizerMoments m = quantizer_moments(q);
    const bool ok = std::abs(m.mass - 1.0) <= 1e-9 && std::abs(m.mean) <= 1e-9 && m.second_moment <= 1.0 + 1e-9 &&
                    (q.size() == 1 || m.second_moment > 0.0);
    return {"quantizer moments", ok,
            fmt::format("n={} mass={:.15g} mean={:.3g} second_moment={:.12g}", q.size(), m.mass, m.mean,
                        m.second_moment)};
  } catch (const std::exception& e) {
    return {"quantizer moments", false, e.what()};
  }
}

CheckResult share_check(const RunConfig& cfg) {
  const double delta = cfg.model.delta;
  double worst = 0.0;
  for (int a = 0; a <= 40; ++a) {
    for (int b = 0; b <= 40; ++b) {
      const double ya = cfg.grid.y_min + (cfg.grid.y_max - cfg.grid.y_min) * a / 40.0;
      const double yb = cfg.grid.y_min + (cfg.grid.y_max - cfg.grid.y_min) * b / 40.0;
      worst = std::max(worst, std::abs(market_share(ya, yb, delta) + market_share(yb, ya, delta) - 1.0));
      if (a == b) worst = std::max(worst, std::abs(market_share(ya, yb, delta) - 0.5));
    }
  }
  return {"market share symmetry", worst == 0.0, fmt::format("max |pi(a,b)+pi(b,a)-1| = {:.3g}", worst)};
}

CheckResult commutation_check(const RunConfig& cfg) {
  const Grid grid(cfg.grid, cfg.model);
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> unif(-50.0, 50.0);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> v(grid.nodes_per_slice());
    std::vector<double> w(grid.nodes_per_slice());
    for (auto& e : v) e = unif(rng);
    for (auto& e : w) e = unif(rng);
    for (Player i : kPlayers) {
      const auto zeta_j = best_response_impulse(opponent(i), w, grid, cfg.model);
      const auto mh = apply_MH(i, v, zeta_j, grid, cfg.model);
      // H after M on the interpolant, with the same node-frozen opponent impulse.
      const StateFunction f = [&](double x, double y1, double y2) { return interp_value(grid, v, x, y1, y2); };
      const StateFunction m_of_f = [&](double x, double y1, double y2) {
        return evaluate_M(i, f, x, y1, y2, grid, cfg.model).value;
      };
      for (std::size_t n = 0; n < v.size(); ++n) {
        const auto [ix, i1, i2] = grid.unravel(n);
        const double hm = evaluate_H(i, m_of_f, grid.x()[ix], grid.y()[i1], grid.y()[i2], zeta_j[n], grid, cfg.model);
        worst = std::max(worst, std::abs(mh.value[n] - hm));
      }
    }
  }
  return {"M H commutation", worst <= 1e-9, fmt::format("max |MHv - HMv| = {:.3g}", worst)};
}

CheckResult corner_check(const RunConfig& cfg) {
  const ModelParams& p = cfg.model;
  double worst = 0.0;
  std::string detail;
  for (Player i : kPlayers) {
    for (double x : {cfg.grid.x_min, 0.5 * (cfg.grid.x_min + cfg.grid.x_max), cfg.grid.x_max}) {
      worst = std::max(worst, std::abs(corner_line_value(p.T, x, p, i) + 0.5 * x));
      // Midpoint-rule integral of e^{a s} on [0, T] as an independent oracle.
      const double a = p.mu - p.rho(i);
      const int n = 20000;
      double integral = 0.0;
      for (int s = 0; s < n; ++s) integral += std::exp(a * (s + 0.5) * p.T / n) * p.T / n;
      const double oracle = -0.5 * x * (integral + std::exp(a * p.T));
      worst = std::max(worst, std::abs(corner_line_value(0.0, x, p, i) - oracle) / (1.0 + std::abs(oracle)));
    }
  }
  ModelParams near = p;
  near.rho1 = 0.0;
  near.mu = 1e-9;
  ModelParams flat = near;
  flat.mu = 0.0;
  const double jump = std::abs(corner_line_value(0.0, 50.0, near, Player::One) -
                               corner_line_value(0.0, 50.0, flat, Player::One));
  return {"corner-line closed form", worst <= 1e-6 && jump <= 1e-6,
          fmt::format("max relative error {:.3g}, branch jump {:.3g}", worst, jump)};
}

CheckResult terminal_check(const RunConfig& cfg, const std::filesystem::path& base_dir) {
  RunConfig one = cfg;
  one.grid.m_time = 1;
  one.solver.n_max = std::min(one.solver.n_max, 5);
  const Grid grid(one.grid, one.model);
  const Quantizer q = make_quantizer(one, base_dir);
  const SystemSolution sol = solve_system(grid, q, one.model, one.solver);
  std::size_t mismatches = 0;
  for (Player i : kPlayers) {
    const ValueField g = terminal_field(i, grid, one.model);
    const auto a = sol.v(i).slice(1);
    const auto b = g.slice(1);
    for (std::size_t n = 0; n < a.size(); ++n) mismatches += a[n] != b[n];
  }
  return {"terminal pinning", mismatches == 0, fmt::format("{} nodes differ from g at t=T", mismatches)};
}

}  // namespace

std::vector<CheckResult> run_checks(const RunConfig& cfg, const std::filesystem::path& base_dir) {
  std::vector<CheckResult> out;
  out.push_back(quantizer_check(cfg, base_dir));
  out.push_back(share_check(cfg));
  out.push_back(commutation_check(cfg));
  out.push_back(corner_check(cfg));
  try {
    out.push_back(terminal_check(cfg, base_dir));
  } catch (const std::exception& e) {
    out.push_back({"terminal pinning", false, e.what()});
  }
  return out;
}

}  // namespace impulse_game
