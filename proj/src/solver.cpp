#include "impulse_game/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <json.hpp>

#include "impulse_game/operators.hpp"
#include "impulse_game/parallel.hpp"

namespace impulse_game {

namespace {

std::vector<double> payoff_slice(Player player, const Grid& grid, const ModelParams& params) {
  std::vector<double> f(grid.nodes_per_slice());
  for (std::size_t n = 0; n < f.size(); ++n) {
    const auto [ix, i1, i2] = grid.unravel(n);
    const double y1 = grid.y()[i1];
    const double y2 = grid.y()[i2];
    const bool one = player == Player::One;
    f[n] = running_payoff(player, grid.x()[ix], one ? y1 : y2, one ? y2 : y1, params);
  }
  return f;
}

double sup_distance(const ValueField& a, const ValueField& b) {
  double d = 0.0;
  for (std::size_t n = 0; n < a.data().size(); ++n) d = std::max(d, std::abs(a.data()[n] - b.data()[n]));
  return d;
}

double max_obstacle_violation(Player player, const ValueField& v, const Grid& grid, const ModelParams& params) {
  double worst = 0.0;
  for (int k = 0; k < grid.steps(); ++k) {
    const auto m = apply_M(player, v.slice(k), grid, params);
    const auto s = v.slice(k);
    for (std::size_t n = 0; n < s.size(); ++n) worst = std::max(worst, m.value[n] - s[n]);
  }
  return worst;
}

// Continuation value h f + e^{-rho h} E[v_next] for every node of a slice.
void continuation(std::span<const double> v_next, std::span<const double> payoff, double h, double discount,
                  const ExpectationOperator& expectation, std::span<double> out) {
  expectation.apply(v_next, out, discount);
  for (std::size_t n = 0; n < out.size(); ++n) out[n] += h * payoff[n];
}

}  // namespace

void validate(const SolverConfig& cfg) {
  if (!(cfg.epsilon > 0.0)) throw ConfigError("epsilon", "tolerance must be positive");
  if (cfg.n_max < 1) throw ConfigError("n_max", "need at least one outer iteration");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw ConfigError("alpha", "relaxation decay must lie in (0,1)");
  if (!(cfg.r0 > 0.0)) throw ConfigError("r0", "initial relaxation must be positive");
  if (!(cfg.inner_epsilon > 0.0)) throw ConfigError("inner_epsilon", "tolerance must be positive");
  if (cfg.inner_n_max < 1) throw ConfigError("inner_n_max", "need at least one inner sweep");
}

std::string to_json(const SolveReport& report) {
  nlohmann::ordered_json j;
  j["residual_history"] = report.residual_history;
  j["relaxation_history"] = report.relaxation_history;
  j["iterations_used"] = report.iterations_used;
  j["converged"] = report.converged;
  j["wall_time"] = report.wall_time;
  j["final_threshold"] = report.final_threshold;
  j["max_constraint_violation"] = report.max_constraint_violation;
  j["inner_iterations"] = report.inner_iterations;
  return j.dump(2);
}

ExpectationOperator::ExpectationOperator(const Grid& grid, const Quantizer& q, const ModelParams& params)
    : grid_(&grid), n_(grid.nx()), matrix_(static_cast<std::size_t>(n_) * n_, 0.0) {
  for (int j = 0; j < n_; ++j) {
    for (const auto& [x_next, weight] : gbm_successors(grid.x()[j], grid.h(), params.mu, params.sigma, q)) {
      const Stencil s = locate(grid.x(), x_next);
      matrix_[j * n_ + s.lo] += weight * (1.0 - s.w);
      matrix_[j * n_ + s.lo + 1] += weight * s.w;
    }
  }
}

void ExpectationOperator::apply(std::span<const double> v_next, std::span<double> out, double discount) const {
  const std::size_t block = static_cast<std::size_t>(grid_->ny()) * grid_->ny();
  parallel_for(static_cast<std::size_t>(n_), [&](std::size_t j) {
    double* dst = out.data() + j * block;
    std::fill(dst, dst + block, 0.0);
    for (int jn = 0; jn < n_; ++jn) {
      const double w = matrix_[j * n_ + jn];
      if (w == 0.0) continue;
      const double* src = v_next.data() + jn * block;
      for (std::size_t c = 0; c < block; ++c) dst[c] += w * src[c];
    }
    if (discount != 1.0) {
      for (std::size_t c = 0; c < block; ++c) dst[c] *= discount;
    }
  });
}

StepResult backward_step(Player player, std::span<const double> v_next, std::span<const double> obstacle,
                         const Grid& grid, const Quantizer& q, const ModelParams& params) {
  return backward_step(player, v_next, obstacle, grid, ExpectationOperator(grid, q, params), params);
}

StepResult backward_step(Player player, std::span<const double> v_next, std::span<const double> obstacle,
                         const Grid& grid, const ExpectationOperator& expectation, const ModelParams& params) {
  const std::size_t size = grid.nodes_per_slice();
  StepResult out{std::vector<double>(size), std::vector<double>(size), std::vector<ActionTag>(size, ActionTag::Wait)};
  const auto payoff = payoff_slice(player, grid, params);
  continuation(v_next, payoff, grid.h(), std::exp(-params.rho(player) * grid.h()), expectation, out.continuation);
  for (std::size_t n = 0; n < size; ++n) {
    out.value[n] = out.continuation[n];
    if (!obstacle.empty() && obstacle[n] > out.continuation[n]) {
      out.value[n] = obstacle[n];
      out.action[n] = ActionTag::Intervene;
    }
  }
  return out;
}

OpponentContext passive_opponent(const Grid& grid) {
  OpponentContext ctx;
  ctx.continuation_mask.assign(grid.steps(), std::vector<std::uint8_t>(grid.nodes_per_slice(), 1));
  ctx.endured.assign(grid.steps(), std::vector<double>(grid.nodes_per_slice(), 0.0));
  return ctx;
}

PlayerSolution solve_single_player(Player player, const OpponentContext& opponent, const Grid& grid,
                                   const Quantizer& q, const ModelParams& params, const SolverConfig& cfg,
                                   const ValueField* initial) {
  const auto start = std::chrono::steady_clock::now();
  const int steps = grid.steps();
  const std::size_t size = grid.nodes_per_slice();
  const ExpectationOperator expectation(grid, q, params);
  const auto payoff = payoff_slice(player, grid, params);
  const double discount = std::exp(-params.rho(player) * grid.h());

  ValueField prev = initial ? *initial : terminal_field(player, grid, params);
  fill_terminal(prev.slice(steps), player, grid, params);
  ValueField next(grid);
  PolicyField policy(grid);
  std::vector<double> cont(size);

  PlayerSolution out;
  for (int sweep = 1; sweep <= cfg.inner_n_max; ++sweep) {
    fill_terminal(next.slice(steps), player, grid, params);
    for (int k = steps - 1; k >= 0; --k) {
      const ImpulseField obstacle = apply_M(player, prev.slice(k), grid, params);
      continuation(next.slice(k + 1), payoff, grid.h(), discount, expectation, cont);
      const auto& mask = opponent.continuation_mask[k];
      const auto& endured = opponent.endured[k];
      auto value = next.slice(k);
      auto actions = policy.slice(k);
      for (std::size_t n = 0; n < size; ++n) {
        const bool waits = mask[n] != 0;
        const double base = waits ? cont[n] : endured[n];
        if (obstacle.value[n] > base) {
          value[n] = obstacle.value[n];
          actions[n] = {ActionTag::Intervene, obstacle.argmax[n]};
        } else {
          value[n] = base;
          actions[n] = {waits ? ActionTag::Wait : ActionTag::Endure, -1};
        }
      }
    }
    const double residual = sup_distance(next, prev);
    out.report.residual_history.push_back(residual);
    out.report.iterations_used = sweep;
    std::swap(prev, next);
    if (residual <= cfg.inner_epsilon) {
      out.report.converged = true;
      break;
    }
  }
  out.report.max_constraint_violation = max_obstacle_violation(player, prev, grid, params);
  out.value = std::move(prev);
  out.policy = std::move(policy);
  out.report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

SystemSolution solve_system(const Grid& grid, const Quantizer& q, const ModelParams& params,
                            const SolverConfig& cfg) {
  validate(cfg);
  const auto start = std::chrono::steady_clock::now();
  const int steps = grid.steps();
  const std::size_t size = grid.nodes_per_slice();

  SystemSolution sol;
  sol.value = {terminal_field(Player::One, grid, params), terminal_field(Player::Two, grid, params)};
  SolveReport& report = sol.report;

  double r = cfg.r0;
  for (int n = 0; n < cfg.n_max; ++n) {
    std::array<ValueField, 2> updated;
    for (Player i : kPlayers) {
      const Player l = opponent(i);
      const ValueField& v_i = sol.v(i);
      const ValueField& v_l = sol.v(l);
      OpponentContext ctx;
      ctx.continuation_mask.resize(steps);
      ctx.endured.resize(steps);
      for (int k = 0; k < steps; ++k) {
        const ImpulseField m_l = apply_M(l, v_l.slice(k), grid, params);
        const auto vl = v_l.slice(k);
        auto& mask = ctx.continuation_mask[k];
        mask.resize(size);
        for (std::size_t node = 0; node < size; ++node) mask[node] = (m_l.value[node] - vl[node] < -r) ? 1 : 0;

        const std::vector<double> h = apply_H(i, v_i.slice(k), m_l.argmax, grid, params);
        const ImpulseField mh = apply_MH(i, v_i.slice(k), m_l.argmax, grid, params);
        auto& endured = ctx.endured[k];
        endured.resize(size);
        for (std::size_t node = 0; node < size; ++node) endured[node] = std::max(mh.value[node], h[node]);
      }
      PlayerSolution inner = solve_single_player(i, ctx, grid, q, params, cfg, &v_i);
      report.inner_iterations.push_back(inner.report.iterations_used);
      updated[player_index(i)] = std::move(inner.value);
    }

    const double residual =
        std::max(sup_distance(updated[0], sol.value[0]), sup_distance(updated[1], sol.value[1]));
    report.residual_history.push_back(residual);
    report.relaxation_history.push_back(r);
    report.final_threshold = r;
    report.iterations_used = n + 1;
    sol.value = std::move(updated);
    if (residual <= cfg.epsilon) {
      report.converged = true;
      break;
    }
    r = std::max(cfg.alpha * residual, cfg.epsilon);
  }

  report.max_constraint_violation = std::max(max_obstacle_violation(Player::One, sol.value[0], grid, params),
                                             max_obstacle_violation(Player::Two, sol.value[1], grid, params));
  sol.policy = derive_policies(sol.value, cfg.epsilon, grid, params);
  report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return sol;
}

SystemSolution solve_kappa(double kappa, const Grid& grid, const Quantizer& q, const ModelParams& params,
                           const SolverConfig& cfg) {
  if (!(kappa >= 0.0)) throw ConfigError("kappa", "endured cost must be nonnegative");
  ModelParams perturbed = params;
  perturbed.kappa = kappa;
  return solve_system(grid, q, perturbed, cfg);
}

ValueField no_impulse_value(Player player, const Grid& grid, const Quantizer& q, const ModelParams& params) {
  const ExpectationOperator expectation(grid, q, params);
  const auto payoff = payoff_slice(player, grid, params);
  const double discount = std::exp(-params.rho(player) * grid.h());
  ValueField v(grid);
  fill_terminal(v.slice(grid.steps()), player, grid, params);
  for (int k = grid.steps() - 1; k >= 0; --k) {
    continuation(v.slice(k + 1), payoff, grid.h(), discount, expectation, v.slice(k));
  }
  return v;
}

double corner_line_value(double t, double x, const ModelParams& params, Player player) {
  const double a = params.mu - params.rho(player);
  const double tau = params.T - t;
  if (std::abs(a) < 1e-12) return -0.5 * x * (tau + 1.0);
  return -0.5 * x * (std::expm1(a * tau) / a + std::exp(a * tau));
}

std::array<PolicyField, 2> derive_policies(const std::array<ValueField, 2>& values, double threshold,
                                           const Grid& grid, const ModelParams& params) {
  std::array<PolicyField, 2> out{PolicyField(grid), PolicyField(grid)};
  const std::size_t size = grid.nodes_per_slice();
  for (int k = 0; k < grid.steps(); ++k) {
    const std::array<ImpulseField, 2> m{apply_M(Player::One, values[0].slice(k), grid, params),
                                        apply_M(Player::Two, values[1].slice(k), grid, params)};
    const std::array<ImpulseField, 2> mh{
        apply_MH(Player::One, values[0].slice(k), m[1].argmax, grid, params),
        apply_MH(Player::Two, values[1].slice(k), m[0].argmax, grid, params)};
    for (std::size_t n = 0; n < size; ++n) {
      const bool acts[2] = {m[0].value[n] - values[0].slice(k)[n] >= -threshold,
                            m[1].value[n] - values[1].slice(k)[n] >= -threshold};
      for (int i = 0; i < 2; ++i) {
        const int l = 1 - i;
        Action a;
        if (acts[i]) {
          a = {ActionTag::Intervene, acts[l] ? mh[i].argmax[n] : m[i].argmax[n]};
        } else if (acts[l]) {
          a = {ActionTag::Endure, -1};
        }
        out[i].slice(k)[n] = a;
      }
    }
  }
  return out;
}

QviResidual qvi_residual(Player player, const SystemSolution& solution, const Grid& grid, const Quantizer& q,
                         const ModelParams& params) {
  const Player l = opponent(player);
  const ValueField& v = solution.v(player);
  const ValueField& v_l = solution.v(l);
  const double r = solution.report.final_threshold;
  const ExpectationOperator expectation(grid, q, params);
  const auto payoff = payoff_slice(player, grid, params);
  const double discount = std::exp(-params.rho(player) * grid.h());
  std::vector<double> cont(grid.nodes_per_slice());

  QviResidual out;
  for (int k = 0; k < grid.steps(); ++k) {
    const auto s = v.slice(k);
    const ImpulseField m = apply_M(player, s, grid, params);
    const ImpulseField m_l = apply_M(l, v_l.slice(k), grid, params);
    const auto h = apply_H(player, s, m_l.argmax, grid, params);
    const auto mh = apply_MH(player, s, m_l.argmax, grid, params);
    continuation(v.slice(k + 1), payoff, grid.h(), discount, expectation, cont);
    for (std::size_t n = 0; n < s.size(); ++n) {
      out.obstacle_violation = std::max(out.obstacle_violation, m.value[n] - s[n]);
      if (m_l.value[n] - v_l.slice(k)[n] < -r) {
        ++out.continuation_nodes;
        out.continuation_residual = std::max(out.continuation_residual, std::abs(s[n] - std::max(cont[n], m.value[n])));
      } else {
        ++out.endured_nodes;
        const double active = std::max({mh.value[n], h[n], m.value[n]});
        out.endured_residual = std::max(out.endured_residual, std::abs(s[n] - active));
      }
    }
  }
  return out;
}

}  // namespace impulse_game
