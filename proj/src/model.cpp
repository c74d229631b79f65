#include "impulse_game/model.hpp"

#include <algorithm>
#include <cmath>

namespace impulse_game {

namespace {

void require(bool ok, const char* key, const char* message) {
  if (!ok) throw ConfigError(key, message);
}

}  // namespace

void validate(const ModelParams& p, int n_zeta_samples) {
  require(std::isfinite(p.T) && p.T > 0.0, "T", "horizon must be positive");
  require(std::isfinite(p.mu), "mu", "drift must be finite");
  require(std::isfinite(p.sigma) && p.sigma > 0.0, "sigma", "volatility must be positive");
  require(std::isfinite(p.rho1) && p.rho1 >= 0.0, "rho1", "discount rate must be nonnegative");
  require(std::isfinite(p.rho2) && p.rho2 >= 0.0, "rho2", "discount rate must be nonnegative");
  require(std::isfinite(p.lambda) && p.lambda > 0.0, "lambda", "impulse scale must be positive");
  require(std::isfinite(p.zeta_min) && p.zeta_min < 0.0, "zeta_min", "must be negative");
  require(std::isfinite(p.zeta_max) && p.zeta_max > 0.0, "zeta_max", "must be positive");
  require(std::isfinite(p.delta) && p.delta > 0.0, "delta", "market-share width must be positive");
  require(!p.k1 || (std::isfinite(*p.k1) && *p.k1 >= 0.0), "k1", "cap must be nonnegative");
  require(!p.k2 || (std::isfinite(*p.k2) && *p.k2 >= 0.0), "k2", "cap must be nonnegative");
  require(std::isfinite(p.kappa) && p.kappa >= 0.0, "kappa", "endured cost must be nonnegative");

  const int n = std::max(n_zeta_samples, 2);
  for (Player player : kPlayers) {
    const char* key = player == Player::One ? "phi1" : "phi2";
    double lo = INFINITY;
    double hi = -INFINITY;
    for (int s = 0; s < n; ++s) {
      const double zeta = p.zeta_min + (p.zeta_max - p.zeta_min) * s / (n - 1);
      const double c = intervention_cost(player, 1.0, zeta, p);
      lo = std::min(lo, c);
      hi = std::max(hi, c);
    }
    require(lo > 0.0, key, "intervention cost must be bounded below by a positive constant");
    require(std::isfinite(hi), key, "intervention cost must be bounded above");
  }
}

double market_share(double y_own, double y_opp, double delta) {
  const double spread = y_own - y_opp;
  if (spread <= -delta) return 1.0;
  if (spread >= delta) return 0.0;
  // Share of the dearer retailer; the cheaper one gets the complement so that
  // pi(a,b) + pi(b,a) == 1 holds bit-for-bit.
  const double dearer = (delta - std::abs(spread)) / (2.0 * delta);
  return spread > 0.0 ? dearer : 1.0 - dearer;
}

double impulse_map(double y, double zeta, double lambda) { return y * std::exp(lambda * zeta); }

double running_payoff(Player player, double x, double y_own, double y_opp, const ModelParams& params) {
  const double margin = (y_own - x) * market_share(y_own, y_opp, params.delta);
  if (const auto& cap = params.cap(player)) return std::min(margin, *cap * x);
  return margin;
}

double terminal_payoff(Player player, double x, double y_own, double y_opp, const ModelParams& params) {
  return running_payoff(player, x, y_own, y_opp, params);
}

double intervention_cost(Player player, double /*y*/, double /*zeta*/, const ModelParams& params) {
  return params.phi(player);
}

}  // namespace impulse_game
