#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace impulse_game {

/// The two retailers. Values match the player labels used in the model.
enum class Player : int { One = 1, Two = 2 };

constexpr Player opponent(Player p) { return p == Player::One ? Player::Two : Player::One; }
constexpr int player_index(Player p) { return static_cast<int>(p) - 1; }
constexpr Player kPlayers[] = {Player::One, Player::Two};

/// Raised for invalid parameter sets. `key()` names the offending field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(key + ": " + message), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// Market and game constants. Defaults reproduce the reference retail-energy
/// instance: driftless wholesale price with 50% volatility, ten-percent impulse
/// scale, market-share width 40, intervention costs 5 and 2.5.
struct ModelParams {
  double T = 1.0;
  double mu = 0.0;
  double sigma = 0.5;
  double rho1 = 0.0;
  double rho2 = 0.0;
  double lambda = 0.1;
  double zeta_min = -2.2;
  double zeta_max = 1.8;
  double delta = 40.0;
  // Payoff caps K^i; std::nullopt disables the cap.
  std::optional<double> k1;
  std::optional<double> k2;
  double phi1 = 5.0;
  double phi2 = 2.5;
  // Fixed cost charged to a player each time the opponent intervenes.
  double kappa = 0.0;

  double rho(Player p) const { return p == Player::One ? rho1 : rho2; }
  const std::optional<double>& cap(Player p) const { return p == Player::One ? k1 : k2; }
  double phi(Player p) const { return p == Player::One ? phi1 : phi2; }
};

/// Throws ConfigError when an invariant fails, including the cost bounds
/// 0 < C1 <= phi <= C2 sampled over `n_zeta_samples` impulse sizes.
void validate(const ModelParams& params, int n_zeta_samples = 64);

/// Share of consumers served at price `y_own` against `y_opp`. Piecewise
/// linear in the spread with width `delta`; pi(a,b) + pi(b,a) = 1.
double market_share(double y_own, double y_opp, double delta);

/// Post-impulse price y * exp(lambda * zeta).
double impulse_map(double y, double zeta, double lambda);

/// Running payoff f^i: margin times market share, capped at K^i x if enabled.
double running_payoff(Player player, double x, double y_own, double y_opp, const ModelParams& params);

/// Terminal payoff g^i. Same functional form as the running payoff.
double terminal_payoff(Player player, double x, double y_own, double y_opp, const ModelParams& params);

/// Cost of an intervention of size `zeta` at own price `y`.
double intervention_cost(Player player, double y, double zeta, const ModelParams& params);

}  // namespace impulse_game
