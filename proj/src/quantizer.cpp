#include "impulse_game/quantizer.hpp"

#include <fmt/format.h>
#include <fmt/os.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

namespace impulse_game {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Upper tail 1 - Phi(u).
double normal_sf(double u) { return 0.5 * std::erfc(u / std::numbers::sqrt2); }

double pdf_or_zero(double u) { return std::isinf(u) ? 0.0 : normal_pdf(u); }

// Gaussian mass of (a, b], evaluated on whichever side avoids cancellation.
double cell_mass(double a, double b) {
  if (a >= 0.0) return normal_sf(a) - normal_sf(b);
  if (b <= 0.0) return normal_cdf(b) - normal_cdf(a);
  return 1.0 - normal_cdf(a) - normal_sf(b);
}

double inverse_normal_cdf(double p) {
  double lo = -40.0;
  double hi = 40.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    (normal_cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double boundary(const std::vector<double>& u, std::ptrdiff_t l) {
  // Voronoi boundary between u[l] and u[l+1]; l = -1 and l = n-1 are the tails.
  const auto n = static_cast<std::ptrdiff_t>(u.size());
  if (l < 0) return -kInf;
  if (l >= n - 1) return kInf;
  return 0.5 * (u[l] + u[l + 1]);
}

// Mirror the lower half so the grid is exactly antisymmetric.
void symmetrize(std::vector<double>& u) {
  const std::size_t n = u.size();
  for (std::size_t l = 0; l < n / 2; ++l) {
    const double a = 0.5 * (u[n - 1 - l] - u[l]);
    u[l] = -a;
    u[n - 1 - l] = a;
  }
  if (n % 2 == 1) u[n / 2] = 0.0;
}

std::vector<double> lloyd_step(const std::vector<double>& u) {
  const auto n = static_cast<std::ptrdiff_t>(u.size());
  std::vector<double> next(u.size());
  for (std::ptrdiff_t l = 0; l < (n + 1) / 2; ++l) {
    const double a = boundary(u, l - 1);
    const double b = boundary(u, l);
    const double mass = cell_mass(a, b);
    next[l] = mass > 0.0 ? (pdf_or_zero(a) - pdf_or_zero(b)) / mass : u[l];
  }
  for (std::ptrdiff_t l = (n + 1) / 2; l < n; ++l) next[l] = -next[n - 1 - l];
  symmetrize(next);
  return next;
}

// Stationarity residual F_l = u_l * mass_l - (pdf(c_{l-1}) - pdf(c_l)).
std::vector<double> stationarity_residual(const std::vector<double>& u) {
  const auto n = static_cast<std::ptrdiff_t>(u.size());
  std::vector<double> f(u.size());
  for (std::ptrdiff_t l = 0; l < n; ++l) {
    const double a = boundary(u, l - 1);
    const double b = boundary(u, l);
    f[l] = u[l] * cell_mass(a, b) - (pdf_or_zero(a) - pdf_or_zero(b));
  }
  return f;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double e : v) m = std::max(m, std::abs(e));
  return m;
}

// Newton direction for the stationarity system; the Jacobian is tridiagonal.
std::vector<double> newton_direction(const std::vector<double>& u, const std::vector<double>& f) {
  const auto n = static_cast<std::ptrdiff_t>(u.size());
  std::vector<double> lower(u.size(), 0.0), diag(u.size(), 0.0), upper(u.size(), 0.0);
  for (std::ptrdiff_t l = 0; l < n; ++l) {
    const double a = boundary(u, l - 1);
    const double b = boundary(u, l);
    const double pa = pdf_or_zero(a);
    const double pb = pdf_or_zero(b);
    const double a_pa = std::isinf(a) ? 0.0 : a * pa;
    const double b_pb = std::isinf(b) ? 0.0 : b * pb;
    diag[l] = cell_mass(a, b) + 0.5 * u[l] * (pb - pa) + 0.5 * (a_pa - b_pb);
    if (l + 1 < n) upper[l] = 0.5 * (u[l] - b) * pb;
    if (l > 0) lower[l] = 0.5 * (a - u[l]) * pa;
  }
  // Thomas algorithm for J d = -f.
  std::vector<double> c(u.size()), d(u.size());
  c[0] = upper[0] / diag[0];
  d[0] = -f[0] / diag[0];
  for (std::ptrdiff_t l = 1; l < n; ++l) {
    const double m = diag[l] - lower[l] * c[l - 1];
    c[l] = upper[l] / m;
    d[l] = (-f[l] - lower[l] * d[l - 1]) / m;
  }
  for (std::ptrdiff_t l = n - 2; l >= 0; --l) d[l] -= c[l] * d[l + 1];
  return d;
}

std::vector<double> cell_weights(const std::vector<double>& u) {
  const auto n = static_cast<std::ptrdiff_t>(u.size());
  std::vector<double> w(u.size());
  for (std::ptrdiff_t l = 0; l < n / 2; ++l) {
    w[l] = cell_mass(boundary(u, l - 1), boundary(u, l));
    w[n - 1 - l] = w[l];
  }
  if (n % 2 == 1) {
    const double c = boundary(u, n / 2);
    w[n / 2] = std::erf(c / std::numbers::sqrt2);
  }
  return w;
}

}  // namespace

double normal_cdf(double u) { return 0.5 * std::erfc(-u / std::numbers::sqrt2); }

double normal_pdf(double u) { return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi); }

Quantizer build_gaussian_quantizer(int n, double tol, int max_iter) {
  if (n < 1) throw std::invalid_argument("quantizer size must be at least 1");
  if (n == 1) return Quantizer{{0.0}, {1.0}};

  std::vector<double> u(static_cast<std::size_t>(n));
  for (int l = 0; l < n; ++l) u[l] = inverse_normal_cdf((l + 0.5) / n);
  symmetrize(u);

  // Lloyd until the grid is inside Newton's basin, then Newton.
  constexpr double kNewtonSwitch = 1e-4;
  double movement = kInf;
  int iter = 0;
  bool converged = false;
  while (iter < max_iter) {
    ++iter;
    std::vector<double> next = lloyd_step(u);
    movement = 0.0;
    for (std::size_t l = 0; l < u.size(); ++l) movement = std::max(movement, std::abs(next[l] - u[l]));
    u = std::move(next);
    if (movement <= tol) {
      converged = true;
      break;
    }
    if (movement <= kNewtonSwitch) break;
  }

  while (!converged && iter < max_iter) {
    ++iter;
    const std::vector<double> f = stationarity_residual(u);
    const std::vector<double> d = newton_direction(u, f);
    const double f_norm = max_abs(f);
    double step = 1.0;
    std::vector<double> trial(u.size());
    for (int halvings = 0; halvings < 30; ++halvings, step *= 0.5) {
      for (std::size_t l = 0; l < u.size(); ++l) trial[l] = u[l] + step * d[l];
      symmetrize(trial);
      if (!std::is_sorted(trial.begin(), trial.end())) continue;
      if (max_abs(stationarity_residual(trial)) <= f_norm || f_norm == 0.0) break;
    }
    movement = 0.0;
    for (std::size_t l = 0; l < u.size(); ++l) movement = std::max(movement, std::abs(trial[l] - u[l]));
    u = trial;
    if (movement <= tol) converged = true;
  }

  if (!converged) {
    throw QuantizerError(
        fmt::format("quantizer of size {} did not converge in {} iterations (last movement {:.3e})", n,
                    max_iter, movement),
        movement);
  }
  return Quantizer{u, cell_weights(u)};
}

QuantizerMoments quantizer_moments(const Quantizer& q) {
  QuantizerMoments m;
  for (std::size_t l = 0; l < q.size(); ++l) {
    m.mass += q.weights[l];
    m.mean += q.weights[l] * q.points[l];
    m.second_moment += q.weights[l] * q.points[l] * q.points[l];
  }
  return m;
}

std::vector<std::pair<double, double>> gbm_successors(double x, double h, double mu, double sigma,
                                                      const Quantizer& q) {
  std::vector<std::pair<double, double>> out;
  out.reserve(q.size());
  const double drift = (mu - 0.5 * sigma * sigma) * h;
  const double scale = sigma * std::sqrt(h);
  for (std::size_t l = 0; l < q.size(); ++l) {
    out.emplace_back(x * std::exp(drift + scale * q.points[l]), q.weights[l]);
  }
  return out;
}

void write_quantizer_csv(const Quantizer& q, const std::filesystem::path& path) {
  auto out = fmt::output_file(path.string());
  out.print("level,weight\n");
  for (std::size_t l = 0; l < q.size(); ++l) out.print("{:.17g},{:.17g}\n", q.points[l], q.weights[l]);
}

Quantizer read_quantizer_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open quantizer file " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("level,weight", 0) != 0) {
    throw std::runtime_error("quantizer file " + path.string() + " lacks the level,weight header");
  }
  Quantizer q;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    try {
      if (comma == std::string::npos) throw std::invalid_argument("missing comma");
      q.points.push_back(std::stod(line.substr(0, comma)));
      q.weights.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw std::runtime_error(fmt::format("quantizer file {}: malformed row {}", path.string(), row));
    }
  }
  if (q.points.empty()) throw std::runtime_error("quantizer file " + path.string() + " has no rows");
  return q;
}

}  // namespace impulse_game
