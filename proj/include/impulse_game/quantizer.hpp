#pragma once

#include <filesystem>
#include <stdexcept>
#include <utility>
#include <vector>

namespace impulse_game {

/// N-point quantization of the standard normal: levels in increasing order and
/// the probability mass of each level's Voronoi cell.
struct Quantizer {
  std::vector<double> points;
  std::vector<double> weights;

  std::size_t size() const { return points.size(); }
};

class QuantizerError : public std::runtime_error {
 public:
  QuantizerError(const std::string& message, double residual)
      : std::runtime_error(message), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

struct QuantizerMoments {
  double mass = 0.0;
  double mean = 0.0;
  double second_moment = 0.0;
};

/// Standard normal cdf and density (erfc based, accurate in the tails).
double normal_cdf(double u);
double normal_pdf(double u);

/// Stationary N-point quantizer of N(0,1).
///
/// Runs Lloyd's fixed-point map (cell centroids between Voronoi midpoints) and
/// polishes with Newton steps on the stationarity equations. The grid is kept
/// exactly antisymmetric at every step. Converges when the largest point
/// movement drops to `tol`; throws QuantizerError otherwise.
Quantizer build_gaussian_quantizer(int n, double tol = 1e-10, int max_iter = 10'000);

QuantizerMoments quantizer_moments(const Quantizer& q);

/// One-step quantized GBM transition from `x`: pairs (successor price, weight).
std::vector<std::pair<double, double>> gbm_successors(double x, double h, double mu, double sigma,
                                                      const Quantizer& q);

/// CSV with header `level,weight`, one row per point.
void write_quantizer_csv(const Quantizer& q, const std::filesystem::path& path);
Quantizer read_quantizer_csv(const std::filesystem::path& path);

}  // namespace impulse_game
