#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "pcopt/common.hpp"
#include "pcopt/density.hpp"

namespace pcopt {

/// Quadratic response surface c + b'x + x'Ax with A symmetric.
struct SurrogateFit {
  double constant = 0.0;
  Eigen::VectorXd linear;
  Matrix quadratic;
  double residual_rms = 0.0;

  int dimension() const { return static_cast<int>(linear.size()); }
  double value(const Point& x) const;
  /// Stationary point of the surface; throws DegenerateDesignError when A is
  /// singular.
  Point stationary_point() const;
};

/// Number of free coefficients of a quadratic in n variables.
inline std::size_t quadratic_coefficient_count(int n) {
  return static_cast<std::size_t>((n + 1) * (n + 2) / 2);
}

/// Least-squares quadratic through (x, y) pairs. Throws InvalidArgument when
/// there are fewer pairs than coefficients and DegenerateDesignError when the
/// design matrix is rank deficient.
SurrogateFit fit_surface(std::span<const Point> points, std::span<const double> values);

/// Mean of the surrogate over n draws from `weight_density`.
template <SampleableDensity D>
double fb_integral_estimate(const SurrogateFit& fit, const D& weight_density, std::size_t n,
                            Rng& rng) {
  if (n < 1) throw InvalidArgument("fit-based estimate needs at least one fictitious sample");
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += fit.value(weight_density.sample(rng));
  return sum / static_cast<double>(n);
}

/// Squared-exponential noise added to surrogate values:
/// cov(x_i, x_j) = sigma_f^2 exp(-|x_i - x_j|^2 / (2 l^2)) + jitter [i == j].
struct NoiseKernel {
  double sigma_f = 0.0;
  double length_scale = 1.0;
  double jitter = 1e-9;

  NoiseKernel() = default;
  NoiseKernel(double sigma_f, double length_scale, double jitter = 1e-9);

  /// sigma_f = residual RMS of `fit`, l = domain half-width / 4.
  static NoiseKernel defaults_for(const SurrogateFit& fit, double domain_half_width);
};

/// One joint fictitious-oracle draw at `points`: the surrogate plus a single
/// correlated Gaussian noise vector. With sigma_f = 0 the surrogate values are
/// returned and no randomness is consumed.
std::vector<double> fictitious_values(const SurrogateFit& fit, const NoiseKernel& kernel,
                                      std::span<const Point> points, Rng& rng);

/// N_T tuples of K points drawn from h_c, each with its fictitious minimum.
struct EliteTuples {
  int k = 1;
  std::vector<std::vector<Point>> points;
  std::vector<std::vector<double>> log_proposal;
  std::vector<double> minima;
};

inline constexpr std::size_t kDefaultEliteTuples = 2000;

EliteTuples draw_elite_tuples(const Density& h_c, const SurrogateFit& fit,
                              const NoiseKernel& kernel, int k, std::size_t n_tuples, Rng& rng);

/// Self-normalized elite estimate of q on pre-drawn tuples: each tuple's
/// minimum weighted by prod_j q(x_j) / h_c(x_j). Throws UndefinedScoreError
/// when every weight vanishes.
double elite_estimate_on(const EliteTuples& tuples, const Density& q);

/// Expected best-of-K surrogate value under q, estimated from fictitious
/// samples drawn from h_c.
double elite_estimate(const Density& q, const Density& h_c, const SurrogateFit& fit,
                      const NoiseKernel& kernel, int k, std::size_t n_tuples, Rng& rng);

struct EliteSelection {
  std::size_t index = 0;
  /// +inf for candidates whose estimate is undefined.
  std::vector<double> estimates;
};

/// Candidate with the lowest elite estimate, all evaluated on the same tuples.
/// Ties go to the lowest index; throws UndefinedScoreError when no candidate
/// has a defined estimate.
EliteSelection elite_select(std::span<const Density> candidates, const Density& h_c,
                            const SurrogateFit& fit, const NoiseKernel& kernel, int k,
                            std::size_t n_tuples, Rng& rng);

/// Exact distribution of min over K iid draws from a finite support:
/// P(min = v_i) for sorted distinct values v. Returns (values, probabilities).
std::pair<std::vector<double>, std::vector<double>> elite_min_distribution(
    std::span<const double> values, std::span<const double> probabilities, int k);

}  // namespace pcopt
