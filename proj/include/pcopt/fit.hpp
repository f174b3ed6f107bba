#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "pcopt/common.hpp"
#include "pcopt/density.hpp"
#include "pcopt/target.hpp"

namespace pcopt {

enum class EmInit {
  /// Means at distinct data points drawn by weight without replacement;
  /// covariances at the pooled weighted covariance; uniform mixing weights.
  WeightedDataPoints,
};

struct EmConfig {
  int max_iters = 200;
  /// Stop once the objective changes by less than this (absolute).
  double tol = 1e-8;
  int n_restarts = 5;
  EmInit init = EmInit::WeightedDataPoints;

  void validate() const;
};

/// Objective trace of one EM restart. `reseeds` lists trace positions at which
/// a collapsed component was re-seeded; EM is monotone between them.
struct EmTrace {
  std::vector<double> objective;
  std::vector<std::size_t> reseeds;
};

struct FitResult {
  Density density;
  /// Self-normalized weighted cross-entropy attained by `density`.
  double objective = 0.0;
  int em_iterations = 0;
  std::vector<EmTrace> traces;
};

enum class ModelFamily { SingleGaussian, Mixture };

struct ModelSpec {
  ModelFamily family = ModelFamily::SingleGaussian;
  int components = 1;

  static ModelSpec single_gaussian() { return {ModelFamily::SingleGaussian, 1}; }
  static ModelSpec mixture(int m) { return {ModelFamily::Mixture, m}; }

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

struct FitOptions {
  double covariance_floor = pcopt::covariance_floor();
  EmConfig em;
};

/// Closed-form weighted moment match: mu = sum s x / sum s and
/// Sigma = sum s (x - mu)(x - mu)^T / sum s, then floored. Sums run in a
/// canonical order so the result does not depend on input order.
GaussianDensity fit_gaussian_weighted(std::span<const Point> points, std::span<const double> weights,
                                      double eigen_floor = covariance_floor());

/// Weighted EM for an M-component mixture; best of `cfg.n_restarts` restarts.
/// M = 1 reduces to fit_gaussian_weighted.
FitResult fit_mixture_em(std::span<const Point> points, std::span<const double> weights, int m,
                         const EmConfig& cfg, Rng& rng, double eigen_floor = covariance_floor());

/// -sum s ln q(x) / sum s over positive-weight points. +inf when q vanishes at
/// a positive-weight point.
template <SampleableDensity D>
double weighted_cross_entropy(std::span<const Point> points, std::span<const double> weights,
                              const D& density) {
  if (points.size() != weights.size()) throw InvalidArgument("points and weights differ in length");
  double total = 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    const double lq = density.log_density(points[i]);
    if (lq == -std::numeric_limits<double>::infinity()) {
      return std::numeric_limits<double>::infinity();
    }
    total += weights[i];
    acc -= weights[i] * lq;
  }
  if (!(total > 0.0)) throw EmptySupportError("cross-entropy needs positive total weight");
  return acc / total;
}

/// Fits the family named by `model` to weighted points.
FitResult fit_model(const WeightedPoints& data, const ModelSpec& model, const FitOptions& options,
                    Rng& rng);

}  // namespace pcopt
