#pragma once

#include <cstddef>
#include <limits>
#include <span>

#include "pcopt/common.hpp"
#include "pcopt/density.hpp"
#include "pcopt/oracle.hpp"
#include "pcopt/target.hpp"

namespace pcopt {

/// Self-normalized held-out estimate of E_q[G]. `effective_support` counts
/// feasible held-out samples where q has positive mass; zero means undefined.
struct HoldoutScore {
  double raw = std::numeric_limits<double>::quiet_NaN();
  std::size_t effective_support = 0;

  bool defined() const { return effective_support > 0; }
  /// Throws UndefinedScoreError when undefined.
  double value() const;
  /// Ranking key: undefined scores compare as +inf.
  double comparable() const {
    return defined() ? raw : std::numeric_limits<double>::infinity();
  }
};

/// sum (q/h) g / sum (q/h) over feasible validation samples. Invariant under a
/// common rescaling of the stored proposal densities and under permutation.
HoldoutScore holdout_performance(std::span<const Sample> validation, const Density& density);

/// Pooled importance estimate of the cross-entropy objective
/// -integral p(x) ln q(x) dx with the unnormalized target exp(-beta (G - g_ref)):
/// (1/N) sum_i exp(-beta (g_i - g_ref)) / h_i * (-ln q(x_i)). Infeasible
/// samples contribute zero. Unlike boltzmann_weights, the shift `g_ref` is
/// fixed rather than data dependent, so the estimate is unbiased.
double unbiased_objective_estimate(const Dataset& data, const BoltzmannSpec& spec,
                                   const Density& density, double g_ref = 0.0);

struct McEstimate {
  double value = 0.0;
  double standard_error = 0.0;
};

struct ExpectedGEstimate {
  double value = 0.0;
  double standard_error = 0.0;
  double infeasible_fraction = 0.0;
};

/// Sample mean of G over n fresh draws from q, using noise-free diagnostic
/// evaluations. Infeasible draws are excluded and reported as a fraction.
ExpectedGEstimate expected_g_diagnostic(const Density& density, const Oracle& oracle, Rng& rng,
                                        std::size_t n = 1000);

/// Normalized Boltzmann density exp(-beta (G - G_opt)) / Z on a benchmark's
/// feasible box, with Z from midpoint quadrature. Two-dimensional benchmarks only.
class BoltzmannDensity {
 public:
  static constexpr int kDefaultGrid = 512;
  static constexpr std::size_t kDefaultRetryCap = 1'000'000;

  BoltzmannDensity(const Oracle& oracle, const BoltzmannSpec& spec, int grid = kDefaultGrid,
                   std::size_t retry_cap = kDefaultRetryCap);

  double log_density(const Point& x) const;
  /// Rejection sampling from the uniform box; throws SamplerExhaustedError
  /// after `retry_cap` rejections.
  Point sample(Rng& rng) const;
  double log_normalizer() const { return log_z_; }
  int dimension() const { return 2; }

 private:
  const Oracle* oracle_;
  double beta_;
  double g_opt_;
  BoxDomain box_;
  std::size_t retry_cap_;
  double log_z_ = 0.0;
};

/// Monte Carlo KL(p_beta || q): mean of ln p(x) - ln q(x) over x ~ p_beta.
template <SampleableDensity Q>
McEstimate kl_pq_diagnostic(const BoltzmannDensity& target, const Q& q, Rng& rng,
                            std::size_t n = 1000) {
  if (n < 2) throw InvalidArgument("KL diagnostic needs n >= 2");
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point x = target.sample(rng);
    const double d = target.log_density(x) - q.log_density(x);
    sum += d;
    sum_sq += d * d;
  }
  const double mean = sum / static_cast<double>(n);
  const double var = std::max(0.0, sum_sq / static_cast<double>(n) - mean * mean) *
                     static_cast<double>(n) / static_cast<double>(n - 1);
  return {mean, std::sqrt(var / static_cast<double>(n))};
}

template <SampleableDensity Q>
McEstimate kl_pq_diagnostic(const BoltzmannSpec& spec, const Oracle& oracle, const Q& q, Rng& rng,
                            std::size_t n = 1000) {
  return kl_pq_diagnostic(BoltzmannDensity(oracle, spec), q, rng, n);
}

}  // namespace pcopt
