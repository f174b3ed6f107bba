#pragma once

#include <functional>
#include <vector>

#include "pcopt/common.hpp"
#include "pcopt/density.hpp"
#include "pcopt/fit.hpp"
#include "pcopt/oracle.hpp"
#include "pcopt/target.hpp"

namespace pcopt {

/// Feasibility mask Phi: 1 on feasible points, `kappa` elsewhere (0 = hard).
class FeasibilityMask {
 public:
  using Indicator = std::function<bool(const Point&)>;

  explicit FeasibilityMask(Indicator indicator, double kappa = 0.0);

  static FeasibilityMask everywhere();
  static FeasibilityMask box(const BoxDomain& box, double kappa = 0.0);

  double operator()(const Point& x) const { return indicator_(x) ? 1.0 : kappa_; }
  bool feasible(const Point& x) const { return indicator_(x); }
  double kappa() const { return kappa_; }

 private:
  Indicator indicator_;
  double kappa_;
};

struct NormalizerEstimate {
  double value = 0.0;
  double standard_error = 0.0;
};

/// Monte Carlo estimate of integral q~(x) Phi(x) dx: the mean of Phi over n
/// draws from the base density.
NormalizerEstimate estimate_normalizer(const Density& base, const FeasibilityMask& mask,
                                       std::size_t n, Rng& rng);

inline constexpr std::size_t kDefaultMaxRejects = 100'000;

/// Draw from base * Phi by thinning: keep x' with probability Phi(x').
/// Points with Phi = 1 are accepted without consuming a coin flip, so an
/// all-feasible mask reproduces base.sample() exactly.
Point sample_masked(const Density& base, const FeasibilityMask& mask, Rng& rng,
                    std::size_t max_rejects = kDefaultMaxRejects);

/// q~ Phi / Z with Z estimated by Monte Carlo.
struct MaskedDensity {
  Density base;
  FeasibilityMask mask;
  NormalizerEstimate normalizer;

  double log_density(const Point& x) const;
  Point sample(Rng& rng) const { return sample_masked(base, mask, rng); }
  int dimension() const { return base.dimension(); }
};

enum class ConstrainedMode {
  /// Weighted fit with weights s * Phi; drops the normalizer term.
  KlOnly,
  /// Starts from the KlOnly fit and ascends the full objective, including
  /// -ln integral q~ Phi.
  Corrected,
};

/// Fixed standard-normal and uniform draws shared by every normalizer
/// evaluation in one ascent (common random numbers).
struct NormalizerDraws {
  std::vector<Eigen::VectorXd> normals;
  std::vector<double> uniforms;
};

NormalizerDraws draw_normalizer_draws(int dimension, std::size_t n, Rng& rng);

/// sum w ln q~(x) / sum w - ln(mean_k Phi(x_k)), with x_k the draws pushed
/// through `base`. -inf when no draw lands in the feasible region.
double corrected_objective(const WeightedPoints& data, const Density& base,
                           const FeasibilityMask& mask, const NormalizerDraws& draws);

struct ConstrainedOptions {
  std::size_t normalizer_samples = 2000;
  int max_ascent_steps = 50;
};

struct ConstrainedFitResult {
  MaskedDensity density;
  /// Objective of the KlOnly initializer on `draws`.
  double initial_objective = 0.0;
  /// Objective of the returned base on `draws`.
  double objective = 0.0;
  int ascent_steps = 0;
  NormalizerDraws draws;
};

/// Fits a masked density to the Boltzmann target restricted by `mask`.
/// Corrected mode runs derivative-free coordinate ascent over a shared mean
/// shift and per-axis log scales of the covariance.
ConstrainedFitResult constrained_fit(const Dataset& data, const BoltzmannSpec& spec,
                                     const FeasibilityMask& mask, const ModelSpec& model,
                                     ConstrainedMode mode, const FitOptions& fit_options, Rng& rng,
                                     const ConstrainedOptions& options = {});

}  // namespace pcopt
