#pragma once

#include <functional>
#include <span>
#include <vector>

#include "pcopt/common.hpp"
#include "pcopt/density.hpp"
#include "pcopt/fit.hpp"
#include "pcopt/target.hpp"

namespace pcopt {

/// Cross-validation settings for the inverse temperature. Each extension
/// scores `n_beta` equally spaced values on [k1 beta0, k2 beta0].
struct BetaCvConfig {
  double k1 = 0.5;
  double k2 = 2.0;
  int n_beta = 5;
  int folds = 10;
  int max_ext_iter = 4;

  void validate() const;
};

struct BaggingConfig {
  int replicates = 5;
};

/// K disjoint index subsets covering 0..n-1, sizes differing by at most one.
std::vector<std::vector<std::size_t>> kfold_partition(std::size_t n, int folds, Rng& rng);

inline std::vector<std::vector<std::size_t>> kfold_partition(const Dataset& data, int folds,
                                                             Rng& rng) {
  return kfold_partition(data.size(), folds, rng);
}

/// Least-squares polynomial in the normalized coordinate t = beta / beta0.
struct QuadraticFit {
  double a = 0.0;  ///< t^2
  double b = 0.0;  ///< t
  double c = 0.0;
  bool convex = false;
};

/// One pass of the interval-extension loop.
struct BetaCvStep {
  double beta0 = 0.0;
  std::vector<double> betas;
  /// Fold-averaged held-out scores; +inf where undefined.
  std::vector<double> scores;
  QuadraticFit quadratic;
  double beta_star = 0.0;
};

struct BetaCvResult {
  double beta_star = 0.0;
  std::vector<BetaCvStep> steps;
  /// True when no candidate had a defined score and beta0 was retained.
  bool fell_back = false;
};

/// Maps a grid of betas to fold-averaged held-out scores (+inf = undefined).
using BetaScorer = std::function<std::vector<double>(std::span<const double> betas, Rng& rng)>;

/// Interval-extension search for beta driven by an arbitrary scorer: fit a
/// quadratic to (beta, score); if convex take its clipped argmin and stop,
/// otherwise move to the endpoint preferred by a least-squares line (lower
/// endpoint on a flat line) and extend again, until the extension count
/// exceeds `max_ext_iter`.
BetaCvResult select_beta(const BetaScorer& scorer, double beta0, const BetaCvConfig& cfg, Rng& rng);

/// Fold-averaged held-out score for each beta: fit `model` on the training
/// folds at that beta and score the held-out fold. Folds with no defined score
/// are skipped; a beta with no defined fold scores +inf.
std::vector<double> crossvalidated_beta_scores(std::span<const Sample> samples,
                                               std::span<const double> betas, int folds,
                                               const ModelSpec& model, const FitOptions& options,
                                               Rng& rng);

/// Cross-validated beta. Uses only stored samples; never queries the oracle.
BetaCvResult crossvalidate_beta(const Dataset& data, double beta0, const BetaCvConfig& cfg,
                                const ModelSpec& model, const FitOptions& options, Rng& rng);

struct ModelCvResult {
  ModelSpec selected;
  std::size_t selected_index = 0;
  std::vector<double> scores;
};

/// Cross-validated model class at a fixed beta. Lowest fold-averaged score
/// wins; ties go to the smaller component count, then the earlier candidate.
ModelCvResult crossvalidate_model(const Dataset& data, const BoltzmannSpec& spec,
                                  std::span<const ModelSpec> candidates, int folds,
                                  const FitOptions& options, Rng& rng);

/// Bootstrap aggregate: `replicates` resamples of size N with replacement, one
/// fit per resample, combined as a uniform mixture of the fitted densities.
MixtureDensity bagged_fit(const Dataset& data, const BoltzmannSpec& spec, const ModelSpec& model,
                          const BaggingConfig& cfg, const FitOptions& options, Rng& rng);

}  // namespace pcopt
