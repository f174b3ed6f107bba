#include "pcopt/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>

#include <Eigen/QR>

#include "pcopt/estimator.hpp"

namespace pcopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Scale-aware zero test for least-squares coefficients.
double coefficient_tolerance(const std::vector<double>& ys) {
  double m = 1.0;
  for (double y : ys) m = std::max(m, std::abs(y));
  return 1e-10 * m;
}

QuadraticFit fit_quadratic(const std::vector<double>& ts, const std::vector<double>& ys) {
  QuadraticFit q;
  if (ts.size() < 3) return q;
  const auto n = static_cast<Eigen::Index>(ts.size());
  Matrix design(n, 3);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = ts[static_cast<std::size_t>(i)];
    design(i, 0) = t * t;
    design(i, 1) = t;
    design(i, 2) = 1.0;
    rhs[i] = ys[static_cast<std::size_t>(i)];
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(design);
  if (qr.rank() < 3) return q;
  const Eigen::VectorXd coef = qr.solve(rhs);
  q.a = coef[0];
  q.b = coef[1];
  q.c = coef[2];
  q.convex = q.a > coefficient_tolerance(ys);
  return q;
}

double fit_line_slope(const std::vector<double>& ts, const std::vector<double>& ys) {
  const double n = static_cast<double>(ts.size());
  const double mt = std::accumulate(ts.begin(), ts.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    sxy += (ts[i] - mt) * (ys[i] - my);
    sxx += (ts[i] - mt) * (ts[i] - mt);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

struct FoldSplit {
  std::vector<Sample> training;
  std::vector<Sample> validation;
};

std::vector<FoldSplit> make_splits(std::span<const Sample> samples, int folds, Rng& rng) {
  const auto parts = kfold_partition(samples.size(), folds, rng);
  std::vector<FoldSplit> splits;
  splits.reserve(parts.size());
  std::vector<int> owner(samples.size());
  for (std::size_t k = 0; k < parts.size(); ++k) {
    for (std::size_t i : parts[k]) owner[i] = static_cast<int>(k);
  }
  for (std::size_t k = 0; k < parts.size(); ++k) {
    FoldSplit s;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      (owner[i] == static_cast<int>(k) ? s.validation : s.training).push_back(samples[i]);
    }
    splits.push_back(std::move(s));
  }
  return splits;
}

// Held-out score of `model` fitted on `split.training` at beta; nullopt when
// the fold cannot be scored.
std::optional<double> fold_score(const FoldSplit& split, double beta, const ModelSpec& model,
                                 const FitOptions& options, Rng& rng) {
  try {
    const WeightedPoints wp = weighted_view(split.training, BoltzmannSpec(beta));
    const FitResult fit = fit_model(wp, model, options, rng);
    const HoldoutScore s = holdout_performance(split.validation, fit.density);
    if (!s.defined()) return std::nullopt;
    return s.raw;
  } catch (const EmptySupportError&) {
    return std::nullopt;
  }
}

}  // namespace

void BetaCvConfig::validate() const {
  if (!(k1 > 0.0 && k1 < 1.0 && k2 > 1.0)) {
    throw InvalidArgument("beta CV needs 0 < k1 < 1 < k2");
  }
  if (n_beta < 3) throw InvalidArgument("beta CV needs n_beta >= 3");
  if (folds < 2) throw InvalidArgument("beta CV needs at least 2 folds");
  if (max_ext_iter < 0) throw InvalidArgument("maxExtIter must be >= 0");
}

std::vector<std::vector<std::size_t>> kfold_partition(std::size_t n, int folds, Rng& rng) {
  if (folds < 1) throw InvalidArgument("need at least one fold");
  if (n < static_cast<std::size_t>(folds)) {
    throw InvalidArgument("cannot split " + std::to_string(n) + " samples into " +
                          std::to_string(folds) + " folds");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> parts(static_cast<std::size_t>(folds));
  for (std::size_t i = 0; i < n; ++i) parts[i % parts.size()].push_back(order[i]);
  for (auto& p : parts) std::sort(p.begin(), p.end());
  return parts;
}

BetaCvResult select_beta(const BetaScorer& scorer, double beta0, const BetaCvConfig& cfg,
                         Rng& rng) {
  cfg.validate();
  if (!(beta0 > 0.0) || !std::isfinite(beta0)) throw InvalidArgument("beta0 must be positive");
  BetaCvResult result;
  double b0 = beta0;
  int ext = 0;
  while (true) {
    BetaCvStep step;
    step.beta0 = b0;
    for (int i = 0; i < cfg.n_beta; ++i) {
      const double t = cfg.k1 + (cfg.k2 - cfg.k1) * i / (cfg.n_beta - 1);
      step.betas.push_back(t * b0);
    }
    step.scores = scorer(step.betas, rng);
    if (step.scores.size() != step.betas.size()) {
      throw InvalidArgument("beta scorer returned the wrong number of scores");
    }

    std::vector<double> ts;
    std::vector<double> ys;
    for (std::size_t i = 0; i < step.betas.size(); ++i) {
      if (std::isfinite(step.scores[i])) {
        ts.push_back(step.betas[i] / b0);
        ys.push_back(step.scores[i]);
      }
    }
    if (ts.empty()) {
      warn("no beta candidate had a defined held-out score; keeping beta = " + std::to_string(b0));
      step.beta_star = b0;
      result.steps.push_back(step);
      result.fell_back = true;
      break;
    }

    step.quadratic = fit_quadratic(ts, ys);
    double t_star;
    if (step.quadratic.convex) {
      t_star = std::clamp(-step.quadratic.b / (2.0 * step.quadratic.a), cfg.k1, cfg.k2);
    } else if (ts.size() >= 2) {
      const double slope = fit_line_slope(ts, ys);
      t_star = slope < -coefficient_tolerance(ys) ? cfg.k2 : cfg.k1;
    } else {
      t_star = ts.front();
    }
    step.beta_star = t_star * b0;
    result.steps.push_back(step);

    ++ext;
    b0 = step.beta_star;
    if (ext > cfg.max_ext_iter || step.quadratic.convex) break;
  }
  result.beta_star = result.steps.back().beta_star;
  return result;
}

std::vector<double> crossvalidated_beta_scores(std::span<const Sample> samples,
                                               std::span<const double> betas, int folds,
                                               const ModelSpec& model, const FitOptions& options,
                                               Rng& rng) {
  const auto splits = make_splits(samples, folds, rng);
  const std::uint64_t base = rng();
  std::vector<double> scores;
  scores.reserve(betas.size());
  for (std::size_t i = 0; i < betas.size(); ++i) {
    double sum = 0.0;
    int defined = 0;
    for (std::size_t k = 0; k < splits.size(); ++k) {
      Rng stream = derive_stream(base, k, i);
      if (auto s = fold_score(splits[k], betas[i], model, options, stream)) {
        sum += *s;
        ++defined;
      }
    }
    scores.push_back(defined > 0 ? sum / defined : kInf);
  }
  return scores;
}

BetaCvResult crossvalidate_beta(const Dataset& data, double beta0, const BetaCvConfig& cfg,
                                const ModelSpec& model, const FitOptions& options, Rng& rng) {
  if (data.empty()) throw InvalidArgument("crossvalidate_beta needs data");
  const auto samples = data.samples();
  const BetaScorer scorer = [&](std::span<const double> betas, Rng& r) {
    return crossvalidated_beta_scores(samples, betas, cfg.folds, model, options, r);
  };
  return select_beta(scorer, beta0, cfg, rng);
}

ModelCvResult crossvalidate_model(const Dataset& data, const BoltzmannSpec& spec,
                                  std::span<const ModelSpec> candidates, int folds,
                                  const FitOptions& options, Rng& rng) {
  if (candidates.empty()) throw InvalidArgument("crossvalidate_model needs candidates");
  if (data.empty()) throw InvalidArgument("crossvalidate_model needs data");
  const auto splits = make_splits(data.samples(), folds, rng);
  const std::uint64_t base = rng();

  ModelCvResult result;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    double sum = 0.0;
    int defined = 0;
    for (std::size_t k = 0; k < splits.size(); ++k) {
      Rng stream = derive_stream(base, k, c);
      if (auto s = fold_score(splits[k], spec.beta, candidates[c], options, stream)) {
        sum += *s;
        ++defined;
      }
    }
    result.scores.push_back(defined > 0 ? sum / defined : kInf);
  }
  const bool any_defined = std::any_of(result.scores.begin(), result.scores.end(),
                                       [](double s) { return std::isfinite(s); });
  if (!any_defined) {
    warn("no model candidate had a defined held-out score; keeping the first candidate");
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < candidates.size(); ++c) {
    const double sc = result.scores[c];
    const double sb = result.scores[best];
    if (sc < sb || (sc == sb && candidates[c].components < candidates[best].components)) best = c;
  }
  result.selected_index = best;
  result.selected = candidates[best];
  return result;
}

MixtureDensity bagged_fit(const Dataset& data, const BoltzmannSpec& spec, const ModelSpec& model,
                          const BaggingConfig& cfg, const FitOptions& options, Rng& rng) {
  if (data.empty()) throw InvalidArgument("bagged_fit needs data");
  if (cfg.replicates < 1) throw InvalidArgument("bagging needs at least one replicate");
  constexpr int kMaxRedraws = 10;
  const auto samples = data.samples();
  const std::size_t n = samples.size();
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);

  std::vector<double> weights;
  std::vector<GaussianDensity> comps;
  const double outer = 1.0 / cfg.replicates;
  for (int b = 0; b < cfg.replicates; ++b) {
    std::optional<FitResult> fit;
    for (int attempt = 0; attempt <= kMaxRedraws && !fit; ++attempt) {
      std::vector<std::size_t> idx(n);
      for (auto& i : idx) i = pick(rng);
      const auto replicate = select_samples(samples, idx);
      try {
        fit = fit_model(weighted_view(replicate, spec), model, options, rng);
      } catch (const EmptySupportError&) {
        warn("bootstrap replicate had no feasible support; redrawing");
      }
    }
    if (!fit) throw EmptySupportError("bootstrap replicate kept drawing empty feasible support");
    if (fit->density.holds<GaussianDensity>()) {
      weights.push_back(outer);
      comps.push_back(fit->density.get<GaussianDensity>());
    } else {
      const auto& mix = fit->density.get<MixtureDensity>();
      for (std::size_t j = 0; j < mix.size(); ++j) {
        weights.push_back(outer * mix.weights()[j]);
        comps.push_back(mix.components()[j]);
      }
    }
  }
  return MixtureDensity(std::move(weights), std::move(comps));
}

}  // namespace pcopt
