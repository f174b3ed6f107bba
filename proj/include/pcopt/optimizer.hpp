#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pcopt/common.hpp"
#include "pcopt/density.hpp"
#include "pcopt/fit.hpp"
#include "pcopt/oracle.hpp"
#include "pcopt/schedule.hpp"
#include "pcopt/target.hpp"

namespace pcopt {

struct FixedBeta {
  double beta = 1.0;
};

/// beta_1 = beta_init, beta_t = factor * beta_{t-1}.
struct MultiplicativeBeta {
  double beta_init = 1.0;
  double factor = 1.5;
};

/// beta_1 = beta_init; later iterations cross-validate starting from the
/// previous beta.
struct CrossValidatedBeta {
  double beta_init = 1.0;
  BetaCvConfig cv;
};

using BetaSchedule = std::variant<FixedBeta, MultiplicativeBeta, CrossValidatedBeta>;

struct FixedModel {
  ModelSpec model = ModelSpec::single_gaussian();
};

/// Cross-validated choice among candidates, run after beta each iteration.
struct CrossValidatedModel {
  std::vector<ModelSpec> candidates;
  int folds = 10;
};

using ModelPolicy = std::variant<FixedModel, CrossValidatedModel>;

struct RunConfig {
  Benchmark benchmark = Benchmark::Quadratic2d;
  int iterations = 6;
  int batch_size = 30;
  BetaSchedule schedule = FixedBeta{5.0};
  ModelPolicy model_policy = FixedModel{};
  std::optional<BaggingConfig> bagging;
  double noise_half_width = 0.0;
  std::uint64_t seed = 1;
  bool diagnostics = true;
  /// KL diagnostic; only computed for boxed 2-D benchmarks.
  bool kl_diagnostic = true;
  std::size_t diagnostic_samples = 1000;
  /// Optional budget stop; the run ends before a batch would exceed it.
  std::optional<std::uint64_t> max_oracle_calls;
  EmConfig em;

  void validate() const;
};

struct IterationRecord {
  int iteration = 0;
  double beta = 0.0;
  Density density;
  ModelSpec model;
  std::optional<double> e_qg;
  std::optional<double> kl_pq;
  std::uint64_t oracle_calls = 0;
  double best_g = 0.0;
  std::size_t pooled_size = 0;
  /// Counted oracle calls made by the schedule, model selection and fit
  /// steps of this iteration. Always zero.
  std::uint64_t fit_stage_calls = 0;
  /// Fit failed for lack of feasible support; `density` is the widened
  /// proposal used for the next batch.
  bool widened = false;
};

struct RunHistory {
  Benchmark benchmark = Benchmark::Quadratic2d;
  std::vector<IterationRecord> records;
  bool aborted = false;
  std::string abort_reason;
};

/// Runs the immediate-sampling loop against `oracle`. Each iteration draws a
/// batch from the current proposal, updates beta, selects a model, fits it to
/// the pooled weighted data and makes the fit the next proposal.
RunHistory run(const RunConfig& cfg, Oracle& oracle);

/// Same, with a fresh oracle built from the config.
RunHistory run(const RunConfig& cfg);

/// n draws from the final fitted density, rejecting points outside the
/// benchmark's feasible box.
std::vector<Point> final_solutions(const RunHistory& history, std::size_t n, Rng& rng,
                                   std::size_t max_rejects = 100'000);

}  // namespace pcopt
