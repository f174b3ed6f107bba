#include "pcopt/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pcopt/constrained.hpp"
#include "pcopt/estimator.hpp"

namespace pcopt {

namespace {

// Stream identifiers; each concern draws from its own stream so that turning
// diagnostics on or off leaves the optimization trajectory untouched.
enum Stream : std::uint64_t { kSampling = 1, kNoise, kFit, kSchedule, kDiagnostics };

constexpr int kMaxWidenings = 3;

Density widen(const Density& h) {
  auto doubled = [](const GaussianDensity& g) {
    return GaussianDensity(g.mean(), 2.0 * g.covariance());
  };
  if (h.holds<GaussianDensity>()) return Density(doubled(h.get<GaussianDensity>()));
  if (h.holds<MixtureDensity>()) {
    const auto& mix = h.get<MixtureDensity>();
    std::vector<GaussianDensity> comps;
    for (const auto& c : mix.components()) comps.push_back(doubled(c));
    return Density(MixtureDensity(mix.weights(), std::move(comps)));
  }
  return h;
}

double initial_beta(const BetaSchedule& s) {
  return std::visit(
      [](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, FixedBeta>) {
          return v.beta;
        } else {
          return v.beta_init;
        }
      },
      s);
}

ModelSpec initial_model(const ModelPolicy& p) {
  if (const auto* f = std::get_if<FixedModel>(&p)) return f->model;
  return std::get<CrossValidatedModel>(p).candidates.front();
}

}  // namespace

void RunConfig::validate() const {
  if (iterations < 1) throw InvalidArgument("iterations must be >= 1");
  if (batch_size < 1) throw InvalidArgument("batch_size must be >= 1");
  if (!(noise_half_width >= 0.0)) throw InvalidArgument("noise half-width must be >= 0");
  if (!(initial_beta(schedule) >= 0.0)) throw InvalidArgument("initial beta must be >= 0");
  if (const auto* m = std::get_if<MultiplicativeBeta>(&schedule)) {
    if (!(m->factor > 1.0) || !std::isfinite(m->factor)) {
      throw InvalidArgument("multiplicative beta factor must exceed 1");
    }
  }
  if (const auto* c = std::get_if<CrossValidatedBeta>(&schedule)) {
    c->cv.validate();
    if (!(c->beta_init > 0.0)) throw InvalidArgument("cross-validated beta_init must be > 0");
  }
  if (const auto* f = std::get_if<FixedModel>(&model_policy)) {
    if (f->model.components < 1) throw InvalidArgument("model needs at least one component");
  } else {
    const auto& cv = std::get<CrossValidatedModel>(model_policy);
    if (cv.candidates.empty()) throw InvalidArgument("model cross-validation needs candidates");
    if (cv.folds < 2) throw InvalidArgument("model cross-validation needs >= 2 folds");
  }
  if (bagging && bagging->replicates < 1) throw InvalidArgument("bagging needs >= 1 replicate");
  if (diagnostic_samples < 1) throw InvalidArgument("diagnostic_samples must be >= 1");
  em.validate();
}

RunHistory run(const RunConfig& cfg) {
  Oracle oracle(cfg.benchmark, cfg.noise_half_width);
  return run(cfg, oracle);
}

RunHistory run(const RunConfig& cfg, Oracle& oracle) {
  cfg.validate();
  if (oracle.benchmark() != cfg.benchmark) throw InvalidArgument("oracle does not match config");
  const BenchmarkInfo& info = oracle.info();

  Rng sampling = derive_stream(cfg.seed, kSampling);
  Rng noise = derive_stream(cfg.seed, kNoise);
  Rng fitting = derive_stream(cfg.seed, kFit);
  Rng scheduling = derive_stream(cfg.seed, kSchedule);
  Rng diagnostics = derive_stream(cfg.seed, kDiagnostics);

  FitOptions fit_options;
  fit_options.covariance_floor = covariance_floor(info.sampling_box.half_width);
  fit_options.em = cfg.em;

  const bool kl_available = cfg.kl_diagnostic && info.dimension == 2 && info.feasible_box;

  RunHistory history;
  history.benchmark = cfg.benchmark;
  Dataset data;
  Density proposal = UniformBoxDensity(info.sampling_box);
  double beta = initial_beta(cfg.schedule);
  ModelSpec model = initial_model(cfg.model_policy);
  double best_g = std::numeric_limits<double>::infinity();
  int widenings = 0;

  for (int t = 1; t <= cfg.iterations; ++t) {
    if (cfg.max_oracle_calls &&
        oracle.call_count() + static_cast<std::uint64_t>(cfg.batch_size) > *cfg.max_oracle_calls) {
      break;
    }

    std::vector<Sample> batch;
    batch.reserve(static_cast<std::size_t>(cfg.batch_size));
    for (int i = 0; i < cfg.batch_size; ++i) {
      Sample s;
      s.location = proposal.sample(sampling);
      s.log_proposal = proposal.log_density(s.location);
      const OracleResponse r = oracle.query(s.location, noise);
      s.g = r.g;
      s.feasible = r.feasible;
      if (s.feasible) best_g = std::min(best_g, s.g);
      batch.push_back(std::move(s));
    }
    data.append_batch(std::move(batch));

    const std::uint64_t calls_before_fit = oracle.call_count();

    if (t > 1) {
      if (const auto* m = std::get_if<MultiplicativeBeta>(&cfg.schedule)) {
        beta *= m->factor;
      } else if (const auto* c = std::get_if<CrossValidatedBeta>(&cfg.schedule)) {
        if (data.size() >= static_cast<std::size_t>(c->cv.folds)) {
          beta = crossvalidate_beta(data, beta, c->cv, model, fit_options, scheduling).beta_star;
        }
      }
    }

    if (const auto* cv = std::get_if<CrossValidatedModel>(&cfg.model_policy)) {
      if (data.size() >= static_cast<std::size_t>(cv->folds)) {
        model = crossvalidate_model(data, BoltzmannSpec(beta), cv->candidates, cv->folds,
                                    fit_options, scheduling)
                    .selected;
      }
    }

    std::optional<Density> fitted;
    try {
      const BoltzmannSpec spec(beta);
      if (cfg.bagging) {
        fitted = Density(bagged_fit(data, spec, model, *cfg.bagging, fit_options, fitting));
      } else {
        fitted = fit_model(pooled_weight_view(data, spec), model, fit_options, fitting).density;
      }
    } catch (const EmptySupportError& e) {
      warn(std::string("iteration ") + std::to_string(t) + ": " + e.what() +
           "; widening the proposal");
    }

    const std::uint64_t fit_stage_calls = oracle.call_count() - calls_before_fit;

    if (!fitted) {
      if (++widenings > kMaxWidenings) {
        history.aborted = true;
        history.abort_reason = "no feasible support after " + std::to_string(kMaxWidenings) +
                               " proposal widenings";
        break;
      }
      proposal = widen(proposal);
      history.records.push_back(IterationRecord{t, beta, proposal, model, std::nullopt,
                                                std::nullopt, oracle.call_count(), best_g,
                                                data.size(), fit_stage_calls, true});
      continue;
    }

    IterationRecord rec{t,      beta,        *fitted,     model, std::nullopt, std::nullopt,
                        oracle.call_count(), best_g, data.size(), fit_stage_calls, false};
    if (cfg.diagnostics) {
      try {
        rec.e_qg = expected_g_diagnostic(*fitted, oracle, diagnostics, cfg.diagnostic_samples).value;
      } catch (const UndefinedScoreError&) {
      }
      if (kl_available) {
        try {
          rec.kl_pq = kl_pq_diagnostic(BoltzmannSpec(beta), oracle, *fitted, diagnostics,
                                       std::max<std::size_t>(2, cfg.diagnostic_samples))
                          .value;
        } catch (const SamplerExhaustedError&) {
        }
      }
    }
    history.records.push_back(std::move(rec));
    proposal = *fitted;
  }
  return history;
}

std::vector<Point> final_solutions(const RunHistory& history, std::size_t n, Rng& rng,
                                   std::size_t max_rejects) {
  if (history.records.empty()) throw InvalidArgument("final_solutions needs a non-empty history");
  std::vector<Point> out;
  if (n == 0) return out;
  const BenchmarkInfo info = benchmark_info(history.benchmark);
  const FeasibilityMask mask =
      info.feasible_box ? FeasibilityMask::box(*info.feasible_box) : FeasibilityMask::everywhere();
  const Density& q = history.records.back().density;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(sample_masked(q, mask, rng, max_rejects));
  return out;
}

}  // namespace pcopt
