#include "pcopt/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace pcopt {

double HoldoutScore::value() const {
  if (!defined()) throw UndefinedScoreError("held-out score has no support");
  return raw;
}

HoldoutScore holdout_performance(std::span<const Sample> validation, const Density& density) {
  if (validation.empty()) throw InvalidArgument("holdout_performance needs validation samples");
  // log(q/h) per feasible sample; the max is subtracted before exponentiating,
  // which the ratio form absorbs.
  std::vector<double> log_ratio;
  std::vector<double> g;
  log_ratio.reserve(validation.size());
  g.reserve(validation.size());
  double mx = -std::numeric_limits<double>::infinity();
  for (const auto& s : validation) {
    if (!s.feasible) continue;
    const double lr = density.log_density(s.location) - s.log_proposal;
    if (lr == -std::numeric_limits<double>::infinity()) continue;
    log_ratio.push_back(lr);
    g.push_back(s.g);
    mx = std::max(mx, lr);
  }
  HoldoutScore score;
  score.effective_support = log_ratio.size();
  if (log_ratio.empty()) return score;
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < log_ratio.size(); ++i) {
    const double w = std::exp(log_ratio[i] - mx);
    num += w * g[i];
    den += w;
  }
  score.raw = num / den;
  return score;
}

double unbiased_objective_estimate(const Dataset& data, const BoltzmannSpec& spec,
                                   const Density& density, double g_ref) {
  if (data.empty()) throw InvalidArgument("unbiased_objective_estimate needs data");
  if (data.feasible_count() == 0) throw EmptySupportError("no feasible samples");
  double acc = 0.0;
  for (const auto& s : data.samples()) {
    if (!s.feasible) continue;
    const double w = std::exp(-spec.beta * (s.g - g_ref) - s.log_proposal);
    if (w == 0.0) continue;
    acc += w * -density.log_density(s.location);
  }
  return acc / static_cast<double>(data.size());
}

ExpectedGEstimate expected_g_diagnostic(const Density& density, const Oracle& oracle, Rng& rng,
                                        std::size_t n) {
  if (n < 1) throw InvalidArgument("expected_g_diagnostic needs n >= 1");
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t feasible = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const OracleResponse r = oracle.diagnostic(density.sample(rng));
    if (!r.feasible) continue;
    ++feasible;
    sum += r.g;
    sum_sq += r.g * r.g;
  }
  if (feasible == 0) throw UndefinedScoreError("every diagnostic draw was infeasible");
  ExpectedGEstimate e;
  const double k = static_cast<double>(feasible);
  e.value = sum / k;
  e.standard_error =
      feasible > 1 ? std::sqrt(std::max(0.0, (sum_sq / k - e.value * e.value) / (k - 1.0))) : 0.0;
  e.infeasible_fraction = 1.0 - k / static_cast<double>(n);
  return e;
}

BoltzmannDensity::BoltzmannDensity(const Oracle& oracle, const BoltzmannSpec& spec, int grid,
                                   std::size_t retry_cap)
    : oracle_(&oracle),
      beta_(spec.beta),
      g_opt_(oracle.info().minimum),
      box_(oracle.info().sampling_box),
      retry_cap_(retry_cap) {
  if (oracle.dimension() != 2 || !oracle.info().feasible_box) {
    throw InvalidArgument("Boltzmann density is only available for boxed 2-D benchmarks");
  }
  if (grid < 2) throw InvalidArgument("quadrature grid must have at least 2 cells per axis");
  box_ = *oracle.info().feasible_box;
  const double h = 2.0 * box_.half_width / grid;
  // Midpoint rule, accumulated relative to the largest term.
  std::vector<double> log_terms;
  log_terms.reserve(static_cast<std::size_t>(grid) * static_cast<std::size_t>(grid));
  double mx = -std::numeric_limits<double>::infinity();
  Point x(2);
  for (int i = 0; i < grid; ++i) {
    x[0] = -box_.half_width + (i + 0.5) * h;
    for (int j = 0; j < grid; ++j) {
      x[1] = -box_.half_width + (j + 0.5) * h;
      const OracleResponse r = oracle.diagnostic(x);
      if (!r.feasible) continue;
      const double t = -beta_ * (r.g - g_opt_);
      log_terms.push_back(t);
      mx = std::max(mx, t);
    }
  }
  double s = 0.0;
  for (double t : log_terms) s += std::exp(t - mx);
  log_z_ = mx + std::log(s * h * h);
}

double BoltzmannDensity::log_density(const Point& x) const {
  const OracleResponse r = oracle_->diagnostic(x);
  if (!r.feasible) return -std::numeric_limits<double>::infinity();
  return -beta_ * (r.g - g_opt_) - log_z_;
}

Point BoltzmannDensity::sample(Rng& rng) const {
  const UniformBoxDensity proposal(box_);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t attempt = 0; attempt < retry_cap_; ++attempt) {
    Point x = proposal.sample(rng);
    const OracleResponse r = oracle_->diagnostic(x);
    if (!r.feasible) continue;
    if (unit(rng) < std::exp(-beta_ * (r.g - g_opt_))) return x;
  }
  throw SamplerExhaustedError("Boltzmann rejection sampler exceeded its retry cap");
}

}  // namespace pcopt
