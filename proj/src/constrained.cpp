#include "pcopt/constrained.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pcopt {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Base density after shifting every mean by `shift` and scaling covariances
// to D Sigma D with D = diag(exp(log_scale)).
Density transformed(const Density& base, const Eigen::VectorXd& shift,
                    const Eigen::VectorXd& log_scale, double floor) {
  const Eigen::VectorXd d = log_scale.array().exp();
  auto one = [&](const GaussianDensity& g) {
    const Matrix cov = d.asDiagonal() * g.covariance() * d.asDiagonal();
    return GaussianDensity(g.mean() + shift, cov, floor);
  };
  if (base.holds<GaussianDensity>()) return Density(one(base.get<GaussianDensity>()));
  if (base.holds<MixtureDensity>()) {
    const auto& mix = base.get<MixtureDensity>();
    std::vector<GaussianDensity> comps;
    for (const auto& c : mix.components()) comps.push_back(one(c));
    return Density(MixtureDensity(mix.weights(), std::move(comps)));
  }
  throw InvalidArgument("corrected constrained fit needs a Gaussian or mixture base");
}

Point push_draw(const Density& base, const Eigen::VectorXd& z, double u) {
  if (base.holds<GaussianDensity>()) return base.get<GaussianDensity>().transform(z);
  const auto& mix = base.get<MixtureDensity>();
  return mix.components()[mix.component_for(u)].transform(z);
}

}  // namespace

FeasibilityMask::FeasibilityMask(Indicator indicator, double kappa)
    : indicator_(std::move(indicator)), kappa_(kappa) {
  if (!indicator_) throw InvalidArgument("feasibility mask needs an indicator");
  if (!(kappa >= 0.0 && kappa <= 1.0)) throw InvalidArgument("kappa must lie in [0, 1]");
}

FeasibilityMask FeasibilityMask::everywhere() {
  return FeasibilityMask([](const Point&) { return true; });
}

FeasibilityMask FeasibilityMask::box(const BoxDomain& box, double kappa) {
  return FeasibilityMask([box](const Point& x) { return box.contains(x); }, kappa);
}

NormalizerEstimate estimate_normalizer(const Density& base, const FeasibilityMask& mask,
                                       std::size_t n, Rng& rng) {
  if (n < 100) throw InvalidArgument("normalizer estimate needs n >= 100");
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = mask(base.sample(rng));
    sum += v;
    sum_sq += v * v;
  }
  const double k = static_cast<double>(n);
  const double mean = sum / k;
  if (mean <= 0.0) throw EmptyFeasibleMassError("no feasible mass observed under the base density");
  const double var = std::max(0.0, sum_sq / k - mean * mean) * k / (k - 1.0);
  return {mean, std::sqrt(var / k)};
}

Point sample_masked(const Density& base, const FeasibilityMask& mask, Rng& rng,
                    std::size_t max_rejects) {
  if (max_rejects < 1) throw InvalidArgument("max_rejects must be >= 1");
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (std::size_t attempt = 0; attempt < max_rejects; ++attempt) {
    Point x = base.sample(rng);
    const double phi = mask(x);
    if (phi >= 1.0) return x;
    if (phi > 0.0 && coin(rng) < phi) return x;
  }
  throw SamplerExhaustedError("masked sampler exceeded its rejection cap");
}

double MaskedDensity::log_density(const Point& x) const {
  const double phi = mask(x);
  if (phi <= 0.0) return kNegInf;
  return base.log_density(x) + std::log(phi) - std::log(normalizer.value);
}

NormalizerDraws draw_normalizer_draws(int dimension, std::size_t n, Rng& rng) {
  NormalizerDraws d;
  d.normals.reserve(n);
  d.uniforms.reserve(n);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    d.normals.push_back(standard_normal(dimension, rng));
    d.uniforms.push_back(unit(rng));
  }
  return d;
}

double corrected_objective(const WeightedPoints& data, const Density& base,
                           const FeasibilityMask& mask, const NormalizerDraws& draws) {
  if (draws.normals.empty()) throw InvalidArgument("corrected objective needs normalizer draws");
  const double first = -weighted_cross_entropy(std::span<const Point>(data.points),
                                               std::span<const double>(data.weights), base);
  double z = 0.0;
  for (std::size_t k = 0; k < draws.normals.size(); ++k) {
    z += mask(push_draw(base, draws.normals[k], draws.uniforms[k]));
  }
  z /= static_cast<double>(draws.normals.size());
  if (z <= 0.0) return kNegInf;
  return first - std::log(z);
}

ConstrainedFitResult constrained_fit(const Dataset& data, const BoltzmannSpec& spec,
                                     const FeasibilityMask& mask, const ModelSpec& model,
                                     ConstrainedMode mode, const FitOptions& fit_options, Rng& rng,
                                     const ConstrainedOptions& options) {
  WeightedPoints wp = pooled_weight_view(data, spec);
  for (std::size_t i = 0; i < wp.size(); ++i) wp.weights[i] *= mask(wp.points[i]);
  if (!(wp.total_weight() > 0.0)) throw EmptySupportError("no feasible weighted samples under the mask");

  FitResult init = fit_model(wp, model, fit_options, rng);
  NormalizerDraws draws = draw_normalizer_draws(init.density.dimension(), options.normalizer_samples, rng);
  const double init_obj = corrected_objective(wp, init.density, mask, draws);

  Density best = init.density;
  double best_obj = init_obj;
  int steps = 0;
  if (mode == ConstrainedMode::Corrected) {
    const int n = init.density.dimension();
    Eigen::VectorXd shift = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd log_scale = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd shift_step(n);
    {
      Eigen::VectorXd sd = Eigen::VectorXd::Zero(n);
      if (init.density.holds<GaussianDensity>()) {
        sd = init.density.get<GaussianDensity>().covariance().diagonal().cwiseSqrt();
      } else {
        for (const auto& c : init.density.get<MixtureDensity>().components()) {
          sd = sd.cwiseMax(c.covariance().diagonal().cwiseSqrt());
        }
      }
      shift_step = 0.25 * sd;
    }
    double scale_step = 0.25;
    for (; steps < options.max_ascent_steps; ++steps) {
      bool improved = false;
      for (int coord = 0; coord < 2 * n; ++coord) {
        for (double sign : {1.0, -1.0}) {
          Eigen::VectorXd s = shift;
          Eigen::VectorXd l = log_scale;
          if (coord < n) {
            s[coord] += sign * shift_step[coord];
          } else {
            l[coord - n] += sign * scale_step;
          }
          Density cand = transformed(init.density, s, l, fit_options.covariance_floor);
          const double obj = corrected_objective(wp, cand, mask, draws);
          if (obj > best_obj + 1e-12) {
            best_obj = obj;
            best = std::move(cand);
            shift = s;
            log_scale = l;
            improved = true;
            break;
          }
        }
      }
      if (!improved) {
        shift_step *= 0.5;
        scale_step *= 0.5;
        if (scale_step < 1e-6) break;
      }
    }
  }

  NormalizerEstimate z = estimate_normalizer(best, mask, std::max<std::size_t>(100, options.normalizer_samples), rng);
  return ConstrainedFitResult{MaskedDensity{std::move(best), mask, z}, init_obj, best_obj, steps,
                              std::move(draws)};
}

}  // namespace pcopt
