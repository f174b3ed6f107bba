#include "pcopt/demos.hpp"

#include <cmath>
#include <random>

#include "pcopt/density.hpp"

namespace pcopt {

namespace {

constexpr std::size_t kEliteFactualSamples = 60;
constexpr double kNarrowScale = 0.01;

}  // namespace

double box_mean_quadrature(Benchmark b, int grid) {
  const BenchmarkInfo info = benchmark_info(b);
  if (info.dimension != 2 || !info.feasible_box) {
    throw InvalidArgument("quadrature needs a boxed 2-D benchmark");
  }
  if (grid < 1) throw InvalidArgument("grid must be >= 1");
  const double w = info.feasible_box->half_width;
  const double h = 2.0 * w / grid;
  double sum = 0.0;
  Point x(2);
  for (int i = 0; i < grid; ++i) {
    x[0] = -w + (i + 0.5) * h;
    for (int j = 0; j < grid; ++j) {
      x[1] = -w + (j + 0.5) * h;
      sum += evaluate(b, x).g;
    }
  }
  return sum / (static_cast<double>(grid) * grid);
}

FbmcDemoResult fbmc_demo(Benchmark b, std::size_t n_factual, std::size_t n_fictitious,
                         std::uint64_t seed) {
  const BenchmarkInfo info = benchmark_info(b);
  if (info.dimension != 2 || !info.feasible_box) {
    throw InvalidArgument("fbmc demo needs a boxed 2-D benchmark");
  }
  if (n_factual < quadratic_coefficient_count(2)) {
    throw InvalidArgument("fbmc demo needs at least 6 factual samples for a quadratic fit");
  }
  Oracle oracle(b);
  Rng sampling = derive_stream(seed, 1);
  Rng noise = derive_stream(seed, 2);
  Rng fictitious = derive_stream(seed, 3);
  const UniformBoxDensity h(*info.feasible_box);

  std::vector<Point> xs;
  std::vector<double> gs;
  double sum = 0.0;
  for (std::size_t i = 0; i < n_factual; ++i) {
    xs.push_back(h.sample(sampling));
    gs.push_back(oracle.query(xs.back(), noise).g);
    sum += gs.back();
  }
  FbmcDemoResult r;
  r.truth = box_mean_quadrature(b);
  r.is_estimate = sum / static_cast<double>(n_factual);
  const std::uint64_t calls = oracle.call_count();
  r.fb_estimate = fb_integral_estimate(fit_surface(xs, gs), h, n_fictitious, fictitious);
  if (oracle.call_count() != calls) throw std::logic_error("fit-based estimate queried the oracle");
  r.factual_calls = calls;
  return r;
}

EliteDemoResult elite_demo(int k, std::size_t n_tuples, std::uint64_t seed) {
  if (k < 1) throw InvalidArgument("K must be >= 1");
  if (n_tuples < 1) throw InvalidArgument("N_T must be >= 1");
  const Benchmark b = Benchmark::Rosenbrock2d;
  const BenchmarkInfo info = benchmark_info(b);
  const double w = info.feasible_box->half_width;
  Oracle oracle(b);
  Rng sampling = derive_stream(seed, 1);
  Rng noise = derive_stream(seed, 2);
  Rng tuples = derive_stream(seed, 3);

  const UniformBoxDensity h(*info.feasible_box);
  std::vector<Point> xs;
  std::vector<double> gs;
  for (std::size_t i = 0; i < kEliteFactualSamples; ++i) {
    xs.push_back(h.sample(sampling));
    gs.push_back(oracle.query(xs.back(), noise).g);
  }
  EliteDemoResult r;
  r.fit = fit_surface(xs, gs);

  // Surrogate minimum over a coarse grid of the box.
  Point best = Point::Zero(2);
  double best_v = r.fit.value(best);
  constexpr int kGrid = 201;
  for (int i = 0; i < kGrid; ++i) {
    for (int j = 0; j < kGrid; ++j) {
      Point x(2);
      x << -w + 2.0 * w * i / (kGrid - 1), -w + 2.0 * w * j / (kGrid - 1);
      if (const double v = r.fit.value(x); v < best_v) {
        best_v = v;
        best = x;
      }
    }
  }
  Point away = best;
  away[0] = best[0] > 0.0 ? best[0] - w : best[0] + w;

  const Matrix eye = Matrix::Identity(2, 2);
  const double narrow = kNarrowScale * w;
  std::vector<Density> candidates = {
      GaussianDensity(best, (0.25 * w) * (0.25 * w) * eye),
      GaussianDensity(best, narrow * narrow * eye),
      GaussianDensity(away, narrow * narrow * eye),
  };
  r.names = {"diffuse at surrogate minimum", "narrow at surrogate minimum",
             "narrow away from minimum"};
  std::vector<GaussianDensity> comps;
  for (const auto& c : candidates) comps.push_back(c.get<GaussianDensity>());
  const Density h_c = MixtureDensity(std::vector<double>(comps.size(), 1.0 / comps.size()), comps);
  const NoiseKernel kernel = NoiseKernel::defaults_for(r.fit, w);
  const EliteSelection sel = elite_select(candidates, h_c, r.fit, kernel, k, n_tuples, tuples);
  r.estimates = sel.estimates;
  r.selected = sel.index;
  return r;
}

}  // namespace pcopt
