#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pcopt/fbmc.hpp"
#include "pcopt/oracle.hpp"
#include "pcopt/risk.hpp"

namespace pcopt {

/// Box mean of a 2-D benchmark by midpoint quadrature on a grid x grid mesh.
double box_mean_quadrature(Benchmark b, int grid = 512);

struct FbmcDemoResult {
  double truth = 0.0;
  /// Plain importance-sampling estimate from the factual samples.
  double is_estimate = 0.0;
  /// Fit-based estimate from fictitious samples of the quadratic surrogate.
  double fb_estimate = 0.0;
  std::uint64_t factual_calls = 0;
};

/// Estimates the mean of G over the feasible box of a 2-D benchmark from
/// n_factual uniform oracle samples, both directly and through a quadratic fit.
FbmcDemoResult fbmc_demo(Benchmark b, std::size_t n_factual, std::size_t n_fictitious,
                         std::uint64_t seed);

struct EliteDemoResult {
  SurrogateFit fit;
  std::vector<std::string> names;
  std::vector<double> estimates;
  std::size_t selected = 0;
};

/// Candidate search densities on a quadratic surrogate of the Rosenbrock
/// function: a diffuse Gaussian and a narrow Gaussian at the surrogate
/// minimum, and a narrow Gaussian away from it. h_c is their equal mixture.
EliteDemoResult elite_demo(int k, std::size_t n_tuples, std::uint64_t seed);

}  // namespace pcopt
