#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace pcopt {

/// A location in the search space.
using Point = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Random stream used throughout the library. Every stochastic operation takes
/// one explicitly; there is no hidden global state.
using Rng = std::mt19937_64;

/// Derives an independent stream seed from a base seed and a task coordinate,
/// e.g. (seed, restart) or (seed, fold, candidate).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

inline Rng derive_stream(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
  return Rng(derive_seed(base, a, b));
}

// Error taxonomy. Argument and precondition failures derive from
// std::invalid_argument; runtime conditions from std::runtime_error.

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// No sample carries positive importance weight.
class EmptySupportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A self-normalized estimate has a zero denominator.
class UndefinedScoreError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A rejection sampler ran past its retry cap.
class SamplerExhaustedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Least-squares design matrix is rank deficient.
class DegenerateDesignError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A covariance matrix could not be factorized.
class FactorizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Monte Carlo mask normalizer came out as zero.
class EmptyFeasibleMassError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Warnings are off by default; the CLI turns them on with --verbose.
void set_warnings_enabled(bool enabled);
void warn(const std::string& message);

}  // namespace pcopt
