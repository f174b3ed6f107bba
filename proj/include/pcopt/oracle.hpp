#pragma once

#include <atomic>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>

#include "pcopt/common.hpp"

namespace pcopt {

/// Open infinity-norm box {x : |x|_inf < half_width}.
struct BoxDomain {
  double half_width = 1.0;
  int dimension = 2;

  BoxDomain() = default;
  BoxDomain(double half_width, int dimension);

  bool contains(const Point& x) const;
  double volume() const;
};

struct OracleResponse {
  double g = std::numeric_limits<double>::infinity();
  bool feasible = false;

  static OracleResponse infeasible() { return {}; }
  static OracleResponse value(double g) { return {g, true}; }
};

enum class Benchmark { Quadratic2d, Rosenbrock2d, Woods4d };

std::string_view benchmark_id(Benchmark b);
/// Parses `quadratic2d`, `rosenbrock2d` or `woods4d`.
Benchmark parse_benchmark(std::string_view id);

struct BenchmarkInfo {
  int dimension;
  /// Feasible region; empty when the objective is defined on all of R^n.
  std::optional<BoxDomain> feasible_box;
  /// Box the first uniform batch is drawn from.
  BoxDomain sampling_box;
  Point minimizer;
  double minimum;
};

BenchmarkInfo benchmark_info(Benchmark b);

// Noise-free benchmark objectives. Each throws InvalidArgument on a dimension
// mismatch and returns an infeasible response outside its box.

/// x1^2 + x2^2 + x1 x2 on |x|_inf < b.
OracleResponse eval_quadratic(const Point& x, const BoxDomain& box = BoxDomain(1.0, 2));
/// 100 (x2 - x1^2)^2 + (1 - x1)^2 on |x|_inf < b.
OracleResponse eval_rosenbrock(const Point& x, const BoxDomain& box = BoxDomain(4.0, 2));
/// The four-dimensional Woods variant whose first term is 100 (x2 - x1)^2.
/// Unconstrained.
OracleResponse eval_woods(const Point& x);

OracleResponse evaluate(Benchmark b, const Point& x);

enum class QueryKind {
  /// Counts against the oracle budget.
  Counted,
  /// Reporting only: noise-free and not counted.
  Diagnostic,
};

/// Oracle handle: a benchmark with optional additive noise U[-a, a] and a call
/// counter. The counter is atomic so one handle may be shared between tasks.
class Oracle {
 public:
  explicit Oracle(Benchmark benchmark, double noise_half_width = 0.0);

  Oracle(const Oracle&) = delete;
  Oracle& operator=(const Oracle&) = delete;

  OracleResponse query(const Point& x, Rng& rng, QueryKind kind = QueryKind::Counted);

  /// Diagnostic evaluation; never touches the counter or the noise stream.
  OracleResponse diagnostic(const Point& x) const;

  std::uint64_t call_count() const { return calls_.load(); }
  Benchmark benchmark() const { return benchmark_; }
  double noise_half_width() const { return noise_half_width_; }
  int dimension() const { return info_.dimension; }
  const BenchmarkInfo& info() const { return info_; }

 private:
  Benchmark benchmark_;
  double noise_half_width_;
  BenchmarkInfo info_;
  std::atomic<std::uint64_t> calls_{0};
};

}  // namespace pcopt
