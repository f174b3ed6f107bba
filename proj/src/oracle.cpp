#include "pcopt/oracle.hpp"

#include <cmath>
#include <string>

namespace pcopt {

namespace {

void require_dimension(const Point& x, int n, std::string_view name) {
  if (x.size() != n) {
    throw InvalidArgument(std::string(name) + " expects dimension " + std::to_string(n) +
                          ", got " + std::to_string(x.size()));
  }
}

}  // namespace

BoxDomain::BoxDomain(double half_width, int dimension)
    : half_width(half_width), dimension(dimension) {
  if (!(half_width > 0.0) || !std::isfinite(half_width)) {
    throw InvalidArgument("box half-width must be positive and finite");
  }
  if (dimension < 1) {
    throw InvalidArgument("box dimension must be at least 1");
  }
}

bool BoxDomain::contains(const Point& x) const {
  return x.size() == dimension && x.cwiseAbs().maxCoeff() < half_width;
}

double BoxDomain::volume() const { return std::pow(2.0 * half_width, dimension); }

std::string_view benchmark_id(Benchmark b) {
  switch (b) {
    case Benchmark::Quadratic2d:
      return "quadratic2d";
    case Benchmark::Rosenbrock2d:
      return "rosenbrock2d";
    case Benchmark::Woods4d:
      return "woods4d";
  }
  return "unknown";
}

Benchmark parse_benchmark(std::string_view id) {
  if (id == "quadratic2d") return Benchmark::Quadratic2d;
  if (id == "rosenbrock2d") return Benchmark::Rosenbrock2d;
  if (id == "woods4d") return Benchmark::Woods4d;
  throw InvalidArgument("unknown benchmark id '" + std::string(id) + "'");
}

BenchmarkInfo benchmark_info(Benchmark b) {
  switch (b) {
    case Benchmark::Quadratic2d:
      return {2, BoxDomain(1.0, 2), BoxDomain(1.0, 2), Point::Zero(2), 0.0};
    case Benchmark::Rosenbrock2d:
      return {2, BoxDomain(4.0, 2), BoxDomain(4.0, 2), Point::Ones(2), 0.0};
    case Benchmark::Woods4d:
      // No feasible box; the initial batch uses the same half-width as Rosenbrock.
      return {4, std::nullopt, BoxDomain(4.0, 4), Point::Ones(4), 0.0};
  }
  throw InvalidArgument("unknown benchmark");
}

OracleResponse eval_quadratic(const Point& x, const BoxDomain& box) {
  require_dimension(x, 2, "quadratic2d");
  if (!box.contains(x)) return OracleResponse::infeasible();
  return OracleResponse::value(x[0] * x[0] + x[1] * x[1] + x[0] * x[1]);
}

OracleResponse eval_rosenbrock(const Point& x, const BoxDomain& box) {
  require_dimension(x, 2, "rosenbrock2d");
  if (!box.contains(x)) return OracleResponse::infeasible();
  const double a = x[1] - x[0] * x[0];
  const double b = 1.0 - x[0];
  return OracleResponse::value(100.0 * a * a + b * b);
}

OracleResponse eval_woods(const Point& x) {
  require_dimension(x, 4, "woods4d");
  const double t1 = x[1] - x[0];
  const double t2 = 1.0 - x[0];
  const double t3 = x[3] - x[2] * x[2];
  const double t4 = 1.0 - x[2];
  const double u2 = 1.0 - x[1];
  const double u4 = 1.0 - x[3];
  const double g = 100.0 * t1 * t1 + t2 * t2 + 90.0 * t3 * t3 + t4 * t4 +
                   10.1 * (u2 * u2 + u4 * u4) + 19.8 * u2 * u4;
  if (!std::isfinite(g)) return OracleResponse::infeasible();
  return OracleResponse::value(g);
}

OracleResponse evaluate(Benchmark b, const Point& x) {
  switch (b) {
    case Benchmark::Quadratic2d:
      return eval_quadratic(x);
    case Benchmark::Rosenbrock2d:
      return eval_rosenbrock(x);
    case Benchmark::Woods4d:
      return eval_woods(x);
  }
  throw InvalidArgument("unknown benchmark");
}

Oracle::Oracle(Benchmark benchmark, double noise_half_width)
    : benchmark_(benchmark), noise_half_width_(noise_half_width), info_(benchmark_info(benchmark)) {
  if (!(noise_half_width >= 0.0) || !std::isfinite(noise_half_width)) {
    throw InvalidArgument("noise half-width must be non-negative and finite");
  }
}

OracleResponse Oracle::query(const Point& x, Rng& rng, QueryKind kind) {
  if (kind == QueryKind::Diagnostic) return diagnostic(x);
  OracleResponse r = evaluate(benchmark_, x);
  calls_.fetch_add(1);
  if (noise_half_width_ > 0.0) {
    // Always consume the draw so the noise stream does not depend on feasibility.
    std::uniform_real_distribution<double> noise(-noise_half_width_, noise_half_width_);
    const double e = noise(rng);
    if (r.feasible) r.g += e;
  }
  return r;
}

OracleResponse Oracle::diagnostic(const Point& x) const { return evaluate(benchmark_, x); }

}  // namespace pcopt
