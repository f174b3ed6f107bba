#pragma once

// Reference computations written independently of the library, used as
// oracles by the tests.

#include <cmath>
#include <vector>

#include <Eigen/Core>

namespace support {

inline double quadratic_g(double x, double y) { return x * x + y * y + x * y; }

inline double rosenbrock_g(double x, double y) {
  return 100.0 * (y - x * x) * (y - x * x) + (1.0 - x) * (1.0 - x);
}

/// Printed Woods formula, term by term.
inline double woods_g(double x1, double x2, double x3, double x4) {
  return 100.0 * (x2 - x1) * (x2 - x1) + (1.0 - x1) * (1.0 - x1) +
         90.0 * (x4 - x3 * x3) * (x4 - x3 * x3) + (1.0 - x3) * (1.0 - x3) +
         10.1 * ((1.0 - x2) * (1.0 - x2) + (1.0 - x4) * (1.0 - x4)) +
         19.8 * (1.0 - x2) * (1.0 - x4);
}

/// Normalized moments of exp(-beta f) on the square [-w, w]^2 by midpoint rule.
struct GridMoments {
  double log_z = 0.0;
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
};

template <class F>
GridMoments boltzmann_grid(F f, double beta, double w, int n = 512) {
  const double h = 2.0 * w / n;
  double fmin = INFINITY;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) fmin = std::min(fmin, f(-w + (i + 0.5) * h, -w + (j + 0.5) * h));
  }
  double z = 0.0;
  Eigen::Vector2d m1 = Eigen::Vector2d::Zero();
  Eigen::Matrix2d m2 = Eigen::Matrix2d::Zero();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Eigen::Vector2d x(-w + (i + 0.5) * h, -w + (j + 0.5) * h);
      const double p = std::exp(-beta * (f(x[0], x[1]) - fmin));
      z += p;
      m1 += p * x;
      m2 += p * x * x.transpose();
    }
  }
  GridMoments g;
  g.mean = m1 / z;
  g.cov = m2 / z - g.mean * g.mean.transpose();
  g.log_z = std::log(z * h * h) - beta * fmin;
  return g;
}

/// Standard normal CDF by composite Simpson integration of the density from -12.
inline double normal_cdf_simpson(double z, int n = 20000) {
  const double a = -12.0;
  const double h = (z - a) / n;
  auto pdf = [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI); };
  double s = pdf(a) + pdf(z);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * pdf(a + i * h);
  return s * h / 3.0;
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double standard_error(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / (static_cast<double>(v.size()) - 1.0) / static_cast<double>(v.size()));
}

}  // namespace support
