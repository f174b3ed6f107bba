#pragma once

#include <concepts>
#include <variant>
#include <vector>


#include "pcopt/common.hpp"
#include "pcopt/oracle.hpp"

namespace pcopt {

/// Covariance eigenvalue floor is this factor times the squared domain scale.
inline constexpr double kCovarianceFloorScale = 1e-9;

/// Eigenvalue floor for a domain whose characteristic length is `domain_scale`.
inline double covariance_floor(double domain_scale = 1.0) {
  return kCovarianceFloorScale * domain_scale * domain_scale;
}

/// Symmetrizes `covariance` and raises every eigenvalue below `floor` to it.
/// Matrices already above the floor are returned symmetrized but otherwise
/// untouched.
Matrix floor_covariance(const Matrix& covariance, double floor);

/// Multivariate normal N(mean, covariance). Immutable; the eigen factorization
/// and log normalizer are computed once at construction.
class GaussianDensity {
 public:
  GaussianDensity(Point mean, const Matrix& covariance, double eigen_floor = covariance_floor());

  const Point& mean() const { return mean_; }
  const Matrix& covariance() const { return covariance_; }
  /// A = V diag(sqrt(lambda)) with A A^T = covariance.
  const Matrix& factor() const { return factor_; }
  int dimension() const { return static_cast<int>(mean_.size()); }

  double log_density(const Point& x) const;
  Point sample(Rng& rng) const;
  /// mean + A z for a standard-normal vector z.
  Point transform(const Eigen::VectorXd& z) const { return mean_ + factor_ * z; }

 private:
  Point mean_;
  Matrix covariance_;
  Matrix axes_;
  Eigen::VectorXd inv_sd_;
  Matrix factor_;
  double log_norm_ = 0.0;
};

/// Finite Gaussian mixture with simplex weights.
class MixtureDensity {
 public:
  /// Weights must be non-negative and sum to one within 1e-9; they are
  /// renormalized exactly.
  MixtureDensity(std::vector<double> weights, std::vector<GaussianDensity> components);

  const std::vector<double>& weights() const { return weights_; }
  const std::vector<GaussianDensity>& components() const { return components_; }
  std::size_t size() const { return components_.size(); }
  int dimension() const { return components_.front().dimension(); }

  double log_density(const Point& x) const;
  Point sample(Rng& rng) const;
  /// Index of the component selected by a uniform variate u in [0, 1).
  std::size_t component_for(double u) const;

  /// Posterior component probabilities at x, computed in log space so the
  /// result is a valid simplex vector even when every component underflows.
  Eigen::VectorXd responsibilities(const Point& x) const;

 private:
  std::vector<double> weights_;
  std::vector<double> log_weights_;
  std::vector<GaussianDensity> components_;
};

/// Uniform density on an open box.
class UniformBoxDensity {
 public:
  explicit UniformBoxDensity(BoxDomain box) : box_(box) {}

  const BoxDomain& box() const { return box_; }
  int dimension() const { return box_.dimension; }

  /// -log(volume) inside the box, -inf outside.
  double log_density(const Point& x) const;
  Point sample(Rng& rng) const;

 private:
  BoxDomain box_;
};

/// Any search density the optimizer may use as q or h.
class Density {
 public:
  using Variant = std::variant<GaussianDensity, MixtureDensity, UniformBoxDensity>;

  Density(GaussianDensity g) : v_(std::move(g)) {}
  Density(MixtureDensity m) : v_(std::move(m)) {}
  Density(UniformBoxDensity u) : v_(std::move(u)) {}

  double log_density(const Point& x) const;
  Point sample(Rng& rng) const;
  int dimension() const;
  /// Number of Gaussian components; 0 for the uniform box.
  std::size_t component_count() const;

  template <class T>
  bool holds() const {
    return std::holds_alternative<T>(v_);
  }
  template <class T>
  const T& get() const {
    return std::get<T>(v_);
  }
  const Variant& variant() const { return v_; }

 private:
  Variant v_;
};

/// Anything that can be evaluated and sampled like a density.
template <class D>
concept SampleableDensity = requires(const D& d, const Point& x, Rng& rng) {
  { d.log_density(x) } -> std::convertible_to<double>;
  { d.sample(rng) } -> std::convertible_to<Point>;
};

static_assert(SampleableDensity<GaussianDensity>);
static_assert(SampleableDensity<MixtureDensity>);
static_assert(SampleableDensity<UniformBoxDensity>);
static_assert(SampleableDensity<Density>);

/// Draws one standard-normal vector of length n.
Eigen::VectorXd standard_normal(int n, Rng& rng);

struct Ellipsoid {
  Point center;
  /// Columns are unit principal axes.
  Matrix axes;
  /// Semi-axis lengths, one per column of `axes`.
  Eigen::VectorXd radii;
};

/// Level set {x : (x - mu)^T Sigma^-1 (x - mu) <= chi2_n(level)}.
Ellipsoid confidence_ellipsoid(const GaussianDensity& g, double level);

}  // namespace pcopt
