#include "pcopt/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <boost/math/distributions/chi_squared.hpp>

namespace pcopt {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(const std::vector<double>& terms) {
  double m = kNegInf;
  for (double t : terms) m = std::max(m, t);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double t : terms) s += std::exp(t - m);
  return m + std::log(s);
}

}  // namespace

Matrix floor_covariance(const Matrix& covariance, double floor) {
  if (covariance.rows() != covariance.cols()) {
    throw InvalidArgument("covariance must be square");
  }
  if (!covariance.allFinite()) {
    throw InvalidArgument("covariance has non-finite entries");
  }
  Matrix sym = 0.5 * (covariance + covariance.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  if (eig.info() != Eigen::Success) {
    throw FactorizationError("eigendecomposition of covariance failed");
  }
  if (eig.eigenvalues().minCoeff() >= floor) return sym;
  const Eigen::VectorXd clamped = eig.eigenvalues().cwiseMax(floor);
  Matrix out = eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

GaussianDensity::GaussianDensity(Point mean, const Matrix& covariance, double eigen_floor)
    : mean_(std::move(mean)) {
  if (mean_.size() < 1) throw InvalidArgument("Gaussian needs dimension >= 1");
  if (!mean_.allFinite()) throw InvalidArgument("Gaussian mean has non-finite entries");
  if (covariance.rows() != mean_.size()) {
    throw InvalidArgument("covariance dimension does not match mean");
  }
  if (!covariance.allFinite()) throw InvalidArgument("covariance has non-finite entries");
  // Eigen factor rather than Cholesky: near the floor the condition number
  // reaches 1e9 and a Cholesky log-determinant would lose about seven digits.
  const Matrix sym = 0.5 * (covariance + covariance.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  if (eig.info() != Eigen::Success) {
    throw FactorizationError("eigendecomposition of covariance failed");
  }
  const Eigen::VectorXd lambda = eig.eigenvalues().cwiseMax(eigen_floor);
  if (!(lambda.minCoeff() > 0.0)) {
    throw FactorizationError("covariance is not positive definite after flooring");
  }
  axes_ = eig.eigenvectors();
  inv_sd_ = lambda.cwiseSqrt().cwiseInverse();
  factor_ = axes_ * lambda.cwiseSqrt().asDiagonal();
  if (eig.eigenvalues().minCoeff() >= eigen_floor) {
    covariance_ = sym;
  } else {
    const Matrix out = axes_ * lambda.asDiagonal() * axes_.transpose();
    covariance_ = 0.5 * (out + out.transpose());
  }
  const double log_det = lambda.array().log().sum();
  log_norm_ = -0.5 * static_cast<double>(mean_.size()) * std::log(2.0 * std::numbers::pi) -
              0.5 * log_det;
}

double GaussianDensity::log_density(const Point& x) const {
  if (x.size() != mean_.size()) throw InvalidArgument("point dimension mismatch");
  const Eigen::VectorXd z = inv_sd_.cwiseProduct(axes_.transpose() * (x - mean_));
  return log_norm_ - 0.5 * z.squaredNorm();
}

Point GaussianDensity::sample(Rng& rng) const { return transform(standard_normal(dimension(), rng)); }

Eigen::VectorXd standard_normal(int n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(n);
  for (int i = 0; i < n; ++i) z[i] = normal(rng);
  return z;
}

MixtureDensity::MixtureDensity(std::vector<double> weights, std::vector<GaussianDensity> components)
    : weights_(std::move(weights)), components_(std::move(components)) {
  if (components_.empty()) throw InvalidArgument("mixture needs at least one component");
  if (weights_.size() != components_.size()) {
    throw InvalidArgument("mixture weight count does not match component count");
  }
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("mixture weights must be >= 0");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw InvalidArgument("mixture weights must sum to one");
  }
  const int n = components_.front().dimension();
  for (const auto& c : components_) {
    if (c.dimension() != n) throw InvalidArgument("mixture components differ in dimension");
  }
  log_weights_.reserve(weights_.size());
  for (double& w : weights_) {
    w /= total;
    log_weights_.push_back(w > 0.0 ? std::log(w) : kNegInf);
  }
}

double MixtureDensity::log_density(const Point& x) const {
  std::vector<double> terms(components_.size());
  for (std::size_t j = 0; j < components_.size(); ++j) {
    terms[j] = log_weights_[j] == kNegInf ? kNegInf
                                          : log_weights_[j] + components_[j].log_density(x);
  }
  return log_sum_exp(terms);
}

std::size_t MixtureDensity::component_for(double u) const {
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t j = 0; j < weights_.size(); ++j) {
    if (weights_[j] <= 0.0) continue;
    last_positive = j;
    cumulative += weights_[j];
    if (u < cumulative) return j;
  }
  return last_positive;
}

Point MixtureDensity::sample(Rng& rng) const {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  return components_[component_for(unit(rng))].sample(rng);
}

Eigen::VectorXd MixtureDensity::responsibilities(const Point& x) const {
  const std::size_t m = components_.size();
  std::vector<double> terms(m);
  for (std::size_t j = 0; j < m; ++j) {
    terms[j] = log_weights_[j] == kNegInf ? kNegInf
                                          : log_weights_[j] + components_[j].log_density(x);
  }
  const double lse = log_sum_exp(terms);
  Eigen::VectorXd r(m);
  if (lse == kNegInf) {
    // Only reachable with non-finite inputs; fall back to the prior.
    for (std::size_t j = 0; j < m; ++j) r[j] = weights_[j];
    return r;
  }
  for (std::size_t j = 0; j < m; ++j) r[j] = std::exp(terms[j] - lse);
  r /= r.sum();
  return r;
}

double UniformBoxDensity::log_density(const Point& x) const {
  if (x.size() != box_.dimension) throw InvalidArgument("point dimension mismatch");
  return box_.contains(x) ? -std::log(box_.volume()) : kNegInf;
}

Point UniformBoxDensity::sample(Rng& rng) const {
  std::uniform_real_distribution<double> coord(-box_.half_width, box_.half_width);
  Point x(box_.dimension);
  for (int i = 0; i < box_.dimension; ++i) {
    double v = coord(rng);
    // uniform_real_distribution is half-open; keep draws strictly inside.
    while (v == -box_.half_width) v = coord(rng);
    x[i] = v;
  }
  return x;
}

double Density::log_density(const Point& x) const {
  return std::visit([&](const auto& d) { return d.log_density(x); }, v_);
}

Point Density::sample(Rng& rng) const {
  return std::visit([&](const auto& d) { return d.sample(rng); }, v_);
}

int Density::dimension() const {
  return std::visit([](const auto& d) { return d.dimension(); }, v_);
}

std::size_t Density::component_count() const {
  if (holds<GaussianDensity>()) return 1;
  if (holds<MixtureDensity>()) return get<MixtureDensity>().size();
  return 0;
}

Ellipsoid confidence_ellipsoid(const GaussianDensity& g, double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw InvalidArgument("confidence level must lie in (0, 1)");
  }
  const boost::math::chi_squared chi2(static_cast<double>(g.dimension()));
  const double q = boost::math::quantile(chi2, level);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(g.covariance());
  Ellipsoid e;
  e.center = g.mean();
  e.axes = eig.eigenvectors();
  e.radii = (eig.eigenvalues().array() * q).sqrt().matrix();
  return e;
}

}  // namespace pcopt
