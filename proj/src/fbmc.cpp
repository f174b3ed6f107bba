#include "pcopt/fbmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/QR>

namespace pcopt {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr int kJitterEscalations = 3;

// Design row [1, x_1..x_n, x_i x_j for i <= j].
Eigen::VectorXd design_row(const Point& x) {
  const auto n = x.size();
  Eigen::VectorXd row(static_cast<Eigen::Index>(quadratic_coefficient_count(static_cast<int>(n))));
  Eigen::Index c = 0;
  row[c++] = 1.0;
  for (Eigen::Index i = 0; i < n; ++i) row[c++] = x[i];
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) row[c++] = x[i] * x[j];
  }
  return row;
}

}  // namespace

double SurrogateFit::value(const Point& x) const {
  if (x.size() != linear.size()) throw InvalidArgument("surrogate dimension mismatch");
  return constant + linear.dot(x) + x.dot(quadratic * x);
}

Point SurrogateFit::stationary_point() const {
  Eigen::FullPivLU<Matrix> lu(2.0 * quadratic);
  if (!lu.isInvertible()) throw DegenerateDesignError("surrogate has a singular quadratic term");
  return lu.solve(-linear);
}

SurrogateFit fit_surface(std::span<const Point> points, std::span<const double> values) {
  if (points.size() != values.size()) throw InvalidArgument("points and values differ in length");
  if (points.empty()) throw InvalidArgument("fit_surface needs samples");
  const int n = static_cast<int>(points.front().size());
  const std::size_t p = quadratic_coefficient_count(n);
  if (points.size() < p) {
    throw InvalidArgument("quadratic fit in " + std::to_string(n) + " dimensions needs at least " +
                          std::to_string(p) + " samples");
  }
  Matrix design(static_cast<Eigen::Index>(points.size()), static_cast<Eigen::Index>(p));
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() != n) throw InvalidArgument("points differ in dimension");
    if (!std::isfinite(values[i])) throw InvalidArgument("surface values must be finite");
    design.row(static_cast<Eigen::Index>(i)) = design_row(points[i]).transpose();
    rhs[static_cast<Eigen::Index>(i)] = values[i];
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(design);
  if (qr.rank() < static_cast<Eigen::Index>(p)) {
    throw DegenerateDesignError("quadratic design matrix is rank deficient");
  }
  const Eigen::VectorXd coef = qr.solve(rhs);

  SurrogateFit fit;
  fit.linear.resize(n);
  fit.quadratic = Matrix::Zero(n, n);
  Eigen::Index c = 0;
  fit.constant = coef[c++];
  for (int i = 0; i < n; ++i) fit.linear[i] = coef[c++];
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const double v = coef[c++];
      if (i == j) {
        fit.quadratic(i, i) = v;
      } else {
        fit.quadratic(i, j) = 0.5 * v;
        fit.quadratic(j, i) = 0.5 * v;
      }
    }
  }
  const Eigen::VectorXd resid = design * coef - rhs;
  fit.residual_rms = std::sqrt(resid.squaredNorm() / static_cast<double>(points.size()));
  return fit;
}

NoiseKernel::NoiseKernel(double sigma_f, double length_scale, double jitter)
    : sigma_f(sigma_f), length_scale(length_scale), jitter(jitter) {
  if (!(sigma_f >= 0.0)) throw InvalidArgument("sigma_f must be >= 0");
  if (!(length_scale > 0.0)) throw InvalidArgument("length scale must be > 0");
  if (!(jitter >= 0.0)) throw InvalidArgument("jitter must be >= 0");
}

NoiseKernel NoiseKernel::defaults_for(const SurrogateFit& fit, double domain_half_width) {
  return NoiseKernel(fit.residual_rms, domain_half_width / 4.0);
}

std::vector<double> fictitious_values(const SurrogateFit& fit, const NoiseKernel& kernel,
                                      std::span<const Point> points, Rng& rng) {
  if (points.empty()) throw InvalidArgument("fictitious_values needs points");
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& x : points) out.push_back(fit.value(x));
  if (kernel.sigma_f == 0.0) return out;

  const auto m = static_cast<Eigen::Index>(points.size());
  Matrix cov(m, m);
  const double s2 = kernel.sigma_f * kernel.sigma_f;
  const double two_l2 = 2.0 * kernel.length_scale * kernel.length_scale;
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double d2 = (points[static_cast<std::size_t>(i)] - points[static_cast<std::size_t>(j)])
                            .squaredNorm();
      cov(i, j) = cov(j, i) = s2 * std::exp(-d2 / two_l2);
    }
  }
  double jitter = kernel.jitter;
  for (int attempt = 0; attempt <= kJitterEscalations; ++attempt) {
    Matrix c = cov;
    c.diagonal().array() += jitter;
    Eigen::LLT<Matrix> llt(c);
    if (llt.info() == Eigen::Success) {
      const Eigen::VectorXd noise = llt.matrixL() * standard_normal(static_cast<int>(m), rng);
      for (Eigen::Index i = 0; i < m; ++i) out[static_cast<std::size_t>(i)] += noise[i];
      return out;
    }
    jitter = jitter > 0.0 ? jitter * 10.0 : 1e-12;
  }
  throw FactorizationError("noise covariance is not positive definite after jitter escalation");
}

EliteTuples draw_elite_tuples(const Density& h_c, const SurrogateFit& fit,
                              const NoiseKernel& kernel, int k, std::size_t n_tuples, Rng& rng) {
  if (k < 1) throw InvalidArgument("K must be >= 1");
  if (n_tuples < 1) throw InvalidArgument("N_T must be >= 1");
  EliteTuples t;
  t.k = k;
  t.points.reserve(n_tuples);
  t.log_proposal.reserve(n_tuples);
  t.minima.reserve(n_tuples);
  const std::uint64_t base = rng();
  for (std::size_t i = 0; i < n_tuples; ++i) {
    Rng stream = derive_stream(base, i);
    std::vector<Point> pts;
    std::vector<double> logh;
    for (int j = 0; j < k; ++j) {
      pts.push_back(h_c.sample(stream));
      logh.push_back(h_c.log_density(pts.back()));
    }
    const auto vals = fictitious_values(fit, kernel, pts, stream);
    t.minima.push_back(*std::min_element(vals.begin(), vals.end()));
    t.points.push_back(std::move(pts));
    t.log_proposal.push_back(std::move(logh));
  }
  return t;
}

double elite_estimate_on(const EliteTuples& tuples, const Density& q) {
  const std::size_t n = tuples.minima.size();
  std::vector<double> logw(n);
  double max_logw = kNegInf;
  for (std::size_t i = 0; i < n; ++i) {
    double lw = 0.0;
    for (std::size_t j = 0; j < tuples.points[i].size(); ++j) {
      lw += q.log_density(tuples.points[i][j]) - tuples.log_proposal[i][j];
    }
    logw[i] = std::isnan(lw) ? kNegInf : lw;
    max_logw = std::max(max_logw, logw[i]);
  }
  if (!std::isfinite(max_logw)) throw UndefinedScoreError("all elite tuple weights vanish");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = std::exp(logw[i] - max_logw);
    num += w * tuples.minima[i];
    den += w;
  }
  return num / den;
}

double elite_estimate(const Density& q, const Density& h_c, const SurrogateFit& fit,
                      const NoiseKernel& kernel, int k, std::size_t n_tuples, Rng& rng) {
  return elite_estimate_on(draw_elite_tuples(h_c, fit, kernel, k, n_tuples, rng), q);
}

EliteSelection elite_select(std::span<const Density> candidates, const Density& h_c,
                            const SurrogateFit& fit, const NoiseKernel& kernel, int k,
                            std::size_t n_tuples, Rng& rng) {
  if (candidates.empty()) throw InvalidArgument("elite_select needs candidates");
  const EliteTuples tuples = draw_elite_tuples(h_c, fit, kernel, k, n_tuples, rng);
  EliteSelection sel;
  bool any = false;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    double e = std::numeric_limits<double>::infinity();
    try {
      e = elite_estimate_on(tuples, candidates[c]);
      any = true;
    } catch (const UndefinedScoreError&) {
    }
    sel.estimates.push_back(e);
    if (e < sel.estimates[sel.index]) sel.index = c;
  }
  if (!any) throw UndefinedScoreError("no candidate has a defined elite estimate");
  return sel;
}

std::pair<std::vector<double>, std::vector<double>> elite_min_distribution(
    std::span<const double> values, std::span<const double> probabilities, int k) {
  if (values.size() != probabilities.size() || values.empty()) {
    throw InvalidArgument("values and probabilities must be non-empty and equal in length");
  }
  if (k < 1) throw InvalidArgument("K must be >= 1");
  std::map<double, double> mass;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(probabilities[i] >= 0.0)) throw InvalidArgument("probabilities must be non-negative");
    mass[values[i]] += probabilities[i];
  }
  // P(min >= v) = (sum of mass at values >= v)^K; differences give P(min = v).
  std::vector<double> vs;
  std::vector<double> tail;
  double acc = 0.0;
  for (auto it = mass.rbegin(); it != mass.rend(); ++it) {
    acc += it->second;
    vs.push_back(it->first);
    tail.push_back(std::pow(acc, k));
  }
  std::reverse(vs.begin(), vs.end());
  std::reverse(tail.begin(), tail.end());
  std::vector<double> probs(vs.size());
  for (std::size_t i = 0; i < vs.size(); ++i) {
    probs[i] = tail[i] - (i + 1 < vs.size() ? tail[i + 1] : 0.0);
  }
  return {vs, probs};
}

}  // namespace pcopt
