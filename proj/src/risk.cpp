#include "pcopt/risk.hpp"

#include <cmath>
#include <random>

#include <Eigen/Cholesky>

namespace pcopt {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

void TwoPhiModel::validate() const {
  for (double v : {mu1, mu2, sigma_a, sigma_b, loss1, loss2}) {
    if (!std::isfinite(v)) throw InvalidArgument("two-phi model fields must be finite");
  }
  if (!(sigma_a >= 0.0)) throw InvalidArgument("sigma_a must be >= 0");
  if (!(sigma_b > 0.0)) throw InvalidArgument("sigma_b must be > 0");
}

Eigen::Matrix2d TwoPhiModel::covariance() const {
  const double a2 = sigma_a * sigma_a;
  const double b2 = sigma_b * sigma_b;
  Eigen::Matrix2d c;
  c << 0.5 * (a2 + b2), 0.5 * (a2 - b2), 0.5 * (a2 - b2), 0.5 * (a2 + b2);
  return c;
}

double prob_choose_phi1(const TwoPhiModel& m) {
  m.validate();
  return normal_cdf((m.mu2 - m.mu1) / (std::sqrt(2.0) * m.sigma_b));
}

double risk_two_phi(const TwoPhiModel& m) {
  const double p1 = prob_choose_phi1(m);
  const double theta = m.loss2 - m.loss1 > 0.0 ? 1.0 : 0.0;
  return (p1 - theta) * (m.loss1 - m.loss2);
}

RiskMonteCarlo mc_validate(const TwoPhiModel& m, std::size_t n, Rng& rng) {
  m.validate();
  if (n < 10'000) throw InvalidArgument("Monte Carlo validation needs n >= 10^4");
  Eigen::LLT<Eigen::Matrix2d> llt(m.covariance());
  if (llt.info() != Eigen::Success) {
    // sigma_a = 0 gives a rank-one covariance; factor it along (1, -1) directly.
    if (m.sigma_a != 0.0) throw InvalidArgument("two-phi covariance is not positive semi-definite");
  }
  Eigen::Matrix2d l;
  if (llt.info() == Eigen::Success) {
    l = llt.matrixL();
  } else {
    const double s = m.sigma_b / std::sqrt(2.0);
    l << s, 0.0, -s, 0.0;
  }
  const Eigen::Vector2d mu(m.mu1, m.mu2);
  const double best = std::min(m.loss1, m.loss2);
  std::normal_distribution<double> normal(0.0, 1.0);
  double chose1 = 0.0;
  double sum_risk = 0.0;
  double sum_risk_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::Vector2d z;
    z[0] = normal(rng);
    z[1] = normal(rng);
    const Eigen::Vector2d v = mu + l * z;
    const bool pick1 = v[0] <= v[1];
    const double excess = (pick1 ? m.loss1 : m.loss2) - best;
    chose1 += pick1 ? 1.0 : 0.0;
    sum_risk += excess;
    sum_risk_sq += excess * excess;
  }
  const double k = static_cast<double>(n);
  RiskMonteCarlo r;
  r.prob = chose1 / k;
  r.prob_se = std::sqrt(r.prob * (1.0 - r.prob) / k);
  r.risk = sum_risk / k;
  const double var = std::max(0.0, sum_risk_sq / k - r.risk * r.risk) * k / (k - 1.0);
  r.risk_se = std::sqrt(var / k);
  return r;
}

}  // namespace pcopt
