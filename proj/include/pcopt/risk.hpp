#pragma once

#include <cstddef>

#include "pcopt/common.hpp"

namespace pcopt {

/// Two candidate parameters phi1, phi2 whose loss estimates (l1, l2) are
/// jointly Gaussian with mean (mu1, mu2). The covariance has eigenvalue
/// sigma_a^2 along (1, 1) and sigma_b^2 along (1, -1).
struct TwoPhiModel {
  double mu1 = 0.0;
  double mu2 = 0.0;
  double sigma_a = 1.0;
  double sigma_b = 1.0;
  /// True losses of phi1 and phi2.
  double loss1 = 0.0;
  double loss2 = 0.0;

  /// Throws InvalidArgument unless sigma_a >= 0, sigma_b > 0 and all fields
  /// are finite.
  void validate() const;
  /// Diagonal (sigma_a^2 + sigma_b^2) / 2, off-diagonal (sigma_a^2 - sigma_b^2) / 2.
  Eigen::Matrix2d covariance() const;
};

/// P(l1 <= l2) = Phi((mu2 - mu1) / (sqrt(2) sigma_b)).
double prob_choose_phi1(const TwoPhiModel& m);

/// Expected loss of the chosen parameter minus the smaller true loss:
/// [P(choose phi1) - Theta(loss2 - loss1)] (loss1 - loss2).
double risk_two_phi(const TwoPhiModel& m);

struct RiskMonteCarlo {
  double prob = 0.0;
  double prob_se = 0.0;
  double risk = 0.0;
  double risk_se = 0.0;
};

/// Draws n loss-estimate pairs, picks the smaller (ties to phi1) and averages
/// the choice indicator and the excess true loss. Requires n >= 10^4.
RiskMonteCarlo mc_validate(const TwoPhiModel& m, std::size_t n, Rng& rng);

}  // namespace pcopt
