#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "pcopt/common.hpp"

namespace pcopt {

/// One oracle interaction. The proposal density is stored as its logarithm so
/// that very peaked proposals do not overflow.
struct Sample {
  Point location;
  /// +inf for infeasible samples.
  double g = 0.0;
  /// log h(location) for the proposal h in force when the sample was drawn.
  double log_proposal = 0.0;
  std::size_t batch_index = 0;
  bool feasible = true;

  double proposal_density() const { return std::exp(log_proposal); }
};

/// Append-only record of every sample drawn so far, grouped into batches
/// numbered from 1.
class Dataset {
 public:
  /// Appends a non-empty batch and stamps its samples with the next batch
  /// index. Returns that index.
  std::size_t append_batch(std::vector<Sample> batch);

  std::span<const Sample> samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  std::size_t batch_count() const { return batch_sizes_.size(); }
  const std::vector<std::size_t>& batch_sizes() const { return batch_sizes_; }
  std::span<const Sample> batch(std::size_t index) const;
  std::size_t feasible_count() const;

 private:
  std::vector<Sample> samples_;
  std::vector<std::size_t> batch_sizes_;
  std::vector<std::size_t> batch_offsets_;
};

/// Boltzmann target p(x) proportional to exp(-beta G(x)).
struct BoltzmannSpec {
  double beta = 1.0;

  explicit BoltzmannSpec(double beta);
};

/// Likelihood ratios s_i = exp(-beta (g_i - g_min)) / h_i, where g_min is the
/// smallest feasible g in `samples`. Infeasible samples get weight 0. When the
/// largest ratio would overflow, all ratios share a common rescaling. Throws
/// EmptySupportError when nothing is feasible.
std::vector<double> boltzmann_weights(std::span<const Sample> samples, const BoltzmannSpec& spec);

inline std::vector<double> boltzmann_weights(const Dataset& data, const BoltzmannSpec& spec) {
  return boltzmann_weights(data.samples(), spec);
}

/// Locations paired with importance weights; the input to every fit.
struct WeightedPoints {
  std::vector<Point> points;
  std::vector<double> weights;

  std::size_t size() const { return points.size(); }
  double total_weight() const;
};

WeightedPoints weighted_view(std::span<const Sample> samples, const BoltzmannSpec& spec);

/// All batches pooled with uniform per-sample weighting (batch weight N_j / N).
/// Weights may be recomputed for any beta; the dataset is never modified.
inline WeightedPoints pooled_weight_view(const Dataset& data, const BoltzmannSpec& spec) {
  return weighted_view(data.samples(), spec);
}

/// Selects samples by index, preserving the given order.
std::vector<Sample> select_samples(std::span<const Sample> samples,
                                   std::span<const std::size_t> indices);

}  // namespace pcopt
