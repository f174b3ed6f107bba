#include "pcopt/target.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace pcopt {

namespace {

// Largest exponent used without rescaling; exp(600) is far from overflow.
constexpr double kMaxExponent = 600.0;

}  // namespace

std::size_t Dataset::append_batch(std::vector<Sample> batch) {
  if (batch.empty()) throw InvalidArgument("cannot append an empty batch");
  const std::size_t index = batch_sizes_.size() + 1;
  for (auto& s : batch) {
    if (!s.location.allFinite()) throw InvalidArgument("sample location must be finite");
    if (!std::isfinite(s.log_proposal)) {
      throw InvalidArgument("sample proposal density must be positive and finite");
    }
    if (s.feasible != std::isfinite(s.g)) {
      throw InvalidArgument("sample feasibility must match finiteness of g");
    }
    s.batch_index = index;
  }
  batch_offsets_.push_back(samples_.size());
  batch_sizes_.push_back(batch.size());
  samples_.insert(samples_.end(), std::make_move_iterator(batch.begin()),
                  std::make_move_iterator(batch.end()));
  return index;
}

std::span<const Sample> Dataset::batch(std::size_t index) const {
  if (index < 1 || index > batch_sizes_.size()) {
    throw InvalidArgument("batch index " + std::to_string(index) + " out of range");
  }
  return std::span<const Sample>(samples_).subspan(batch_offsets_[index - 1],
                                                   batch_sizes_[index - 1]);
}

std::size_t Dataset::feasible_count() const {
  return static_cast<std::size_t>(
      std::count_if(samples_.begin(), samples_.end(), [](const Sample& s) { return s.feasible; }));
}

BoltzmannSpec::BoltzmannSpec(double beta) : beta(beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw InvalidArgument("beta must be finite and non-negative");
  }
}

std::vector<double> boltzmann_weights(std::span<const Sample> samples, const BoltzmannSpec& spec) {
  if (samples.empty()) throw InvalidArgument("boltzmann_weights needs a non-empty dataset");
  double g_min = std::numeric_limits<double>::infinity();
  for (const auto& s : samples) {
    if (s.feasible) g_min = std::min(g_min, s.g);
  }
  if (!std::isfinite(g_min)) throw EmptySupportError("no feasible samples to weight");

  // Exponents are shifted so the largest weight is at most one when the plain
  // ratio would overflow; consumers only ever use normalized weights.
  double max_exponent = -std::numeric_limits<double>::infinity();
  for (const auto& s : samples) {
    if (s.feasible) max_exponent = std::max(max_exponent, -spec.beta * (s.g - g_min) - s.log_proposal);
  }
  const double shift = max_exponent > kMaxExponent ? max_exponent : 0.0;

  std::vector<double> w(samples.size(), 0.0);
  bool any_positive = false;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Sample& s = samples[i];
    if (!s.feasible) continue;
    w[i] = std::exp(-spec.beta * (s.g - g_min) - s.log_proposal - shift);
    any_positive = any_positive || w[i] > 0.0;
  }
  if (!any_positive) throw EmptySupportError("all importance weights underflowed");
  return w;
}

double WeightedPoints::total_weight() const {
  double t = 0.0;
  for (double w : weights) t += w;
  return t;
}

WeightedPoints weighted_view(std::span<const Sample> samples, const BoltzmannSpec& spec) {
  WeightedPoints out;
  out.weights = boltzmann_weights(samples, spec);
  out.points.reserve(samples.size());
  for (const auto& s : samples) out.points.push_back(s.location);
  return out;
}

std::vector<Sample> select_samples(std::span<const Sample> samples,
                                   std::span<const std::size_t> indices) {
  std::vector<Sample> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= samples.size()) throw InvalidArgument("sample index out of range");
    out.push_back(samples[i]);
  }
  return out;
}

}  // namespace pcopt
