#include "pcopt/fit.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>

namespace pcopt {

namespace {

// Responsibility mass (as a fraction of total weight) below which a component
// counts as collapsed.
constexpr double kCollapseMass = 1e-10;
constexpr int kMaxReseeds = 3;

void check_inputs(std::span<const Point> points, std::span<const double> weights) {
  if (points.size() != weights.size()) throw InvalidArgument("points and weights differ in length");
  if (points.empty()) throw EmptySupportError("no points to fit");
  const auto n = points.front().size();
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() != n) throw InvalidArgument("points differ in dimension");
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) {
      throw InvalidArgument("weights must be finite and non-negative");
    }
  }
}

bool lexicographic_less(const Point& a, const Point& b) {
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    if (a[k] != b[k]) return a[k] < b[k];
  }
  return false;
}

// Positive-weight points in canonical (lexicographic) order with weights
// normalized to sum to one.
struct CanonicalSet {
  std::vector<Point> x;
  std::vector<double> s;
};

CanonicalSet canonicalize(std::span<const Point> points, std::span<const double> weights) {
  check_inputs(points, weights);
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (weights[i] > 0.0) idx.push_back(i);
  }
  if (idx.empty()) throw EmptySupportError("all weights are zero");
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (lexicographic_less(points[a], points[b])) return true;
    if (lexicographic_less(points[b], points[a])) return false;
    return weights[a] < weights[b];
  });
  CanonicalSet c;
  double total = 0.0;
  for (std::size_t i : idx) total += weights[i];
  for (std::size_t i : idx) {
    c.x.push_back(points[i]);
    c.s.push_back(weights[i] / total);
  }
  return c;
}

struct Moments {
  Point mean;
  Matrix cov;
};

// Weighted moments with per-point multipliers r (responsibilities).
Moments weighted_moments(const CanonicalSet& c, const Eigen::VectorXd* r, double* mass_out) {
  const auto n = c.x.front().size();
  double mass = 0.0;
  Point mean = Point::Zero(n);
  for (std::size_t i = 0; i < c.x.size(); ++i) {
    const double w = c.s[i] * (r ? (*r)[static_cast<Eigen::Index>(i)] : 1.0);
    mass += w;
    mean += w * c.x[i];
  }
  if (mass_out) *mass_out = mass;
  if (!(mass > 0.0)) return {Point::Zero(n), Matrix::Zero(n, n)};
  mean /= mass;
  Matrix cov = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < c.x.size(); ++i) {
    const double w = c.s[i] * (r ? (*r)[static_cast<Eigen::Index>(i)] : 1.0);
    const Point d = c.x[i] - mean;
    cov.noalias() += w * d * d.transpose();
  }
  cov /= mass;
  return {mean, cov};
}

std::size_t weighted_pick(const std::vector<double>& w, Rng& rng) {
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  std::uniform_real_distribution<double> unit(0.0, total);
  const double u = unit(rng);
  double c = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] <= 0.0) continue;
    last = i;
    c += w[i];
    if (u < c) return i;
  }
  return last;
}

std::size_t distinct_count(const CanonicalSet& c) {
  std::size_t n = c.x.empty() ? 0 : 1;
  for (std::size_t i = 1; i < c.x.size(); ++i) {
    if (c.x[i] != c.x[i - 1]) ++n;
  }
  return n;
}

struct RestartResult {
  std::vector<double> phi;
  std::vector<GaussianDensity> comps;
  double objective;
  int iterations;
  EmTrace trace;
};

double mixture_objective(const CanonicalSet& c, const std::vector<double>& phi,
                         const std::vector<GaussianDensity>& comps) {
  const MixtureDensity mix(phi, comps);
  return weighted_cross_entropy(std::span<const Point>(c.x), std::span<const double>(c.s), mix);
}

RestartResult run_em(const CanonicalSet& c, int m, const Matrix& pooled_cov, const EmConfig& cfg,
                     Rng& rng, double floor) {
  const std::size_t n_pts = c.x.size();

  // Initial means: distinct locations drawn by weight without replacement.
  std::vector<double> avail = c.s;
  std::vector<GaussianDensity> comps;
  while (static_cast<int>(comps.size()) < m) {
    const std::size_t k = weighted_pick(avail, rng);
    for (std::size_t i = 0; i < n_pts; ++i) {
      if (c.x[i] == c.x[k]) avail[i] = 0.0;
    }
    comps.emplace_back(c.x[k], pooled_cov, floor);
  }
  std::vector<double> phi(static_cast<std::size_t>(m), 1.0 / m);

  RestartResult out{phi, comps, 0.0, 0, {}};
  double prev = mixture_objective(c, phi, comps);
  out.trace.objective.push_back(prev);
  int reseeds = 0;

  Matrix log_r(static_cast<Eigen::Index>(n_pts), m);
  for (int it = 1; it <= cfg.max_iters; ++it) {
    out.iterations = it;
    const auto mc = static_cast<Eigen::Index>(comps.size());
    // E-step.
    log_r.resize(static_cast<Eigen::Index>(n_pts), mc);
    for (std::size_t i = 0; i < n_pts; ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      double mx = -std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < mc; ++j) {
        const double lw = phi[static_cast<std::size_t>(j)] > 0.0
                              ? std::log(phi[static_cast<std::size_t>(j)])
                              : -std::numeric_limits<double>::infinity();
        log_r(row, j) = lw + comps[static_cast<std::size_t>(j)].log_density(c.x[i]);
        mx = std::max(mx, log_r(row, j));
      }
      double sum = 0.0;
      for (Eigen::Index j = 0; j < mc; ++j) {
        log_r(row, j) = std::exp(log_r(row, j) - mx);
        sum += log_r(row, j);
      }
      log_r.row(row) /= sum;
    }
    // M-step.
    std::vector<GaussianDensity> next;
    std::vector<double> next_phi;
    std::vector<bool> collapsed;
    for (Eigen::Index j = 0; j < mc; ++j) {
      const Eigen::VectorXd r = log_r.col(j);
      double mass = 0.0;
      Moments mo = weighted_moments(c, &r, &mass);
      if (mass < kCollapseMass) {
        collapsed.push_back(true);
        next.push_back(comps[static_cast<std::size_t>(j)]);
        next_phi.push_back(0.0);
      } else {
        collapsed.push_back(false);
        next.emplace_back(std::move(mo.mean), mo.cov, floor);
        next_phi.push_back(mass);
      }
    }
    bool reseeded = false;
    for (std::size_t j = 0; j < collapsed.size(); ++j) {
      if (!collapsed[j]) continue;
      reseeded = true;
      ++reseeds;
      if (reseeds >= kMaxReseeds && next.size() > 1) {
        warn("EM component collapsed " + std::to_string(reseeds) +
             " times; dropping to " + std::to_string(next.size() - 1) + " components");
        next.erase(next.begin() + static_cast<std::ptrdiff_t>(j));
        next_phi.erase(next_phi.begin() + static_cast<std::ptrdiff_t>(j));
        collapsed.erase(collapsed.begin() + static_cast<std::ptrdiff_t>(j));
        --j;
        continue;
      }
      next[j] = GaussianDensity(c.x[weighted_pick(c.s, rng)], pooled_cov, floor);
      next_phi[j] = 1.0 / static_cast<double>(next.size());
    }
    const double total = std::accumulate(next_phi.begin(), next_phi.end(), 0.0);
    for (double& p : next_phi) p /= total;
    comps = std::move(next);
    phi = std::move(next_phi);

    const double obj = mixture_objective(c, phi, comps);
    if (reseeded) out.trace.reseeds.push_back(out.trace.objective.size());
    out.trace.objective.push_back(obj);
    const bool converged = !reseeded && std::abs(prev - obj) < cfg.tol;
    prev = obj;
    if (converged) break;
  }
  out.phi = std::move(phi);
  out.comps = std::move(comps);
  out.objective = prev;
  return out;
}

}  // namespace

void EmConfig::validate() const {
  if (max_iters < 1) throw InvalidArgument("EM max_iters must be >= 1");
  if (!(tol > 0.0)) throw InvalidArgument("EM tol must be > 0");
  if (n_restarts < 1) throw InvalidArgument("EM n_restarts must be >= 1");
}

GaussianDensity fit_gaussian_weighted(std::span<const Point> points, std::span<const double> weights,
                                      double eigen_floor) {
  const CanonicalSet c = canonicalize(points, weights);
  Moments mo = weighted_moments(c, nullptr, nullptr);
  return GaussianDensity(std::move(mo.mean), mo.cov, eigen_floor);
}

FitResult fit_mixture_em(std::span<const Point> points, std::span<const double> weights, int m,
                         const EmConfig& cfg, Rng& rng, double eigen_floor) {
  if (m < 1) throw InvalidArgument("mixture needs M >= 1");
  cfg.validate();
  const CanonicalSet c = canonicalize(points, weights);

  int m_eff = m;
  const auto distinct = distinct_count(c);
  if (static_cast<std::size_t>(m_eff) > distinct) {
    warn("only " + std::to_string(distinct) + " distinct weighted points; fitting " +
         std::to_string(distinct) + " components instead of " + std::to_string(m));
    m_eff = static_cast<int>(distinct);
  }
  if (m_eff == 1) {
    Moments mo = weighted_moments(c, nullptr, nullptr);
    GaussianDensity g(std::move(mo.mean), mo.cov, eigen_floor);
    const double obj =
        weighted_cross_entropy(std::span<const Point>(c.x), std::span<const double>(c.s), g);
    return FitResult{Density(std::move(g)), obj, 0, {}};
  }

  const Matrix pooled = floor_covariance(weighted_moments(c, nullptr, nullptr).cov, eigen_floor);
  const std::uint64_t base = rng();
  std::vector<EmTrace> traces;
  std::optional<RestartResult> best;
  for (int r = 0; r < cfg.n_restarts; ++r) {
    Rng stream = derive_stream(base, static_cast<std::uint64_t>(r));
    RestartResult res = run_em(c, m_eff, pooled, cfg, stream, eigen_floor);
    traces.push_back(res.trace);
    // Strict comparison keeps the lowest restart index on ties.
    if (!best || res.objective < best->objective) best = std::move(res);
  }
  FitResult out{Density(MixtureDensity(best->phi, best->comps)), best->objective,
                best->iterations, std::move(traces)};
  return out;
}

FitResult fit_model(const WeightedPoints& data, const ModelSpec& model, const FitOptions& options,
                    Rng& rng) {
  const std::span<const Point> pts(data.points);
  const std::span<const double> ws(data.weights);
  if (model.family == ModelFamily::SingleGaussian || model.components == 1) {
    if (model.components != 1) throw InvalidArgument("single-gaussian model must have M = 1");
    GaussianDensity g = fit_gaussian_weighted(pts, ws, options.covariance_floor);
    const double obj = weighted_cross_entropy(pts, ws, g);
    return FitResult{Density(std::move(g)), obj, 0, {}};
  }
  return fit_mixture_em(pts, ws, model.components, options.em, rng, options.covariance_floor);
}

}  // namespace pcopt
