#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "pcopt/fit.hpp"
#include "pcopt/oracle.hpp"
#include "support.hpp"

using namespace pcopt;

namespace {

Point p1(double x) { return Point::Constant(1, x); }

Point p2(double x, double y) {
  Point p(2);
  p << x, y;
  return p;
}

std::vector<Point> cluster(const Point& c, double sd, int n, Rng& rng) {
  std::normal_distribution<double> z(0.0, sd);
  std::vector<Point> out;
  for (int i = 0; i < n; ++i) {
    Point p = c;
    for (Eigen::Index k = 0; k < p.size(); ++k) p[k] += z(rng);
    out.push_back(p);
  }
  return out;
}

}  // namespace

TEST_CASE("weighted moments of two points") {
  std::vector<Point> x = {p1(0.0), p1(4.0)};
  std::vector<double> w = {1.0, 3.0};
  const auto g = fit_gaussian_weighted(x, w);
  CHECK(g.mean()[0] == doctest::Approx(3.0));
  CHECK(g.covariance()(0, 0) == doctest::Approx(3.0));

  std::vector<Point> y = {p1(-1.0), p1(1.0)};
  std::vector<double> u = {2.0, 2.0};
  const auto h = fit_gaussian_weighted(y, u);
  CHECK(h.mean()[0] == doctest::Approx(0.0));
  CHECK(h.covariance()(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("a single weighted point gives the floored covariance") {
  std::vector<Point> x = {p2(0.3, -0.2), p2(5.0, 5.0)};
  std::vector<double> w = {2.0, 0.0};
  const auto g = fit_gaussian_weighted(x, w, 1e-6);
  CHECK(g.mean()[0] == doctest::Approx(0.3));
  CHECK(g.mean()[1] == doctest::Approx(-0.2));
  CHECK(g.covariance()(0, 0) == doctest::Approx(1e-6));
  CHECK(g.covariance()(1, 1) == doctest::Approx(1e-6));
  CHECK(g.covariance()(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("single-component EM equals the closed-form fit") {
  Rng rng(3);
  auto x = cluster(p2(1.0, -1.0), 0.5, 200, rng);
  std::vector<double> w(x.size());
  std::uniform_real_distribution<double> u(0.1, 2.0);
  for (double& v : w) v = u(rng);
  const auto r = fit_mixture_em(x, w, 1, EmConfig{}, rng);
  const auto g = fit_gaussian_weighted(x, w);
  const auto& m = r.density.get<GaussianDensity>();
  CHECK((m.mean() - g.mean()).norm() < 1e-12);
  CHECK((m.covariance() - g.covariance()).norm() < 1e-12);
}

TEST_CASE("EM recovers two well separated clusters") {
  Rng rng(11);
  auto a = cluster(p2(-10.0, 0.0), 0.3, 300, rng);
  auto b = cluster(p2(10.0, 0.0), 0.3, 300, rng);
  std::vector<Point> x = a;
  x.insert(x.end(), b.begin(), b.end());
  std::vector<double> w(x.size(), 1.0);
  const auto r = fit_mixture_em(x, w, 2, EmConfig{}, rng);
  const auto& mix = r.density.get<MixtureDensity>();
  REQUIRE(mix.size() == 2);

  std::vector<double> wa(a.size(), 1.0);
  std::vector<double> wb(b.size(), 1.0);
  const auto ga = fit_gaussian_weighted(a, wa);
  const auto gb = fit_gaussian_weighted(b, wb);
  std::vector<Point> means = {mix.components()[0].mean(), mix.components()[1].mean()};
  if (means[0][0] > means[1][0]) std::swap(means[0], means[1]);
  CHECK((means[0] - ga.mean()).norm() < 1e-6);
  CHECK((means[1] - gb.mean()).norm() < 1e-6);
  CHECK(mix.weights()[0] == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("duplicating every point leaves the fit unchanged") {
  Rng rng(5);
  auto x = cluster(p2(0.0, 0.0), 1.0, 50, rng);
  std::vector<double> w(x.size());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double& v : w) v = u(rng);
  auto xx = x;
  xx.insert(xx.end(), x.begin(), x.end());
  auto ww = w;
  ww.insert(ww.end(), w.begin(), w.end());
  const auto g = fit_gaussian_weighted(x, w);
  const auto h = fit_gaussian_weighted(xx, ww);
  CHECK((g.mean() - h.mean()).norm() < 1e-12);
  CHECK((g.covariance() - h.covariance()).norm() < 1e-12);
}

TEST_CASE("cross-entropy ignores zero weights and is infinite where q vanishes") {
  const UniformBoxDensity box(BoxDomain(1.0, 2));
  std::vector<Point> x = {p2(0.0, 0.0), p2(3.0, 0.0)};
  std::vector<double> w = {1.0, 0.0};
  CHECK(weighted_cross_entropy(x, w, box) == doctest::Approx(std::log(4.0)));
  w[1] = 1.0;
  CHECK(weighted_cross_entropy(x, w, box) == INFINITY);
  std::vector<double> zero = {0.0, 0.0};
  CHECK_THROWS_AS(weighted_cross_entropy(x, zero, box), EmptySupportError);
}

TEST_CASE("the closed-form fit minimizes the weighted cross-entropy") {
  Rng rng(21);
  auto x = cluster(p2(0.5, 0.5), 0.7, 120, rng);
  std::vector<double> w(x.size());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double& v : w) v = u(rng);
  const auto g = fit_gaussian_weighted(x, w);
  const double best = weighted_cross_entropy(x, w, g);
  std::normal_distribution<double> z(0.0, 0.05);
  for (int k = 0; k < 100; ++k) {
    Point m = g.mean();
    m[0] += z(rng);
    m[1] += z(rng);
    Matrix a = Matrix::Identity(2, 2);
    a(0, 0) += z(rng);
    a(1, 1) += z(rng);
    a(0, 1) += z(rng);
    const Matrix c = a * g.covariance() * a.transpose();
    CHECK(weighted_cross_entropy(x, w, GaussianDensity(m, c)) >= best);
  }
}

TEST_CASE("EM objective is monotone between re-seeds") {
  Rng rng(8);
  auto x = cluster(p2(-2.0, 0.0), 0.6, 80, rng);
  auto y = cluster(p2(2.0, 1.0), 0.4, 80, rng);
  auto z = cluster(p2(0.0, -2.0), 0.8, 80, rng);
  x.insert(x.end(), y.begin(), y.end());
  x.insert(x.end(), z.begin(), z.end());
  std::vector<double> w(x.size());
  std::uniform_real_distribution<double> u(0.1, 1.0);
  for (double& v : w) v = u(rng);
  const auto r = fit_mixture_em(x, w, 3, EmConfig{}, rng);
  REQUIRE(r.traces.size() == 5);
  for (const auto& t : r.traces) {
    for (std::size_t i = 1; i < t.objective.size(); ++i) {
      const bool reseed = std::find(t.reseeds.begin(), t.reseeds.end(), i) != t.reseeds.end();
      if (!reseed) CHECK(t.objective[i] <= t.objective[i - 1] + 1e-9);
    }
  }
  double best = INFINITY;
  for (const auto& t : r.traces) best = std::min(best, t.objective.back());
  CHECK(r.objective == doctest::Approx(best));
}

TEST_CASE("fits do not depend on input order") {
  Rng rng(13);
  auto x = cluster(p2(1.0, 2.0), 1.0, 60, rng);
  auto y = cluster(p2(-3.0, 0.0), 0.5, 60, rng);
  x.insert(x.end(), y.begin(), y.end());
  std::vector<double> w(x.size());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double& v : w) v = u(rng);

  std::vector<std::size_t> perm(x.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<Point> px;
  std::vector<double> pw;
  for (auto i : perm) {
    px.push_back(x[i]);
    pw.push_back(w[i]);
  }
  const auto g = fit_gaussian_weighted(x, w);
  const auto h = fit_gaussian_weighted(px, pw);
  CHECK((g.mean() - h.mean()).norm() == 0.0);
  CHECK((g.covariance() - h.covariance()).norm() == 0.0);

  Rng r1(99);
  Rng r2(99);
  const auto a = fit_mixture_em(x, w, 2, EmConfig{}, r1);
  const auto b = fit_mixture_em(px, pw, 2, EmConfig{}, r2);
  CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-12));
}

TEST_CASE("too few distinct points reduce the component count") {
  std::vector<Point> x = {p2(0, 0), p2(0, 0), p2(1, 1)};
  std::vector<double> w = {1.0, 1.0, 1.0};
  Rng rng(1);
  const auto r = fit_mixture_em(x, w, 4, EmConfig{}, rng);
  CHECK(r.density.component_count() == 2);
}

TEST_CASE("invalid EM settings are rejected") {
  std::vector<Point> x = {p2(0, 0), p2(1, 1)};
  std::vector<double> w = {1.0, 1.0};
  Rng rng(1);
  CHECK_THROWS_AS(fit_mixture_em(x, w, 0, EmConfig{}, rng), InvalidArgument);
  EmConfig bad;
  bad.n_restarts = 0;
  CHECK_THROWS_AS(fit_mixture_em(x, w, 2, bad, rng), InvalidArgument);
  bad = EmConfig{};
  bad.tol = 0.0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("fit_model dispatches on the family") {
  WeightedPoints d;
  Rng rng(4);
  d.points = cluster(p2(0, 0), 1.0, 40, rng);
  d.weights.assign(d.points.size(), 1.0);
  const auto g = fit_model(d, ModelSpec::single_gaussian(), FitOptions{}, rng);
  CHECK(g.density.holds<GaussianDensity>());
  const auto m = fit_model(d, ModelSpec::mixture(2), FitOptions{}, rng);
  CHECK(m.density.holds<MixtureDensity>());
  CHECK_THROWS_AS(fit_model(d, ModelSpec{ModelFamily::SingleGaussian, 2}, FitOptions{}, rng),
                  InvalidArgument);
}

TEST_CASE("importance-weighted fit converges to the Boltzmann moments") {
  const double beta = 5.0;
  const auto ref = support::boltzmann_grid(support::quadratic_g, beta, 1.0, 1024);

  Rng rng(2024);
  const int n = 100000;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Point> x;
  std::vector<double> w;
  for (int i = 0; i < n; ++i) {
    const Point p = p2(u(rng), u(rng));
    x.push_back(p);
    w.push_back(std::exp(-beta * support::quadratic_g(p[0], p[1])));
  }
  const auto g = fit_gaussian_weighted(x, w);

  // Delta-method standard errors of the self-normalized moments.
  double sw = 0.0;
  for (double v : w) sw += v;
  Eigen::Vector2d var_mean = Eigen::Vector2d::Zero();
  Eigen::Matrix2d var_cov = Eigen::Matrix2d::Zero();
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector2d d = x[static_cast<std::size_t>(i)] - g.mean();
    const double s = w[static_cast<std::size_t>(i)] / sw;
    for (int a = 0; a < 2; ++a) {
      var_mean[a] += s * s * d[a] * d[a];
      for (int b = 0; b < 2; ++b) {
        const double e = d[a] * d[b] - g.covariance()(a, b);
        var_cov(a, b) += s * s * e * e;
      }
    }
  }
  for (int a = 0; a < 2; ++a) {
    CHECK(std::abs(g.mean()[a] - ref.mean[a]) < 3.0 * std::sqrt(var_mean[a]));
    for (int b = 0; b < 2; ++b) {
      CHECK(std::abs(g.covariance()(a, b) - ref.cov(a, b)) < 3.0 * std::sqrt(var_cov(a, b)));
    }
  }
}
