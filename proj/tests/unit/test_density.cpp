#include <doctest.h>

#include <cmath>

#include <Eigen/LU>

#include "pcopt/density.hpp"
#include "support.hpp"

using namespace pcopt;

namespace {

Point pt(double x, double y) {
  Point p(2);
  p << x, y;
  return p;
}

}  // namespace

TEST_CASE("gaussian log density at the mean") {
  GaussianDensity g(Point::Zero(1), Matrix::Identity(1, 1));
  CHECK(g.log_density(Point::Zero(1)) == doctest::Approx(-0.5 * std::log(2.0 * M_PI)));
}

TEST_CASE("gaussian log density matches the closed form") {
  Matrix cov(2, 2);
  cov << 2.0, 0.3, 0.3, 0.5;
  const Point mu = pt(0.4, -1.0);
  GaussianDensity g(mu, cov);
  const Point x = pt(1.1, -0.2);
  const Eigen::Vector2d d = x - mu;
  const double expect = -std::log(2.0 * M_PI) - 0.5 * std::log(cov.determinant()) -
                        0.5 * d.dot(cov.inverse() * d);
  CHECK(g.log_density(x) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("mixture of identical components equals the component") {
  GaussianDensity c(pt(1, 2), Matrix::Identity(2, 2) * 0.7);
  MixtureDensity m({0.3, 0.7}, {c, c});
  for (const Point& x : {pt(0, 0), pt(1, 2), pt(-3, 5)}) {
    CHECK(m.log_density(x) == doctest::Approx(c.log_density(x)).epsilon(1e-12));
  }
}

TEST_CASE("uniform box density") {
  UniformBoxDensity u(BoxDomain(1.0, 2));
  CHECK(u.log_density(pt(0, 0)) == doctest::Approx(std::log(0.25)));
  CHECK(u.log_density(pt(1.5, 0)) == -INFINITY);
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    const Point x = u.sample(rng);
    CHECK(x.cwiseAbs().maxCoeff() < 1.0);
  }
}

TEST_CASE("floored gaussian samples stay at the mean") {
  const double floor = covariance_floor();
  GaussianDensity g(pt(0.3, 0.3), Matrix::Zero(2, 2));
  CHECK(g.covariance().diagonal().minCoeff() == doctest::Approx(floor));
  Rng rng(4);
  for (int i = 0; i < 100; ++i) CHECK((g.sample(rng) - g.mean()).norm() < 1e-3);
}

TEST_CASE("sample moments match mean and covariance") {
  Matrix cov(2, 2);
  cov << 1.5, -0.6, -0.6, 0.8;
  GaussianDensity g(pt(2, -1), cov);
  Rng rng(11);
  const int n = 100000;
  Eigen::Vector2d s1 = Eigen::Vector2d::Zero();
  Eigen::Matrix2d s2 = Eigen::Matrix2d::Zero();
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector2d x = g.sample(rng);
    s1 += x;
    s2 += (x - g.mean()) * (x - g.mean()).transpose();
  }
  const Eigen::Vector2d m = s1 / n;
  const Eigen::Matrix2d c = s2 / n;
  CHECK((m - g.mean()).norm() < 4.0 * std::sqrt(cov.trace() / n));
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double se = std::sqrt((cov(i, i) * cov(j, j) + cov(i, j) * cov(i, j)) / n);
      CHECK(std::abs(c(i, j) - cov(i, j)) < 5.0 * se);
    }
  }
}

TEST_CASE("degenerate mixture weights draw only from the first component") {
  GaussianDensity a(pt(0, 0), Matrix::Identity(2, 2) * 0.01);
  GaussianDensity b(pt(100, 100), Matrix::Identity(2, 2) * 0.01);
  MixtureDensity m({1.0, 0.0}, {a, b});
  Rng rng(5);
  for (int i = 0; i < 2000; ++i) CHECK(m.sample(rng).norm() < 2.0);
}

TEST_CASE("mixture weights must form a simplex") {
  GaussianDensity a(pt(0, 0), Matrix::Identity(2, 2));
  CHECK_THROWS_AS(MixtureDensity({0.5, 0.6}, {a, a}), InvalidArgument);
  CHECK_THROWS_AS(MixtureDensity({-0.5, 1.5}, {a, a}), InvalidArgument);
  CHECK_THROWS_AS(MixtureDensity({1.0}, {a, a}), InvalidArgument);
}

TEST_CASE("responsibilities") {
  GaussianDensity a(pt(-1, 0), Matrix::Identity(2, 2));
  GaussianDensity b(pt(1, 0), Matrix::Identity(2, 2));
  SUBCASE("single component") {
    MixtureDensity m({1.0}, {a});
    CHECK(m.responsibilities(pt(3, 3))[0] == 1.0);
  }
  SUBCASE("symmetric") {
    MixtureDensity m({0.5, 0.5}, {a, b});
    const auto r = m.responsibilities(pt(0, 7));
    CHECK(r[0] == doctest::Approx(0.5));
    CHECK(r[1] == doctest::Approx(0.5));
  }
  SUBCASE("far separated") {
    GaussianDensity far(pt(5, 0), Matrix::Identity(2, 2));
    MixtureDensity m({0.5, 0.5}, {a, far});
    const auto r = m.responsibilities(a.mean());
    // Density ratio of the two components at a's mean is exp(-36 / 2).
    const double ratio = std::exp(-18.0);
    CHECK(std::abs(r[1] / (ratio / (1.0 + ratio)) - 1.0) < 1e-10);
    CHECK(r[0] == doctest::Approx(1.0));
  }
  SUBCASE("extreme underflow still gives a simplex") {
    GaussianDensity n1(pt(0, 0), Matrix::Identity(2, 2) * 1e-6);
    GaussianDensity n2(pt(1, 0), Matrix::Identity(2, 2) * 1e-6);
    MixtureDensity m({0.25, 0.75}, {n1, n2});
    const auto r = m.responsibilities(pt(1e3, 1e3));
    CHECK_FALSE(std::isnan(r.sum()));
    CHECK(r.minCoeff() >= 0.0);
    CHECK(r.sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("confidence ellipsoid") {
  GaussianDensity g(pt(0, 0), Matrix::Identity(2, 2));
  // chi-square with 2 dof: quantile(p) = -2 ln(1 - p).
  const auto e = confidence_ellipsoid(g, 0.9);
  CHECK(e.radii[0] == doctest::Approx(std::sqrt(-2.0 * std::log(0.1))));
  CHECK(e.radii[1] == doctest::Approx(2.146).epsilon(1e-3));
  CHECK(confidence_ellipsoid(g, 1e-12).radii.maxCoeff() < 1e-5);

  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 4.0;
  d(1, 1) = 1.0;
  const auto ax = confidence_ellipsoid(GaussianDensity(pt(1, 1), d), 0.5);
  for (int k = 0; k < 2; ++k) {
    CHECK(ax.axes.col(k).cwiseAbs().maxCoeff() == doctest::Approx(1.0));
  }
  CHECK(ax.radii.maxCoeff() == doctest::Approx(2.0 * std::sqrt(-2.0 * std::log(0.5))));
  CHECK_THROWS_AS(confidence_ellipsoid(g, 1.0), InvalidArgument);
}

TEST_CASE("densities integrate to one") {
  Matrix cov(2, 2);
  cov << 0.5, 0.2, 0.2, 0.3;
  const Density q = MixtureDensity({0.4, 0.6}, {GaussianDensity(pt(-1, 0), cov),
                                               GaussianDensity(pt(1, 0.5), cov * 2.0)});
  GaussianDensity h(pt(0, 0), Matrix::Identity(2, 2) * 9.0);
  Rng rng(8);
  std::vector<double> ratios;
  for (int i = 0; i < 200000; ++i) {
    const Point x = h.sample(rng);
    ratios.push_back(std::exp(q.log_density(x) - h.log_density(x)));
  }
  CHECK(std::abs(support::mean(ratios) - 1.0) < 5.0 * support::standard_error(ratios));
}

TEST_CASE("density wrapper dispatches") {
  const Density u = UniformBoxDensity(BoxDomain(4.0, 2));
  CHECK(u.component_count() == 0);
  CHECK(u.dimension() == 2);
  const Density g = GaussianDensity(pt(0, 0), Matrix::Identity(2, 2));
  CHECK(g.component_count() == 1);
  CHECK(g.holds<GaussianDensity>());
}
