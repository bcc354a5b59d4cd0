#include <cmath>

#include "conststyle/style_stats.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace conststyle;

namespace {

FeatureMap map_1x1x4(std::initializer_list<double> vals) {
  FeatureMap z(1, 1, 4);
  std::copy(vals.begin(), vals.end(), z.values.begin());
  return z;
}

GaussianStyle gaussian_1d(double mean, double variance) {
  GaussianStyle g;
  g.mean = {mean};
  g.covariance = SymMatrix::diagonal({variance});
  return g;
}

}  // namespace

TEST_CASE("instance style: constant map") {
  const FeatureMap z(1, 2, 2, 5.0);
  const InstanceStyle s = compute_instance_style(z);
  CHECK(s.mu[0] == doctest::Approx(5.0));
  CHECK(s.sigma[0] == 0.0);
}

TEST_CASE("instance style: direct evaluation of the channel formulas") {
  const InstanceStyle s = compute_instance_style(map_1x1x4({1, 2, 3, 4}));
  CHECK(s.mu[0] == doctest::Approx(2.5));
  CHECK(s.sigma[0] == doctest::Approx(std::sqrt(1.25)).epsilon(1e-12));  // population std
  const Vec eps = s.epsilon();
  CHECK(eps[0] == s.mu[0]);
  CHECK(eps[1] == s.sigma[0]);
}

TEST_CASE("instance style: duplicated channels give identical stats") {
  RngState rng(2);
  FeatureMap z(2, 3, 3);
  for (int h = 0; h < 3; ++h)
    for (int w = 0; w < 3; ++w) {
      z.at(0, h, w) = rng.normal();
      z.at(1, h, w) = z.at(0, h, w);
    }
  const InstanceStyle s = compute_instance_style(z);
  CHECK(s.mu[0] == s.mu[1]);
  CHECK(s.sigma[0] == s.sigma[1]);
}

TEST_CASE("instance style: spatial permutation invariance") {
  RngState rng(4);
  FeatureMap z = testutil::random_feature_map(2, 4, 4, rng);
  FeatureMap p = z;
  // reverse each channel's pixels
  for (int c = 0; c < 2; ++c) {
    auto ch = p.channel(c);
    std::reverse(ch.begin(), ch.end());
  }
  const InstanceStyle a = compute_instance_style(z);
  const InstanceStyle b = compute_instance_style(p);
  CHECK(testutil::max_abs_diff(a.mu, b.mu) == 0.0);
  CHECK(testutil::max_abs_diff(a.sigma, b.sigma) == 0.0);
}

TEST_CASE("instance style: affine response") {
  RngState rng(6);
  const FeatureMap z = testutil::random_feature_map(3, 5, 5, rng);
  const double a = 2.5, b = -1.25;
  FeatureMap scaled = z;
  for (double& v : scaled.values) v = a * v + b;
  const InstanceStyle s0 = compute_instance_style(z);
  const InstanceStyle s1 = compute_instance_style(scaled);
  for (int c = 0; c < 3; ++c) {
    CHECK(s1.mu[c] == doctest::Approx(a * s0.mu[c] + b).epsilon(1e-12));
    CHECK(s1.sigma[c] == doctest::Approx(a * s0.sigma[c]).epsilon(1e-12));
  }
}

TEST_CASE("domain style: single instance, hand pair, degenerate") {
  InstanceStyle one{{0.5, 1.5}, {0.1, 0.2}};
  const std::vector<InstanceStyle> single = {one};
  const GaussianStyle g1 = estimate_domain_style(single);
  CHECK(testutil::max_abs_diff(g1.mean, one.epsilon()) == 0.0);
  CHECK(frobenius_norm(g1.covariance) == 0.0);

  // eps1 = [0,1], eps2 = [2,3]  ->  mean [1,2], covariance [[1,1],[1,1]]
  InstanceStyle a{{0.0}, {1.0}};
  InstanceStyle b{{2.0}, {3.0}};
  const std::vector<InstanceStyle> pair = {a, b};
  const GaussianStyle g2 = estimate_domain_style(pair);
  CHECK(g2.mean[0] == doctest::Approx(1.0));
  CHECK(g2.mean[1] == doctest::Approx(2.0));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(g2.covariance(i, j) == doctest::Approx(1.0));

  const std::vector<InstanceStyle> same = {one, one, one};
  CHECK(frobenius_norm(estimate_domain_style(same).covariance) == 0.0);
}

TEST_CASE("domain style: errors") {
  const std::vector<InstanceStyle> none;
  CHECK_THROWS_AS(estimate_domain_style(none), EmptyDomainError);
  const std::vector<InstanceStyle> mixed = {InstanceStyle{{0.0}, {1.0}},
                                            InstanceStyle{{0.0, 1.0}, {1.0, 1.0}}};
  CHECK_THROWS_AS(estimate_domain_style(mixed), ShapeError);
}

TEST_CASE("domain style: covariance PSD for random inputs") {
  RngState rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<InstanceStyle> styles;
    const int n = 2 + static_cast<int>(rng.bounded(20));
    for (int i = 0; i < n; ++i) {
      InstanceStyle s;
      for (int c = 0; c < 3; ++c) {
        s.mu.push_back(rng.normal());
        s.sigma.push_back(std::fabs(rng.normal()));
      }
      styles.push_back(s);
    }
    const GaussianStyle g = estimate_domain_style(styles);
    CHECK(min_eigenvalue(g.covariance) >= -1e-8 * std::max(1.0, frobenius_norm(g.covariance)));
  }
}

TEST_CASE("frechet: identity of indiscernibles and 1D closed form") {
  RngState rng(10);
  GaussianStyle g;
  g.mean = {0.3, -0.7, 1.1, 0.0};
  g.covariance = testutil::random_spd(4, rng);
  CHECK(frechet_distance(g, g) == doctest::Approx(0.0).epsilon(1e-10));

  // N(0,1) vs N(2,9): d^2 = 4 + (1-3)^2 = 8
  const double d = frechet_distance(gaussian_1d(0.0, 1.0), gaussian_1d(2.0, 9.0));
  CHECK(d == doctest::Approx(std::sqrt(8.0)).epsilon(1e-12));
}

TEST_CASE("frechet: diagonal case matches the per-dimension closed form") {
  GaussianStyle a, b;
  a.mean = {0.0, 1.0, -2.0};
  b.mean = {1.0, 0.0, 0.5};
  const Vec va = {0.25, 4.0, 1.0};
  const Vec vb = {1.0, 1.0, 2.25};
  a.covariance = SymMatrix::diagonal(va);
  b.covariance = SymMatrix::diagonal(vb);
  double d2 = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double dm = a.mean[i] - b.mean[i];
    const double ds = std::sqrt(va[i]) - std::sqrt(vb[i]);
    d2 += dm * dm + ds * ds;
  }
  CHECK(frechet_distance(a, b) == doctest::Approx(std::sqrt(d2)).epsilon(1e-10));
}

TEST_CASE("frechet: symmetry and triangle inequality on random triples") {
  RngState rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    GaussianStyle g[3];
    for (auto& x : g) {
      x.mean = {rng.normal(), rng.normal(), rng.normal()};
      x.covariance = testutil::random_spd(3, rng);
    }
    const double dab = frechet_distance(g[0], g[1]);
    const double dba = frechet_distance(g[1], g[0]);
    CHECK(std::fabs(dab - dba) < 1e-9);
    const double dbc = frechet_distance(g[1], g[2]);
    const double dac = frechet_distance(g[0], g[2]);
    CHECK(dac <= dab + dbc + 1e-8);
  }
}

TEST_CASE("frechet: dimension mismatch errors") {
  GaussianStyle a = gaussian_1d(0.0, 1.0);
  GaussianStyle b;
  b.mean = {0.0, 0.0};
  b.covariance = SymMatrix::identity(2);
  CHECK_THROWS_AS(frechet_distance(a, b), ShapeError);
}

TEST_CASE("domain gap terms: zero, 3-4-5, averaging") {
  GaussianStyle unified;
  unified.mean = {1.0, 2.0, 0.5, 0.25};  // C = 2
  unified.covariance = SymMatrix(4);

  InstanceStyle at_mean{{1.0, 2.0}, {0.5, 0.25}};
  const std::vector<InstanceStyle> exact = {at_mean, at_mean};
  const auto [z_mu, z_sigma] = domain_gap_terms(unified, exact);
  CHECK(z_mu == 0.0);
  CHECK(z_sigma == 0.0);

  InstanceStyle off{{1.0 + 3.0, 2.0 + 4.0}, {0.5, 0.25}};
  const std::vector<InstanceStyle> one = {off};
  const auto [d_mu, d_sigma] = domain_gap_terms(unified, one);
  CHECK(d_mu == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(d_sigma == 0.0);

  InstanceStyle plus{{1.0 + 0.3, 2.0 + 0.4}, {0.5, 0.25}};
  InstanceStyle minus{{1.0 - 0.3, 2.0 - 0.4}, {0.5, 0.25}};
  const std::vector<InstanceStyle> pair = {plus, minus};
  const auto [avg_mu, avg_sigma] = domain_gap_terms(unified, pair);
  CHECK(avg_mu == doctest::Approx(0.5).epsilon(1e-12));  // |delta| = 0.5 both times
  CHECK(avg_sigma == 0.0);

  const std::vector<InstanceStyle> none;
  CHECK_THROWS_AS(domain_gap_terms(unified, none), EmptyDomainError);
}
