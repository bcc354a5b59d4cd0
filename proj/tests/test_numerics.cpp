#include <cmath>

#include "conststyle/numerics.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace conststyle;
using testutil::random_spd;

namespace {

SymMatrix reconstruct(const EighResult& eig) {
  const int n = static_cast<int>(eig.eigenvalues.size());
  SymMatrix out(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k)
        acc += eig.eigenvalues[k] * eig.eigenvectors(i, k) * eig.eigenvectors(j, k);
      out(i, j) = acc;
      out(j, i) = acc;
    }
  return out;
}

}  // namespace

TEST_CASE("eigh: identity") {
  const auto eig = eigh_psd(SymMatrix::identity(3));
  for (double lambda : eig.eigenvalues) CHECK(lambda == doctest::Approx(1.0).epsilon(1e-14));
  // V orthogonal: V^T V = I
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double dot = 0.0;
      for (int k = 0; k < 3; ++k) dot += eig.eigenvectors(k, i) * eig.eigenvectors(k, j);
      CHECK(dot == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));
    }
}

TEST_CASE("eigh: diagonal, ascending order") {
  const auto eig = eigh_psd(SymMatrix::diagonal({9.0, 4.0}));
  CHECK(eig.eigenvalues[0] == doctest::Approx(4.0));
  CHECK(eig.eigenvalues[1] == doctest::Approx(9.0));
  // permutation of identity
  CHECK(std::fabs(eig.eigenvectors(1, 0)) == doctest::Approx(1.0));
  CHECK(std::fabs(eig.eigenvectors(0, 1)) == doctest::Approx(1.0));
}

TEST_CASE("eigh: random SPD reconstruction oracle") {
  RngState rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const SymMatrix a = random_spd(4, rng);
    const auto eig = eigh_psd(a);
    CHECK(testutil::rel_frobenius_error(reconstruct(eig), a) < 1e-8);
  }
}

TEST_CASE("eigh: eigenvalues invariant under symmetric permutation") {
  RngState rng(3);
  const SymMatrix a = random_spd(5, rng);
  // permute rows+columns with a fixed permutation
  const int perm[5] = {3, 0, 4, 1, 2};
  SymMatrix p(5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) p(i, j) = a(perm[i], perm[j]);
  const auto ea = eigh_psd(a);
  const auto ep = eigh_psd(p);
  for (int i = 0; i < 5; ++i)
    CHECK(ea.eigenvalues[i] == doctest::Approx(ep.eigenvalues[i]).epsilon(1e-10));
}

TEST_CASE("eigh: rejects asymmetric and non-finite input") {
  SymMatrix bad(2);
  bad(0, 0) = 1.0;
  bad(0, 1) = 2.0;
  bad(1, 0) = 3.0;
  bad(1, 1) = 1.0;
  CHECK_THROWS_AS(eigh_psd(bad), InvariantError);

  SymMatrix nan(2);
  nan(0, 0) = std::nan("");
  CHECK_THROWS_AS(eigh_psd(nan), InvariantError);
}

TEST_CASE("sqrt_psd: identity and diagonal") {
  const SymMatrix root = sqrt_psd(SymMatrix::identity(4));
  CHECK(testutil::rel_frobenius_error(root, SymMatrix::identity(4)) < 1e-12);

  const SymMatrix d = sqrt_psd(SymMatrix::diagonal({4.0, 9.0}));
  CHECK(d(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(d(1, 1) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(d(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("sqrt_psd: multiply-back oracle on random SPD") {
  RngState rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const SymMatrix a = random_spd(5, rng);
    const SymMatrix s = sqrt_psd(a);
    CHECK(testutil::rel_frobenius_error(sym_sandwich(s, SymMatrix::identity(5)), s) < 1e-12);
    // s * s == a
    SymMatrix ss(5);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) {
        double acc = 0.0;
        for (int k = 0; k < 5; ++k) acc += s(i, k) * s(k, j);
        ss(i, j) = acc;
      }
    CHECK(testutil::rel_frobenius_error(ss, a) < 1e-8);
  }
}

TEST_CASE("sqrt_psd: fourth root property (m^{1/4})^4 = m") {
  RngState rng(7);
  const SymMatrix m = random_spd(4, rng);
  const SymMatrix quarter = sqrt_psd(sqrt_psd(m));
  // (q^2)^2
  auto square = [](const SymMatrix& x) {
    SymMatrix out(x.dim());
    for (int i = 0; i < x.dim(); ++i)
      for (int j = 0; j < x.dim(); ++j) {
        double acc = 0.0;
        for (int k = 0; k < x.dim(); ++k) acc += x(i, k) * x(k, j);
        out(i, j) = acc;
      }
    return out;
  };
  CHECK(testutil::rel_frobenius_error(square(square(quarter)), m) < 1e-6);
}

TEST_CASE("sqrt_psd: clamps tiny negatives, rejects indefinite") {
  SymMatrix tiny(2);
  tiny(0, 0) = 1.0;
  tiny(1, 1) = -1e-11;  // within the -1e-8 tolerance
  CHECK_NOTHROW(sqrt_psd(tiny));

  CHECK_THROWS_AS(sqrt_psd(SymMatrix::diagonal({1.0, -0.5})), NotPsdError);
}

TEST_CASE("cholesky: identity and hand-expanded 2x2") {
  const Matrix id = cholesky_psd(SymMatrix::identity(2));
  CHECK(id(0, 0) == doctest::Approx(1.0));
  CHECK(id(1, 1) == doctest::Approx(1.0));
  CHECK(id(1, 0) == doctest::Approx(0.0));

  SymMatrix m(2);
  m(0, 0) = 4.0;
  m(0, 1) = 2.0;
  m(1, 0) = 2.0;
  m(1, 1) = 5.0;
  const Matrix l = cholesky_psd(m);
  CHECK(l(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(l(0, 1) == doctest::Approx(0.0));
  CHECK(l(1, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(l(1, 1) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("cholesky: indefinite matrix errors") {
  SymMatrix m(2);
  m(0, 0) = 1.0;
  m(0, 1) = 2.0;
  m(1, 0) = 2.0;
  m(1, 1) = 1.0;
  CHECK_THROWS_AS(cholesky_psd(m), NotPsdError);
}

TEST_CASE("cholesky: recovers the factor of L L^T exactly") {
  RngState rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    // random lower-triangular with positive diagonal
    const int n = 4;
    Matrix l(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < i; ++j) l(i, j) = rng.normal();
      l(i, i) = 0.5 + rng.uniform01();
    }
    SymMatrix m(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j) {
        double acc = 0.0;
        for (int k = 0; k < n; ++k) acc += l(i, k) * l(j, k);
        m(i, j) = acc;
        m(j, i) = acc;
      }
    const Matrix got = cholesky_psd(m);
    double max_err = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) max_err = std::max(max_err, std::fabs(got(i, j) - l(i, j)));
    CHECK(max_err < 1e-10);
  }
}

TEST_CASE("regularize_psd: untouched / zero / negative eigenvalue arithmetic") {
  RngState rng(13);
  const SymMatrix spd = random_spd(3, rng, 0.5);  // min eig >= 0.5
  CHECK(frobenius_distance(regularize_psd(spd, 1e-6), spd) == 0.0);

  const SymMatrix zero = regularize_psd(SymMatrix(3), 1e-6);
  CHECK(testutil::rel_frobenius_error(zero, SymMatrix::diagonal({1e-6, 1e-6, 1e-6})) < 1e-12);

  const SymMatrix fixed = regularize_psd(SymMatrix::diagonal({-0.1, 1.0}), 1e-6);
  CHECK(fixed(0, 0) == doctest::Approx(1e-6).epsilon(1e-9));
  CHECK(fixed(1, 1) == doctest::Approx(1.1 + 1e-6).epsilon(1e-12));
  CHECK(min_eigenvalue(fixed) >= 1e-6 - 1e-15);
}

TEST_CASE("solve_lower: forward substitution against matmul") {
  RngState rng(19);
  Matrix l(3, 3);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < i; ++j) l(i, j) = rng.normal();
    l(i, i) = 1.0 + rng.uniform01();
  }
  const Vec x = {0.3, -1.2, 2.5};
  const Vec b = mat_vec(l, x);
  CHECK(testutil::max_abs_diff(solve_lower(l, b), x) < 1e-12);
}

TEST_CASE("sorted_sum: permutation invariant") {
  const Vec terms = {1e16, 1.0, -1e16, 3.0, 0.5};
  Vec shuffled = {3.0, -1e16, 0.5, 1e16, 1.0};
  CHECK(sorted_sum(terms) == sorted_sum(shuffled));
}
