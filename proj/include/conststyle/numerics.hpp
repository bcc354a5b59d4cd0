#pragma once

#include <span>
#include <vector>

#include "conststyle/error.hpp"

namespace conststyle {

using Vec = std::vector<double>;

// General dense row-major matrix. Only what the Gaussian-style operations
// need: products, transposes, norms. No LU/SVD/sparse by design.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0);
  static Matrix identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * cols_ + j]; }
  Vec& data() { return a_; }
  const Vec& data() const { return a_; }

  Matrix transposed() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  Vec a_;
};

// Dense symmetric matrix, row-major, dim x dim.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(int dim, double fill = 0.0);
  static SymMatrix identity(int dim);
  static SymMatrix diagonal(const Vec& d);
  static SymMatrix from_matrix(const Matrix& m);  // symmetrizes (m + m^T)/2

  int dim() const { return dim_; }
  double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * dim_ + j]; }
  double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * dim_ + j]; }
  Vec& data() { return a_; }
  const Vec& data() const { return a_; }

  double trace() const;

  // Invariants: |a_ij - a_ji| <= 1e-12 * max(1, |a_ij|), all entries finite.
  void check_symmetric() const;
  void check_finite() const;

 private:
  int dim_ = 0;
  Vec a_;
};

struct EighResult {
  Vec eigenvalues;      // ascending
  Matrix eigenvectors;  // columns; V * diag(lambda) * V^T reconstructs input
};

// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
// Throws InvariantError on asymmetric/non-finite input, NumericalError if
// the sweep cap is hit before the off-diagonal mass vanishes.
EighResult eigh_psd(const SymMatrix& m);

// Symmetric PSD square root via eigendecomposition. Eigenvalues below
// eig_floor are clamped to eig_floor (empirical covariances of tiny clusters
// are rank-deficient); eigenvalues below -1e-8 relative to the spectral
// scale raise NotPsdError.
SymMatrix sqrt_psd(const SymMatrix& m, double eig_floor = 1e-12);

// Cholesky factor L with L * L^T = m, positive diagonal. Requires strict
// positive definiteness; throws NotPsdError otherwise (regularize first).
Matrix cholesky_psd(const SymMatrix& m);

// m + lambda * I with the smallest lambda >= 0 such that the minimum
// eigenvalue of the result is >= floor.
SymMatrix regularize_psd(const SymMatrix& m, double floor);

double min_eigenvalue(const SymMatrix& m);

double frobenius_norm(const SymMatrix& m);
double frobenius_norm(const Matrix& m);
double frobenius_distance(const SymMatrix& a, const SymMatrix& b);

Matrix matmul(const Matrix& a, const Matrix& b);
Vec mat_vec(const Matrix& m, const Vec& v);

// s * a * s for symmetric s, a (result symmetrized against roundoff).
SymMatrix sym_sandwich(const SymMatrix& s, const SymMatrix& a);

// Forward substitution: solves L * x = b for lower-triangular L.
Vec solve_lower(const Matrix& lower, const Vec& b);

// Sum of terms accumulated in ascending order; invariant under permutation
// of the input, which keeps symmetric aggregations (barycenters, cluster
// averages) exactly order-independent.
double sorted_sum(Vec terms);

}  // namespace conststyle
