#include "conststyle/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace conststyle {

namespace {

constexpr int kMaxJacobiSweeps = 64;

double off_diagonal_norm(const SymMatrix& a) {
  double s = 0.0;
  for (int i = 0; i < a.dim(); ++i)
    for (int j = i + 1; j < a.dim(); ++j) s += 2.0 * a(i, j) * a(i, j);
  return std::sqrt(s);
}

}  // namespace

Matrix::Matrix(int rows, int cols, double fill)
    : rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows) * cols, fill) {
  if (rows < 0 || cols < 0) throw ShapeError("matrix dimensions must be nonnegative");
}

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

SymMatrix::SymMatrix(int dim, double fill)
    : dim_(dim), a_(static_cast<std::size_t>(dim) * dim, fill) {
  if (dim < 0) throw ShapeError("matrix dimension must be nonnegative");
}

SymMatrix SymMatrix::identity(int dim) {
  SymMatrix m(dim);
  for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
  return m;
}

SymMatrix SymMatrix::diagonal(const Vec& d) {
  SymMatrix m(static_cast<int>(d.size()));
  for (int i = 0; i < m.dim(); ++i) m(i, i) = d[static_cast<std::size_t>(i)];
  return m;
}

SymMatrix SymMatrix::from_matrix(const Matrix& m) {
  if (m.rows() != m.cols()) throw ShapeError("cannot symmetrize a non-square matrix");
  SymMatrix s(m.rows());
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) s(i, j) = 0.5 * (m(i, j) + m(j, i));
  return s;
}

double SymMatrix::trace() const {
  double t = 0.0;
  for (int i = 0; i < dim_; ++i) t += (*this)(i, i);
  return t;
}

void SymMatrix::check_symmetric() const {
  for (int i = 0; i < dim_; ++i) {
    for (int j = i + 1; j < dim_; ++j) {
      const double d = std::fabs((*this)(i, j) - (*this)(j, i));
      if (d > 1e-12 * std::max(1.0, std::fabs((*this)(i, j))))
        throw InvariantError("matrix is not symmetric");
    }
  }
}

void SymMatrix::check_finite() const {
  for (double v : a_)
    if (!std::isfinite(v)) throw InvariantError("matrix has non-finite entries");
}

EighResult eigh_psd(const SymMatrix& m) {
  m.check_finite();
  m.check_symmetric();
  const int n = m.dim();

  SymMatrix a = m;
  Matrix v = Matrix::identity(n);
  const double scale = std::max(1.0, frobenius_norm(m));

  bool converged = (n <= 1) || off_diagonal_norm(a) <= 1e-14 * scale;
  for (int sweep = 0; sweep < kMaxJacobiSweeps && !converged; ++sweep) {
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::fabs(apq) <= 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t;
        if (std::fabs(theta) > 1e154) {
          t = 1.0 / (2.0 * theta);  // avoid theta^2 overflow
        } else {
          t = (theta >= 0.0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        const double app = a(p, p);
        const double aqq = a(q, q);
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (int i = 0; i < n; ++i) {
          if (i == p || i == q) continue;
          const double aip = a(i, p);
          const double aiq = a(i, q);
          a(i, p) = c * aip - s * aiq;
          a(p, i) = a(i, p);
          a(i, q) = s * aip + c * aiq;
          a(q, i) = a(i, q);
        }
        for (int i = 0; i < n; ++i) {
          const double vip = v(i, p);
          const double viq = v(i, q);
          v(i, p) = c * vip - s * viq;
          v(i, q) = s * vip + c * viq;
        }
      }
    }
    converged = off_diagonal_norm(a) <= 1e-14 * scale;
  }
  if (!converged) throw NumericalError("Jacobi eigendecomposition did not converge");

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) { return a(i, i) < a(j, j); });

  EighResult result;
  result.eigenvalues.resize(static_cast<std::size_t>(n));
  result.eigenvectors = Matrix(n, n);
  for (int k = 0; k < n; ++k) {
    result.eigenvalues[static_cast<std::size_t>(k)] = a(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]);
    for (int i = 0; i < n; ++i) result.eigenvectors(i, k) = v(i, order[static_cast<std::size_t>(k)]);
  }
  return result;
}

SymMatrix sqrt_psd(const SymMatrix& m, double eig_floor) {
  if (eig_floor < 0.0) throw ConfigError("eig_floor must be nonnegative");
  EighResult eig = eigh_psd(m);
  double spectral_scale = 0.0;
  for (double lambda : eig.eigenvalues) spectral_scale = std::max(spectral_scale, std::fabs(lambda));
  const double negativity_tol = 1e-8 * std::max(1.0, spectral_scale);

  const int n = m.dim();
  Vec roots(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double lambda = eig.eigenvalues[static_cast<std::size_t>(k)];
    if (lambda < -negativity_tol) throw NotPsdError("matrix has a significantly negative eigenvalue");
    roots[static_cast<std::size_t>(k)] = std::sqrt(std::max(lambda, eig_floor));
  }

  SymMatrix s(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k)
        acc += roots[static_cast<std::size_t>(k)] * eig.eigenvectors(i, k) * eig.eigenvectors(j, k);
      s(i, j) = acc;
      s(j, i) = acc;
    }
  }
  return s;
}

Matrix cholesky_psd(const SymMatrix& m) {
  m.check_finite();
  m.check_symmetric();
  const int n = m.dim();
  Matrix l(n, n);
  for (int j = 0; j < n; ++j) {
    double diag = m(j, j);
    for (int k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (diag <= 0.0 || !std::isfinite(diag)) throw NotPsdError("matrix is not positive definite");
    l(j, j) = std::sqrt(diag);
    for (int i = j + 1; i < n; ++i) {
      double acc = m(i, j);
      for (int k = 0; k < j; ++k) acc -= l(i, k) * l(j, k);
      l(i, j) = acc / l(j, j);
    }
  }
  return l;
}

SymMatrix regularize_psd(const SymMatrix& m, double floor) {
  if (floor <= 0.0) throw ConfigError("regularization floor must be positive");
  const double lambda_min = min_eigenvalue(m);
  const double shift = std::max(0.0, floor - lambda_min);
  if (shift == 0.0) return m;
  SymMatrix out = m;
  for (int i = 0; i < out.dim(); ++i) out(i, i) += shift;
  return out;
}

double min_eigenvalue(const SymMatrix& m) {
  if (m.dim() == 0) return 0.0;
  return eigh_psd(m).eigenvalues.front();
}

double frobenius_norm(const SymMatrix& m) {
  double s = 0.0;
  for (double v : m.data()) s += v * v;
  return std::sqrt(s);
}

double frobenius_norm(const Matrix& m) {
  double s = 0.0;
  for (double v : m.data()) s += v * v;
  return std::sqrt(s);
}

double frobenius_distance(const SymMatrix& a, const SymMatrix& b) {
  if (a.dim() != b.dim()) throw ShapeError("dimension mismatch in Frobenius distance");
  double s = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    const double d = a.data()[i] - b.data()[i];
    s += d * d;
  }
  return std::sqrt(s);
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw ShapeError("inner dimensions do not match");
  Matrix c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

Vec mat_vec(const Matrix& m, const Vec& v) {
  if (m.cols() != static_cast<int>(v.size())) throw ShapeError("matrix-vector dimension mismatch");
  Vec out(static_cast<std::size_t>(m.rows()), 0.0);
  for (int i = 0; i < m.rows(); ++i) {
    double acc = 0.0;
    for (int j = 0; j < m.cols(); ++j) acc += m(i, j) * v[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

SymMatrix sym_sandwich(const SymMatrix& s, const SymMatrix& a) {
  if (s.dim() != a.dim()) throw ShapeError("dimension mismatch in sandwich product");
  const int n = s.dim();
  Matrix tmp(n, n);  // s * a
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k) acc += s(i, k) * a(k, j);
      tmp(i, j) = acc;
    }
  Matrix full(n, n);  // (s * a) * s
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k) acc += tmp(i, k) * s(k, j);
      full(i, j) = acc;
    }
  return SymMatrix::from_matrix(full);
}

Vec solve_lower(const Matrix& lower, const Vec& b) {
  if (lower.rows() != lower.cols() || lower.rows() != static_cast<int>(b.size()))
    throw ShapeError("triangular solve dimension mismatch");
  const int n = lower.rows();
  Vec x(b);
  for (int i = 0; i < n; ++i) {
    double acc = x[static_cast<std::size_t>(i)];
    for (int j = 0; j < i; ++j) acc -= lower(i, j) * x[static_cast<std::size_t>(j)];
    if (lower(i, i) == 0.0) throw NumericalError("singular triangular factor");
    x[static_cast<std::size_t>(i)] = acc / lower(i, i);
  }
  return x;
}

double sorted_sum(Vec terms) {
  std::sort(terms.begin(), terms.end());
  double s = 0.0;
  for (double t : terms) s += t;
  return s;
}

}  // namespace conststyle
