#pragma once

// Shared helpers for the unit and acceptance suites: random matrix/feature
// generators and the independent oracles (ARI, Spearman) the tests rely on.

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "conststyle/numerics.hpp"
#include "conststyle/rng.hpp"
#include "conststyle/style_stats.hpp"

namespace testutil {

using conststyle::FeatureMap;
using conststyle::Matrix;
using conststyle::RngState;
using conststyle::SymMatrix;
using conststyle::Vec;

inline SymMatrix random_spd(int dim, RngState& rng, double ridge = 0.2) {
  Matrix m(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) m(i, j) = rng.normal();
  SymMatrix s(dim);
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j) {
      double acc = 0.0;
      for (int k = 0; k < dim; ++k) acc += m(i, k) * m(j, k);
      s(i, j) = acc / dim;
      s(j, i) = s(i, j);
    }
  for (int i = 0; i < dim; ++i) s(i, i) += ridge;
  return s;
}

inline SymMatrix random_symmetric(int dim, RngState& rng) {
  SymMatrix s(dim);
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j) {
      s(i, j) = rng.normal();
      s(j, i) = s(i, j);
    }
  return s;
}

inline FeatureMap random_feature_map(int c, int h, int w, RngState& rng, double mean = 0.0,
                                     double scale = 1.0) {
  FeatureMap map(c, h, w);
  for (double& v : map.values) v = mean + scale * rng.normal();
  return map;
}

inline double max_abs_diff(const Vec& a, const Vec& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

inline double rel_frobenius_error(const SymMatrix& got, const SymMatrix& want) {
  return conststyle::frobenius_distance(got, want) /
         std::max(1.0, conststyle::frobenius_norm(want));
}

// Adjusted Rand index between two labelings.
inline double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  const std::size_t n = a.size();
  std::map<int, std::map<int, long long>> table;
  std::map<int, long long> row_sum, col_sum;
  for (std::size_t i = 0; i < n; ++i) {
    table[a[i]][b[i]] += 1;
    row_sum[a[i]] += 1;
    col_sum[b[i]] += 1;
  }
  auto choose2 = [](long long m) { return static_cast<double>(m) * (m - 1) / 2.0; };
  double sum_cells = 0.0, sum_rows = 0.0, sum_cols = 0.0;
  for (const auto& [ra, row] : table)
    for (const auto& [cb, count] : row) sum_cells += choose2(count);
  for (const auto& [ra, count] : row_sum) sum_rows += choose2(count);
  for (const auto& [cb, count] : col_sum) sum_cols += choose2(count);
  const double total = choose2(static_cast<long long>(n));
  const double expected = sum_rows * sum_cols / total;
  const double max_index = 0.5 * (sum_rows + sum_cols);
  if (max_index == expected) return 1.0;
  return (sum_cells - expected) / (max_index - expected);
}

// Spearman rank correlation with average ranks for ties.
inline double spearman_rho(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  auto ranks = [n](const std::vector<double>& v) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
    std::vector<double> r(n);
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
      const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const std::vector<double> rx = ranks(x);
  const std::vector<double> ry = ranks(y);
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += rx[i] / n;
    my += ry[i] / n;
  }
  double cov = 0, vx = 0, vy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    cov += (rx[i] - mx) * (ry[i] - my);
    vx += (rx[i] - mx) * (rx[i] - mx);
    vy += (ry[i] - my) * (ry[i] - my);
  }
  if (vx == 0 || vy == 0) return 0.0;
  return cov / std::sqrt(vx * vy);
}

}  // namespace testutil
