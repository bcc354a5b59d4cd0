#pragma once

#include <span>
#include <string>
#include <utility>

#include "conststyle/rng.hpp"
#include "conststyle/style_clustering.hpp"
#include "conststyle/style_stats.hpp"

namespace conststyle {

enum class UnifiedMethod { average, barycenter };

std::string to_string(UnifiedMethod method);
UnifiedMethod unified_method_from_string(const std::string& name);

struct UnifiedDomain {
  GaussianStyle style;
  UnifiedMethod method = UnifiedMethod::average;
  int iterations = 0;
  double residual = 0.0;   // Frobenius norm of the fixed-point defect
  bool converged = true;
};

// Wasserstein barycenter of Gaussians. The mean is the arithmetic mean of
// the component means; the covariance is iterated from the mean covariance,
//   S_{i+1} = (1/N) sum_k (S_i^{1/2} C_k S_i^{1/2})^{1/2},
// until successive iterates differ by less than tol in Frobenius norm.
// Non-convergence is reported via converged=false, not an error.
UnifiedDomain barycenter_gaussian(std::span<const GaussianStyle> components,
                                  double tol = 1e-10, int max_iter = 500);

// Averaging approximation: elementwise means of the component means and
// covariances.
UnifiedDomain average_clusters(std::span<const GaussianStyle> components);

// Algorithm: cluster the styles' epsilon vectors into N' Gaussian components,
// then aggregate with the selected method (default: averaging).
UnifiedDomain determine_unified_domain(std::span<const InstanceStyle> styles,
                                       const ClusterConfig& cluster_config,
                                       UnifiedMethod method = UnifiedMethod::average);

// Reusable sampling view: the dense factor F (F F^T = covariance) is
// computed once so per-image draws are cheap.
struct StyleSampler {
  Vec mean;
  Matrix factor;
  double sigma_floor = 1e-5;

  int dim() const { return static_cast<int>(mean.size()); }
  int channels() const { return dim() / 2; }
  // Draws epsilon = mean + F g and splits it into (mu_s, sigma_s); sigma_s
  // is clamped below at sigma_floor, since a Gaussian draw can go negative.
  std::pair<Vec, Vec> draw(RngState& rng) const;
};

StyleSampler make_style_sampler(const UnifiedDomain& domain, double sigma_floor = 1e-5);

// One-shot draw: epsilon_s ~ N(mean, covariance), split into (mu_s, sigma_s).
std::pair<Vec, Vec> sample_style(const UnifiedDomain& domain, RngState& rng,
                                 double sigma_floor = 1e-5);

}  // namespace conststyle
