#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "conststyle/style_stats.hpp"

namespace conststyle {

struct ClusterConfig {
  int n_clusters = 4;
  int max_iterations = 200;
  double log_likelihood_tol = 1e-7;
  double covariance_floor = 1e-6;
  std::uint64_t seed = 0;
  // Dirichlet concentration on the mixture weights; 1 = plain EM.
  double dirichlet_concentration = 1.0;

  void validate() const;
};

struct StyleClusterModel {
  Vec weights;                           // simplex, sums to 1
  std::vector<GaussianStyle> components; // covariances regularized to covariance_floor
  double final_log_likelihood = 0.0;
  int iterations_run = 0;
  bool degenerate = false;               // all-identical data or collapsed duplicates
  Vec log_likelihood_path;               // one entry per EM iteration
};

// Full-covariance Gaussian mixture fit by EM over the styles' epsilon
// vectors. Initialization is k-means++-style seeding driven by config.seed;
// a component whose responsibility mass vanishes is re-seeded from the point
// the current mixture explains worst.
StyleClusterModel fit_style_gmm(std::span<const InstanceStyle> styles, const ClusterConfig& config);

// Posterior component probabilities for one style and the argmax index
// (lowest index wins ties).
std::pair<int, Vec> predict_cluster(const StyleClusterModel& model, const InstanceStyle& style);

}  // namespace conststyle
