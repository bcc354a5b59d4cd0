#pragma once

#include <span>
#include <utility>
#include <vector>

#include "conststyle/numerics.hpp"

namespace conststyle {

// C x H x W activation tensor, row-major: index (c * height + h) * width + w.
struct FeatureMap {
  int channels = 0;
  int height = 0;
  int width = 0;
  Vec values;

  FeatureMap() = default;
  FeatureMap(int c, int h, int w, double fill = 0.0)
      : channels(c), height(h), width(w),
        values(static_cast<std::size_t>(c) * h * w, fill) {}

  double at(int c, int h, int w) const {
    return values[(static_cast<std::size_t>(c) * height + h) * width + w];
  }
  double& at(int c, int h, int w) {
    return values[(static_cast<std::size_t>(c) * height + h) * width + w];
  }
  int spatial_size() const { return height * width; }
  std::span<const double> channel(int c) const {
    return {values.data() + static_cast<std::size_t>(c) * spatial_size(),
            static_cast<std::size_t>(spatial_size())};
  }
  std::span<double> channel(int c) {
    return {values.data() + static_cast<std::size_t>(c) * spatial_size(),
            static_cast<std::size_t>(spatial_size())};
  }

  void validate() const;  // dims >= 1, finite entries, size consistency
};

// Per-channel mean and population standard deviation of a feature map.
struct InstanceStyle {
  Vec mu;
  Vec sigma;

  int channels() const { return static_cast<int>(mu.size()); }
  // concat(mu, sigma): epsilon[0..C) == mu, epsilon[C..2C) == sigma, exactly.
  Vec epsilon() const;
};

// Multivariate normal over style statistics: one domain (or cluster, or the
// unified domain) summarized as mean in R^{2C} and 2C x 2C covariance.
struct GaussianStyle {
  Vec mean;
  SymMatrix covariance;

  int dim() const { return static_cast<int>(mean.size()); }
  void validate() const;  // covariance symmetric, min eigenvalue >= -1e-8, mean finite
};

// Channel-wise mean and population std (1/HW normalization, no Bessel
// correction). sigma is the exact standard deviation: a constant channel
// yields sigma == 0; downstream alignment guards the division separately.
InstanceStyle compute_instance_style(const FeatureMap& z);

// Population mean and covariance (1/n) of the instance styles' epsilon
// vectors. Throws EmptyDomainError on empty input, ShapeError on mixed C.
GaussianStyle estimate_domain_style(std::span<const InstanceStyle> styles);

// Frechet / 2-Wasserstein distance between Gaussians (Dowson-Landau form):
//   d^2 = |mu_a - mu_b|^2 + Tr(S_a + S_b - 2 (S_b^{1/2} S_a S_b^{1/2})^{1/2}).
// Tiny negative trace residue from roundoff is clamped to zero.
double frechet_distance(const GaussianStyle& a, const GaussianStyle& b);

// Mean L2 distances between the unified style's (mu, sigma) blocks and each
// instance style:  d_mu = (1/n) sum_i |mu_T - mu_i|,  d_sigma analogous.
std::pair<double, double> domain_gap_terms(const GaussianStyle& unified,
                                           std::span<const InstanceStyle> styles);

}  // namespace conststyle
