#pragma once

#include "conststyle/style_stats.hpp"

namespace conststyle {

struct AlignmentParams {
  double alpha = 0.6;         // 0 = fully mapped to the unified domain, 1 = untouched
  double sigma_floor = 1e-5;  // lower guard on the sigma_x denominator

  void validate() const;
};

// Full projection onto a target style:  out = sigma_s * (z - mu_x) / sigma_x + mu_s
// per channel, with sigma_x guarded below by sigma_floor. The output's
// instance style is exactly (mu_s, sigma_s) whenever sigma_x clears the floor.
FeatureMap align_to_style(const FeatureMap& z, const Vec& mu_s, const Vec& sigma_s,
                          double sigma_floor = 1e-5);

// Partial projection used at inference: interpolates the target between the
// sample's own statistics and the unified domain's mean style,
//   out = (alpha * sigma_u + (1-alpha) * sigma_T) * (z - mu_u) / sigma_u
//       + (alpha * mu_u + (1-alpha) * mu_T),
// where unified_mean = concat(mu_T, sigma_T). alpha=1 leaves the map in its
// original state; alpha=0 maps it fully onto the unified style.
FeatureMap partial_align(const FeatureMap& z, const Vec& unified_mean,
                         const AlignmentParams& params);

}  // namespace conststyle
