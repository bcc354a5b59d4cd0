#include "conststyle/style_align.hpp"

#include <algorithm>
#include <cmath>

namespace conststyle {

void AlignmentParams::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
  if (!(sigma_floor > 0.0)) throw ConfigError("sigma_floor must be positive");
}

namespace {

// Shared core: per channel, out = target_sigma * (z - mu_x) / max(sigma_x, floor) + target_mu.
FeatureMap project_channels(const FeatureMap& z, const Vec& target_mu, const Vec& target_sigma,
                            double sigma_floor) {
  const InstanceStyle own = compute_instance_style(z);
  FeatureMap out(z.channels, z.height, z.width);
  for (int c = 0; c < z.channels; ++c) {
    const double denom = std::max(own.sigma[static_cast<std::size_t>(c)], sigma_floor);
    const double scale = target_sigma[static_cast<std::size_t>(c)] / denom;
    const double mu_x = own.mu[static_cast<std::size_t>(c)];
    const double shift = target_mu[static_cast<std::size_t>(c)];
    const auto in = z.channel(c);
    auto dst = out.channel(c);
    for (std::size_t i = 0; i < in.size(); ++i) dst[i] = scale * (in[i] - mu_x) + shift;
  }
  return out;
}

}  // namespace

FeatureMap align_to_style(const FeatureMap& z, const Vec& mu_s, const Vec& sigma_s,
                          double sigma_floor) {
  if (static_cast<int>(mu_s.size()) != z.channels || static_cast<int>(sigma_s.size()) != z.channels)
    throw ShapeError("target style does not match the feature map's channel count");
  for (double s : sigma_s)
    if (!(s > 0.0)) throw ConfigError("target sigma components must be positive");
  return project_channels(z, mu_s, sigma_s, sigma_floor);
}

FeatureMap partial_align(const FeatureMap& z, const Vec& unified_mean,
                         const AlignmentParams& params) {
  params.validate();
  if (static_cast<int>(unified_mean.size()) != 2 * z.channels)
    throw ShapeError("unified mean does not split into (mu_T, sigma_T) for this map");

  const InstanceStyle own = compute_instance_style(z);
  const double a = params.alpha;
  Vec target_mu(static_cast<std::size_t>(z.channels));
  Vec target_sigma(static_cast<std::size_t>(z.channels));
  for (int c = 0; c < z.channels; ++c) {
    const double mu_t = unified_mean[static_cast<std::size_t>(c)];
    const double sigma_t = unified_mean[static_cast<std::size_t>(z.channels + c)];
    target_mu[static_cast<std::size_t>(c)] = a * own.mu[static_cast<std::size_t>(c)] + (1.0 - a) * mu_t;
    target_sigma[static_cast<std::size_t>(c)] = a * own.sigma[static_cast<std::size_t>(c)] + (1.0 - a) * sigma_t;
  }
  return project_channels(z, target_mu, target_sigma, params.sigma_floor);
}

}  // namespace conststyle
