#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "conststyle/style_stats.hpp"

namespace conststyle {

// One synthetic domain = a fixed affine style transform of the canonical
// rendering: channel mixing rotation, per-channel gain and bias, then
// additive Gaussian pixel noise. shift_level records the scalar the
// transform magnitudes were scaled by.
struct DomainSpec {
  int domain_id = 0;
  Vec channel_gain;        // positive, one per channel
  Vec channel_bias;        // one per channel
  double channel_mix_angle = 0.0;  // radians; rotates channel pairs (0,1) then (1,2)
  double noise_sigma = 0.0;
  double shift_level = 0.0;

  static DomainSpec identity(int domain_id, int channels = 3);
  void validate(int channels) const;
  bool is_identity() const;
};

struct LabeledSample {
  FeatureMap input;   // 3 x H x W raw image
  int class_label = 0;
  int domain_id = 0;
};

struct SyntheticDataset {
  std::vector<LabeledSample> samples;
  int n_classes = 0;
  std::vector<int> domain_ids;  // sorted, unique
  std::uint64_t seed = 0;
  int height = 16;
  int width = 16;

  std::vector<const LabeledSample*> domain_samples(int domain_id) const;
  std::vector<LabeledSample> filter(bool keep_domain, int domain_id) const;
};

inline constexpr int kDatagenChannels = 3;
inline constexpr int kMaxClassTemplates = 8;

// Balanced multi-domain dataset: per (class, domain) cell exactly
// per_class_per_domain samples. Class content is one of 8 geometric pattern
// templates with per-sample jitter; each domain applies its style transform.
// Fully deterministic per seed; per-domain substreams are derived so domains
// could be generated independently.
SyntheticDataset generate_dataset(std::span<const DomainSpec> domains, int n_classes,
                                  int per_class_per_domain, std::uint64_t seed,
                                  int height = 16, int width = 16);

// Domain family with a shared, seed-derived shift direction whose magnitude
// scales with shift_levels[k]; level 0 is the identity transform. Distances
// from the level-0 domain's style distribution grow with the level.
std::vector<DomainSpec> make_domain_family(int n_domains, std::span<const double> shift_levels,
                                           std::uint64_t seed);

// base transform followed by the level shift, folded into one spec
// (gains multiply, biases/angles add, noise adds in quadrature).
DomainSpec compose_domains(const DomainSpec& base, const DomainSpec& shift);

}  // namespace conststyle
