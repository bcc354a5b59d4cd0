#include "conststyle/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "conststyle/rng.hpp"

namespace conststyle {

namespace {

// Shift-direction magnitudes per unit level. Calibrated so that domain gaps
// are large enough to hurt a plain ERM model while remaining mostly a
// first/second-moment (plus channel-mix) shift.
constexpr double kGainPerLevel = 0.25;   // log-gain units
constexpr double kBiasPerLevel = 0.30;
constexpr double kAnglePerLevel = 0.10;  // radians
constexpr double kNoisePerLevel = 0.05;

struct Jitter {
  int off_h = 0;
  int off_w = 0;
  double radius_scale = 1.0;
  double amplitude = 1.0;
  double angle = 0.0;
  double gain[kDatagenChannels] = {1.0, 1.0, 1.0};
  double bias[kDatagenChannels] = {0.0, 0.0, 0.0};
};

double pattern_value(int cls, int h, int w, int height, int width, const Jitter& j) {
  const double ch = 0.5 * (height - 1) + j.off_h * 0.5;
  const double cw = 0.5 * (width - 1) + j.off_w * 0.5;
  const double r = std::hypot(h - ch, w - cw);
  switch (cls) {
    case 0:  // horizontal bars
      return ((h + j.off_h) / 3) % 2 == 0 ? 1.0 : 0.0;
    case 1:  // checkerboard
      return (((h + j.off_h) / 4) + ((w + j.off_w) / 4)) % 2 == 0 ? 1.0 : 0.0;
    case 2:  // filled disk
      return r <= 0.30 * height * j.radius_scale ? 1.0 : 0.0;
    case 3:  // diagonal stripes
      return ((h + w + j.off_h) / 3) % 2 == 0 ? 1.0 : 0.0;
    case 4:  // vertical bars
      return ((w + j.off_w) / 3) % 2 == 0 ? 1.0 : 0.0;
    case 5:  // cross
      return (std::abs(h - static_cast<int>(ch)) <= 1 || std::abs(w - static_cast<int>(cw)) <= 1)
                 ? 1.0
                 : 0.0;
    case 6:  // ring
      return (r >= 0.18 * height * j.radius_scale && r <= 0.40 * height * j.radius_scale) ? 1.0
                                                                                          : 0.0;
    case 7: {  // oriented half-plane
      const double a = std::cos(0.785398163397448 + j.angle);
      const double b = std::sin(0.785398163397448 + j.angle);
      return (a * (h - ch) + b * (w - cw)) >= 0.0 ? 1.0 : 0.0;
    }
    default:
      throw ConfigError("class template out of range");
  }
}

// Per-class channel palettes: every class carries its own channel signature,
// so style statistics separate classes cleanly inside a domain (and style
// clusters form around content rather than noise).
constexpr double kClassBase[kMaxClassTemplates][kDatagenChannels] = {
    {0.10, 0.55, 0.25}, {0.45, 0.15, 0.40}, {0.25, 0.35, 0.60}, {0.55, 0.45, 0.10},
    {0.15, 0.25, 0.50}, {0.50, 0.30, 0.30}, {0.30, 0.60, 0.15}, {0.40, 0.20, 0.55}};
constexpr double kClassAmp[kMaxClassTemplates][kDatagenChannels] = {
    {0.90, -0.35, 0.50}, {-0.40, 0.85, 0.30}, {0.60, 0.40, -0.45}, {-0.30, 0.50, 0.80},
    {0.75, 0.55, -0.30}, {-0.50, -0.35, 0.85}, {0.55, -0.45, 0.65}, {0.80, 0.35, -0.40}};

// Per-sample, per-channel style jitter inside every domain. This intra-domain
// spread ends up in the style clusters' covariances, so sampled training
// styles rehearse the same gain/bias subspace the domain shifts act in.
inline double env_or(const char* name, double def) {
  const char* v = std::getenv(name);
  return v != nullptr ? std::atof(v) : def;
}
static const double kJitterLogGain = env_or("TUNE_JITTER", 0.20);
static const double kJitterBias = env_or("TUNE_JITTER", 0.20);
static const double kPixelNoise = env_or("TUNE_PIXNOISE", 0.03);

FeatureMap render_sample(int cls, int height, int width, RngState& rng) {
  Jitter j;
  j.off_h = static_cast<int>(rng.bounded(6));
  j.off_w = static_cast<int>(rng.bounded(6));
  j.radius_scale = rng.uniform(0.85, 1.15);
  j.amplitude = rng.uniform(0.7, 1.1);
  j.angle = rng.uniform(-0.35, 0.35);
  for (int c = 0; c < kDatagenChannels; ++c) {
    j.gain[c] = std::exp(kJitterLogGain * rng.normal());
    j.bias[c] = kJitterBias * rng.normal();
  }

  FeatureMap map(kDatagenChannels, height, width);
  for (int h = 0; h < height; ++h) {
    for (int w = 0; w < width; ++w) {
      const double pat = pattern_value(cls, h, w, height, width, j) * j.amplitude;
      for (int c = 0; c < kDatagenChannels; ++c) {
        map.at(c, h, w) =
            j.gain[c] * (kClassBase[cls][c] + kClassAmp[cls][c] * pat) + j.bias[c] +
            kPixelNoise * rng.normal();
      }
    }
  }
  return map;
}

void rotate_pair(double& a, double& b, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const double na = c * a - s * b;
  const double nb = s * a + c * b;
  a = na;
  b = nb;
}

void apply_domain_transform(FeatureMap& map, const DomainSpec& spec, RngState& rng) {
  for (int h = 0; h < map.height; ++h) {
    for (int w = 0; w < map.width; ++w) {
      double v0 = map.at(0, h, w);
      double v1 = map.at(1, h, w);
      double v2 = map.at(2, h, w);
      if (spec.channel_mix_angle != 0.0) {
        rotate_pair(v0, v1, spec.channel_mix_angle);
        rotate_pair(v1, v2, spec.channel_mix_angle);
      }
      map.at(0, h, w) = spec.channel_gain[0] * v0 + spec.channel_bias[0];
      map.at(1, h, w) = spec.channel_gain[1] * v1 + spec.channel_bias[1];
      map.at(2, h, w) = spec.channel_gain[2] * v2 + spec.channel_bias[2];
    }
  }
  if (spec.noise_sigma > 0.0) {
    for (double& v : map.values) v += spec.noise_sigma * rng.normal();
  }
}

}  // namespace

DomainSpec DomainSpec::identity(int domain_id, int channels) {
  DomainSpec spec;
  spec.domain_id = domain_id;
  spec.channel_gain.assign(static_cast<std::size_t>(channels), 1.0);
  spec.channel_bias.assign(static_cast<std::size_t>(channels), 0.0);
  return spec;
}

void DomainSpec::validate(int channels) const {
  if (static_cast<int>(channel_gain.size()) != channels ||
      static_cast<int>(channel_bias.size()) != channels)
    throw ShapeError("domain spec channel count mismatch");
  for (double g : channel_gain)
    if (!(g > 0.0)) throw ConfigError("channel gains must be positive");
  if (noise_sigma < 0.0) throw ConfigError("noise sigma must be nonnegative");
  if (shift_level < 0.0) throw ConfigError("shift level must be nonnegative");
}

bool DomainSpec::is_identity() const {
  for (double g : channel_gain)
    if (g != 1.0) return false;
  for (double b : channel_bias)
    if (b != 0.0) return false;
  return channel_mix_angle == 0.0 && noise_sigma == 0.0;
}

std::vector<const LabeledSample*> SyntheticDataset::domain_samples(int domain_id) const {
  std::vector<const LabeledSample*> out;
  for (const auto& s : samples)
    if (s.domain_id == domain_id) out.push_back(&s);
  return out;
}

std::vector<LabeledSample> SyntheticDataset::filter(bool keep_domain, int domain_id) const {
  std::vector<LabeledSample> out;
  for (const auto& s : samples)
    if ((s.domain_id == domain_id) == keep_domain) out.push_back(s);
  return out;
}

SyntheticDataset generate_dataset(std::span<const DomainSpec> domains, int n_classes,
                                  int per_class_per_domain, std::uint64_t seed, int height,
                                  int width) {
  if (n_classes < 2) throw ConfigError("need at least two classes");
  if (n_classes > kMaxClassTemplates)
    throw ConfigError("n_classes exceeds the available pattern templates (8)");
  if (per_class_per_domain < 1) throw ConfigError("per_class_per_domain must be >= 1");
  if (domains.empty()) throw ConfigError("need at least one domain");
  if (height < 8 || width < 8) throw ConfigError("image size must be at least 8x8");
  for (const auto& d : domains) d.validate(kDatagenChannels);

  SyntheticDataset dataset;
  dataset.n_classes = n_classes;
  dataset.seed = seed;
  dataset.height = height;
  dataset.width = width;

  for (const auto& spec : domains) {
    const std::uint64_t domain_seed = derive_seed(seed, 0x100 + static_cast<std::uint64_t>(spec.domain_id));
    for (int cls = 0; cls < n_classes; ++cls) {
      for (int i = 0; i < per_class_per_domain; ++i) {
        RngState rng(derive_seed(domain_seed,
                                 static_cast<std::uint64_t>(cls) * 1000003ULL +
                                     static_cast<std::uint64_t>(i)));
        LabeledSample sample;
        sample.class_label = cls;
        sample.domain_id = spec.domain_id;
        sample.input = render_sample(cls, height, width, rng);
        apply_domain_transform(sample.input, spec, rng);
        dataset.samples.push_back(std::move(sample));
      }
    }
    dataset.domain_ids.push_back(spec.domain_id);
  }
  std::sort(dataset.domain_ids.begin(), dataset.domain_ids.end());
  dataset.domain_ids.erase(std::unique(dataset.domain_ids.begin(), dataset.domain_ids.end()),
                           dataset.domain_ids.end());
  return dataset;
}

std::vector<DomainSpec> make_domain_family(int n_domains, std::span<const double> shift_levels,
                                           std::uint64_t seed) {
  if (n_domains < 1) throw ConfigError("need at least one domain");
  if (static_cast<int>(shift_levels.size()) != n_domains)
    throw ConfigError("shift_levels length must equal n_domains");
  for (double s : shift_levels)
    if (s < 0.0) throw ConfigError("shift levels must be nonnegative");

  // Each domain gets its own seed-derived direction with comparable norm;
  // its magnitude is the shift level. Distances from the level-0 domain are
  // then governed by the magnitude, so the style gap grows with the level,
  // while held-out directions stay novel to models trained on the rest.
  RngState rng(derive_seed(seed, 0xfa317));
  std::vector<DomainSpec> family;
  family.reserve(static_cast<std::size_t>(n_domains));
  for (int k = 0; k < n_domains; ++k) {
    const double level = shift_levels[static_cast<std::size_t>(k)];
    DomainSpec spec = DomainSpec::identity(k);
    spec.shift_level = level;
    for (int c = 0; c < kDatagenChannels; ++c) {
      const double gsign = rng.uniform01() < 0.5 ? -1.0 : 1.0;
      const double gdir = gsign * rng.uniform(0.6, 1.0);
      const double bsign = rng.uniform01() < 0.5 ? -1.0 : 1.0;
      const double bdir = bsign * rng.uniform(0.6, 1.0);
      spec.channel_gain[static_cast<std::size_t>(c)] = std::exp(kGainPerLevel * level * gdir);
      spec.channel_bias[static_cast<std::size_t>(c)] = kBiasPerLevel * level * bdir;
    }
    const double angle_sign = rng.uniform01() < 0.5 ? -1.0 : 1.0;
    spec.channel_mix_angle = angle_sign * kAnglePerLevel * level * rng.uniform(0.6, 1.0);
    spec.noise_sigma = kNoisePerLevel * level;
    family.push_back(std::move(spec));
  }
  return family;
}

DomainSpec compose_domains(const DomainSpec& base, const DomainSpec& shift) {
  base.validate(kDatagenChannels);
  shift.validate(kDatagenChannels);
  DomainSpec out = shift;
  for (int c = 0; c < kDatagenChannels; ++c) {
    out.channel_gain[static_cast<std::size_t>(c)] *= base.channel_gain[static_cast<std::size_t>(c)];
    out.channel_bias[static_cast<std::size_t>(c)] += base.channel_bias[static_cast<std::size_t>(c)];
  }
  out.channel_mix_angle += base.channel_mix_angle;
  out.noise_sigma = std::hypot(base.noise_sigma, shift.noise_sigma);
  return out;
}

}  // namespace conststyle
