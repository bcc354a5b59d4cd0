#include "conststyle/style_stats.hpp"

#include <cmath>

namespace conststyle {

void FeatureMap::validate() const {
  if (channels < 1 || height < 1 || width < 1)
    throw ShapeError("feature map dimensions must be >= 1");
  if (values.size() != static_cast<std::size_t>(channels) * height * width)
    throw ShapeError("feature map storage does not match its dimensions");
  for (double v : values)
    if (!std::isfinite(v)) throw InvariantError("feature map has non-finite values");
}

Vec InstanceStyle::epsilon() const {
  Vec e;
  e.reserve(mu.size() + sigma.size());
  e.insert(e.end(), mu.begin(), mu.end());
  e.insert(e.end(), sigma.begin(), sigma.end());
  return e;
}

void GaussianStyle::validate() const {
  if (covariance.dim() != dim()) throw ShapeError("mean/covariance dimension mismatch");
  for (double v : mean)
    if (!std::isfinite(v)) throw InvariantError("style mean has non-finite values");
  covariance.check_finite();
  covariance.check_symmetric();
  const double scale = std::max(1.0, frobenius_norm(covariance));
  if (min_eigenvalue(covariance) < -1e-8 * scale)
    throw NotPsdError("style covariance is significantly indefinite");
}

InstanceStyle compute_instance_style(const FeatureMap& z) {
  z.validate();
  const int n = z.spatial_size();
  InstanceStyle style;
  style.mu.resize(static_cast<std::size_t>(z.channels));
  style.sigma.resize(static_cast<std::size_t>(z.channels));
  for (int c = 0; c < z.channels; ++c) {
    const auto ch = z.channel(c);
    double sum = 0.0;
    for (double v : ch) sum += v;
    const double mean = sum / n;
    double sq = 0.0;
    for (double v : ch) sq += (v - mean) * (v - mean);
    style.mu[static_cast<std::size_t>(c)] = mean;
    style.sigma[static_cast<std::size_t>(c)] = std::sqrt(sq / n);
  }
  return style;
}

GaussianStyle estimate_domain_style(std::span<const InstanceStyle> styles) {
  if (styles.empty()) throw EmptyDomainError("no instance styles to estimate a domain from");
  const int c = styles.front().channels();
  const int d = 2 * c;
  for (const auto& s : styles)
    if (s.channels() != c || static_cast<int>(s.sigma.size()) != c)
      throw ShapeError("instance styles have mixed channel counts");

  const double n = static_cast<double>(styles.size());
  GaussianStyle out;
  out.mean.assign(static_cast<std::size_t>(d), 0.0);
  for (const auto& s : styles) {
    const Vec eps = s.epsilon();
    for (int i = 0; i < d; ++i) out.mean[static_cast<std::size_t>(i)] += eps[static_cast<std::size_t>(i)];
  }
  for (double& v : out.mean) v /= n;

  out.covariance = SymMatrix(d);
  for (const auto& s : styles) {
    const Vec eps = s.epsilon();
    for (int i = 0; i < d; ++i) {
      const double di = eps[static_cast<std::size_t>(i)] - out.mean[static_cast<std::size_t>(i)];
      for (int j = i; j < d; ++j) {
        const double dj = eps[static_cast<std::size_t>(j)] - out.mean[static_cast<std::size_t>(j)];
        out.covariance(i, j) += di * dj;
      }
    }
  }
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      out.covariance(i, j) /= n;
      out.covariance(j, i) = out.covariance(i, j);
    }
  return out;
}

double frechet_distance(const GaussianStyle& a, const GaussianStyle& b) {
  if (a.dim() != b.dim()) throw ShapeError("Gaussian dimensions differ");
  if (a.covariance.dim() != a.dim() || b.covariance.dim() != b.dim())
    throw ShapeError("mean/covariance dimension mismatch");

  double mean_sq = 0.0;
  for (int i = 0; i < a.dim(); ++i) {
    const double d = a.mean[static_cast<std::size_t>(i)] - b.mean[static_cast<std::size_t>(i)];
    mean_sq += d * d;
  }

  const SymMatrix root_b = sqrt_psd(b.covariance, 0.0);
  const SymMatrix inner = sym_sandwich(root_b, a.covariance);
  const SymMatrix cross = sqrt_psd(inner, 0.0);

  double d2 = mean_sq + a.covariance.trace() + b.covariance.trace() - 2.0 * cross.trace();
  if (d2 < 0.0) d2 = 0.0;  // roundoff residue
  return std::sqrt(d2);
}

std::pair<double, double> domain_gap_terms(const GaussianStyle& unified,
                                           std::span<const InstanceStyle> styles) {
  if (styles.empty()) throw EmptyDomainError("no instance styles for domain gap terms");
  const int c = styles.front().channels();
  if (unified.dim() != 2 * c)
    throw ShapeError("unified style dimension does not split into (mu, sigma) of the styles' C");

  double d_mu = 0.0;
  double d_sigma = 0.0;
  for (const auto& s : styles) {
    if (s.channels() != c) throw ShapeError("instance styles have mixed channel counts");
    double mu_sq = 0.0;
    double sigma_sq = 0.0;
    for (int i = 0; i < c; ++i) {
      const double dm = unified.mean[static_cast<std::size_t>(i)] - s.mu[static_cast<std::size_t>(i)];
      const double ds = unified.mean[static_cast<std::size_t>(c + i)] - s.sigma[static_cast<std::size_t>(i)];
      mu_sq += dm * dm;
      sigma_sq += ds * ds;
    }
    d_mu += std::sqrt(mu_sq);
    d_sigma += std::sqrt(sigma_sq);
  }
  const double n = static_cast<double>(styles.size());
  return {d_mu / n, d_sigma / n};
}

}  // namespace conststyle
