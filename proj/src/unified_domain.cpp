#include "conststyle/unified_domain.hpp"

#include <algorithm>
#include <cmath>

namespace conststyle {

namespace {

void check_components(std::span<const GaussianStyle> components) {
  if (components.empty()) throw EmptyDomainError("no components to aggregate");
  const int d = components.front().dim();
  for (const auto& g : components) {
    if (g.dim() != d || g.covariance.dim() != d)
      throw ShapeError("component dimensions differ");
    g.validate();  // throws NotPsdError on significantly indefinite covariances
  }
}

// Elementwise mean with ascending-order accumulation: exactly invariant
// under permutation of the component list.
Vec mean_of_vectors(std::span<const GaussianStyle> components) {
  const int d = components.front().dim();
  Vec out(static_cast<std::size_t>(d));
  Vec terms(components.size());
  for (int i = 0; i < d; ++i) {
    for (std::size_t k = 0; k < components.size(); ++k)
      terms[k] = components[k].mean[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(i)] = sorted_sum(terms) / static_cast<double>(components.size());
  }
  return out;
}

SymMatrix mean_of_matrices(std::span<const SymMatrix> mats) {
  const int d = mats.front().dim();
  SymMatrix out(d);
  Vec terms(mats.size());
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      for (std::size_t k = 0; k < mats.size(); ++k) terms[k] = mats[k](i, j);
      const double v = sorted_sum(terms) / static_cast<double>(mats.size());
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return out;
}

SymMatrix barycenter_update(const SymMatrix& current, std::span<const GaussianStyle> components) {
  const SymMatrix root = sqrt_psd(current);
  std::vector<SymMatrix> terms;
  terms.reserve(components.size());
  for (const auto& g : components) terms.push_back(sqrt_psd(sym_sandwich(root, g.covariance)));
  return mean_of_matrices(terms);
}

}  // namespace

std::string to_string(UnifiedMethod method) {
  return method == UnifiedMethod::average ? "average" : "barycenter";
}

UnifiedMethod unified_method_from_string(const std::string& name) {
  if (name == "average") return UnifiedMethod::average;
  if (name == "barycenter") return UnifiedMethod::barycenter;
  throw ConfigError("unknown unified-domain method: " + name);
}

UnifiedDomain barycenter_gaussian(std::span<const GaussianStyle> components, double tol,
                                  int max_iter) {
  if (!(tol > 0.0)) throw ConfigError("barycenter tolerance must be positive");
  if (max_iter < 1) throw ConfigError("barycenter max_iter must be >= 1");
  check_components(components);

  UnifiedDomain out;
  out.method = UnifiedMethod::barycenter;
  out.style.mean = mean_of_vectors(components);

  std::vector<SymMatrix> covs;
  covs.reserve(components.size());
  for (const auto& g : components) covs.push_back(g.covariance);
  SymMatrix current = mean_of_matrices(covs);

  out.converged = false;
  for (int iter = 0; iter < max_iter; ++iter) {
    const SymMatrix next = barycenter_update(current, components);
    const double diff = frobenius_distance(next, current);
    current = next;
    out.iterations = iter + 1;
    if (diff < tol) {
      out.converged = true;
      break;
    }
  }
  out.style.covariance = current;
  out.residual = frobenius_distance(barycenter_update(current, components), current);
  return out;
}

UnifiedDomain average_clusters(std::span<const GaussianStyle> components) {
  check_components(components);
  UnifiedDomain out;
  out.method = UnifiedMethod::average;
  out.style.mean = mean_of_vectors(components);
  std::vector<SymMatrix> covs;
  covs.reserve(components.size());
  for (const auto& g : components) covs.push_back(g.covariance);
  out.style.covariance = mean_of_matrices(covs);
  out.iterations = 0;
  out.residual = 0.0;
  out.converged = true;
  return out;
}

UnifiedDomain determine_unified_domain(std::span<const InstanceStyle> styles,
                                       const ClusterConfig& cluster_config, UnifiedMethod method) {
  const StyleClusterModel model = fit_style_gmm(styles, cluster_config);
  if (method == UnifiedMethod::average) return average_clusters(model.components);
  return barycenter_gaussian(model.components);
}

std::pair<Vec, Vec> StyleSampler::draw(RngState& rng) const {
  const int d = dim();
  Vec g(static_cast<std::size_t>(d));
  for (double& v : g) v = rng.normal();

  const int c = channels();
  Vec mu(static_cast<std::size_t>(c));
  Vec sigma(static_cast<std::size_t>(c));
  for (int i = 0; i < d; ++i) {
    double v = mean[static_cast<std::size_t>(i)];
    for (int j = 0; j < d; ++j) v += factor(i, j) * g[static_cast<std::size_t>(j)];
    if (i < c) {
      mu[static_cast<std::size_t>(i)] = v;
    } else {
      sigma[static_cast<std::size_t>(i - c)] = std::max(v, sigma_floor);
    }
  }
  return {mu, sigma};
}

StyleSampler make_style_sampler(const UnifiedDomain& domain, double sigma_floor) {
  if (!(sigma_floor > 0.0)) throw ConfigError("sigma_floor must be positive");
  const int d = domain.style.dim();
  if (d == 0 || d % 2 != 0) throw ShapeError("unified style dimension must be a positive even 2C");
  domain.style.validate();

  StyleSampler sampler;
  sampler.mean = domain.style.mean;
  sampler.sigma_floor = sigma_floor;

  const SymMatrix& cov = domain.style.covariance;
  if (frobenius_norm(cov) == 0.0) {
    // Degenerate Gaussian: every draw is exactly the mean.
    sampler.factor = Matrix(d, d);
    return sampler;
  }
  const double scale = frobenius_norm(cov);
  if (min_eigenvalue(cov) > 1e-12 * scale) {
    sampler.factor = cholesky_psd(cov);
  } else {
    sampler.factor = cholesky_psd(regularize_psd(cov, 1e-12 * scale));
  }
  return sampler;
}

std::pair<Vec, Vec> sample_style(const UnifiedDomain& domain, RngState& rng, double sigma_floor) {
  return make_style_sampler(domain, sigma_floor).draw(rng);
}

}  // namespace conststyle
