#include "conststyle/style_clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "conststyle/rng.hpp"
#include "conststyle/util.hpp"

namespace conststyle {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

// Frozen evaluation view of one mixture component.
struct ComponentPdf {
  Vec mean;
  Matrix chol;
  double log_det = 0.0;

  static ComponentPdf from(const GaussianStyle& g) {
    ComponentPdf p;
    p.mean = g.mean;
    p.chol = cholesky_psd(g.covariance);
    for (int i = 0; i < p.chol.rows(); ++i) p.log_det += 2.0 * std::log(p.chol(i, i));
    return p;
  }

  double log_pdf(const Vec& x) const {
    Vec diff(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) diff[i] = x[i] - mean[i];
    const Vec y = solve_lower(chol, diff);
    double maha = 0.0;
    for (double v : y) maha += v * v;
    return -0.5 * (static_cast<double>(x.size()) * kLog2Pi + log_det + maha);
  }
};

double log_sum_exp(const Vec& v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

// k-means++-style seeding: first center uniform, the rest proportional to
// the squared distance to the nearest chosen center.
std::vector<std::size_t> seed_centers(const std::vector<Vec>& points, int k, RngState& rng) {
  const std::size_t n = points.size();
  std::vector<std::size_t> centers;
  centers.push_back(static_cast<std::size_t>(rng.bounded(n)));
  Vec dist2(n, 0.0);
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t center : centers) {
        double d = 0.0;
        for (std::size_t j = 0; j < points[i].size(); ++j) {
          const double diff = points[i][j] - points[center][j];
          d += diff * diff;
        }
        best = std::min(best, d);
      }
      dist2[i] = best;
      total += best;
    }
    if (total <= 0.0) {
      centers.push_back(static_cast<std::size_t>(rng.bounded(n)));
      continue;
    }
    double target = rng.uniform01() * total;
    std::size_t pick = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
      target -= dist2[i];
      if (target <= 0.0) {
        pick = i;
        break;
      }
    }
    centers.push_back(pick);
  }
  return centers;
}

GaussianStyle weighted_component(const std::vector<Vec>& points, const Vec& resp, double mass,
                                 double covariance_floor) {
  const int d = static_cast<int>(points.front().size());
  GaussianStyle g;
  g.mean.assign(static_cast<std::size_t>(d), 0.0);
  for (std::size_t i = 0; i < points.size(); ++i)
    for (int j = 0; j < d; ++j)
      g.mean[static_cast<std::size_t>(j)] += resp[i] * points[i][static_cast<std::size_t>(j)];
  for (double& v : g.mean) v /= mass;

  g.covariance = SymMatrix(d);
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (int a = 0; a < d; ++a) {
      const double da = points[i][static_cast<std::size_t>(a)] - g.mean[static_cast<std::size_t>(a)];
      for (int b = a; b < d; ++b) {
        const double db = points[i][static_cast<std::size_t>(b)] - g.mean[static_cast<std::size_t>(b)];
        g.covariance(a, b) += resp[i] * da * db;
      }
    }
  }
  for (int a = 0; a < d; ++a)
    for (int b = a; b < d; ++b) {
      g.covariance(a, b) /= mass;
      g.covariance(b, a) = g.covariance(a, b);
    }
  g.covariance = regularize_psd(g.covariance, covariance_floor);
  return g;
}

bool all_points_identical(const std::vector<Vec>& points) {
  for (std::size_t i = 1; i < points.size(); ++i)
    if (points[i] != points.front()) return false;
  return true;
}

bool has_duplicate_components(const StyleClusterModel& model) {
  for (std::size_t a = 0; a < model.components.size(); ++a) {
    for (std::size_t b = a + 1; b < model.components.size(); ++b) {
      double mean_gap = 0.0;
      for (std::size_t j = 0; j < model.components[a].mean.size(); ++j) {
        const double d = model.components[a].mean[j] - model.components[b].mean[j];
        mean_gap += d * d;
      }
      const double cov_gap =
          frobenius_distance(model.components[a].covariance, model.components[b].covariance);
      const double scale = 1.0 + frobenius_norm(model.components[a].covariance);
      if (std::sqrt(mean_gap) < 1e-9 * scale && cov_gap < 1e-9 * scale) return true;
    }
  }
  return false;
}

}  // namespace

void ClusterConfig::validate() const {
  if (n_clusters < 1) throw ConfigError("n_clusters must be >= 1");
  if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
  if (!(log_likelihood_tol > 0.0)) throw ConfigError("log_likelihood_tol must be positive");
  if (!(covariance_floor > 0.0)) throw ConfigError("covariance_floor must be positive");
  if (!(dirichlet_concentration >= 1.0))
    throw ConfigError("dirichlet_concentration must be >= 1");
}

StyleClusterModel fit_style_gmm(std::span<const InstanceStyle> styles, const ClusterConfig& config) {
  config.validate();
  const std::size_t n = styles.size();
  const std::size_t k = static_cast<std::size_t>(config.n_clusters);
  if (n < k) throw InsufficientDataError("fewer style points than clusters");
  const int c = styles.front().channels();
  const int d = 2 * c;

  std::vector<Vec> points;
  points.reserve(n);
  for (const auto& s : styles) {
    if (s.channels() != c) throw ShapeError("instance styles have mixed channel counts");
    points.push_back(s.epsilon());
  }

  StyleClusterModel model;

  if (all_points_identical(points)) {
    // Zero-spread data: every component sits on the single point with the
    // floor covariance; duplicates are expected and flagged.
    GaussianStyle g;
    g.mean = points.front();
    g.covariance = regularize_psd(SymMatrix(d), config.covariance_floor);
    model.components.assign(k, g);
    model.weights.assign(k, 1.0 / static_cast<double>(k));
    model.degenerate = true;
    model.iterations_run = 0;
    const ComponentPdf pdf = ComponentPdf::from(g);
    double ll = 0.0;
    for (const auto& p : points) ll += pdf.log_pdf(p);
    model.final_log_likelihood = ll;
    model.log_likelihood_path = {ll};
    return model;
  }

  // Initialization: k-means++ means, shared global covariance, uniform weights.
  RngState rng(config.seed);
  const auto centers = seed_centers(points, config.n_clusters, rng);
  {
    Vec unit(n, 1.0);
    const GaussianStyle global = weighted_component(points, unit, static_cast<double>(n),
                                                    config.covariance_floor);
    model.weights.assign(k, 1.0 / static_cast<double>(k));
    model.components.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
      model.components[j].mean = points[centers[j]];
      model.components[j].covariance = global.covariance;
    }
  }

  std::vector<Vec> resp(k, Vec(n, 0.0));
  Vec point_log_density(n, 0.0);
  double prev_ll = -std::numeric_limits<double>::infinity();

  for (int iter = 0; iter < config.max_iterations; ++iter) {
    // E-step (per-point work is independent; reduction below stays serial
    // and in index order, so results are bit-identical to the serial path).
    std::vector<ComponentPdf> pdfs;
    pdfs.reserve(k);
    for (std::size_t j = 0; j < k; ++j) pdfs.push_back(ComponentPdf::from(model.components[j]));
    Vec log_weights(k);
    for (std::size_t j = 0; j < k; ++j) log_weights[j] = std::log(model.weights[j]);

    parallel_for(n, [&](std::size_t i) {
      Vec lp(k);
      for (std::size_t j = 0; j < k; ++j) lp[j] = log_weights[j] + pdfs[j].log_pdf(points[i]);
      const double lse = log_sum_exp(lp);
      point_log_density[i] = lse;
      for (std::size_t j = 0; j < k; ++j) resp[j][i] = std::exp(lp[j] - lse);
    });

    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) ll += point_log_density[i];
    model.log_likelihood_path.push_back(ll);
    model.iterations_run = iter + 1;

    const bool converged = std::isfinite(prev_ll) && (ll - prev_ll) < config.log_likelihood_tol;
    prev_ll = ll;

    // M-step.
    const double prior = config.dirichlet_concentration - 1.0;
    for (std::size_t j = 0; j < k; ++j) {
      double mass = 0.0;
      for (std::size_t i = 0; i < n; ++i) mass += resp[j][i];
      if (mass < 1e-10) {
        // Collapsed component: re-seed on the point the mixture explains worst.
        std::size_t worst = 0;
        for (std::size_t i = 1; i < n; ++i)
          if (point_log_density[i] < point_log_density[worst]) worst = i;
        model.components[j].mean = points[worst];
        Vec unit(n, 1.0);
        model.components[j].covariance =
            weighted_component(points, unit, static_cast<double>(n), config.covariance_floor)
                .covariance;
        model.weights[j] = 1.0 / static_cast<double>(n);
        continue;
      }
      model.components[j] = weighted_component(points, resp[j], mass, config.covariance_floor);
      model.weights[j] = (mass + prior) / (static_cast<double>(n) + static_cast<double>(k) * prior);
    }
    double weight_sum = 0.0;
    for (double w : model.weights) weight_sum += w;
    for (double& w : model.weights) w /= weight_sum;

    if (converged) break;
  }

  model.final_log_likelihood = model.log_likelihood_path.back();
  model.degenerate = has_duplicate_components(model);
  return model;
}

std::pair<int, Vec> predict_cluster(const StyleClusterModel& model, const InstanceStyle& style) {
  if (model.components.empty()) throw StateError("cluster model has no components");
  const Vec x = style.epsilon();
  if (x.size() != model.components.front().mean.size())
    throw ShapeError("style dimension does not match the cluster model");

  const std::size_t k = model.components.size();
  Vec lp(k);
  for (std::size_t j = 0; j < k; ++j)
    lp[j] = std::log(model.weights[j]) + ComponentPdf::from(model.components[j]).log_pdf(x);
  const double lse = log_sum_exp(lp);
  Vec post(k);
  int best = 0;
  for (std::size_t j = 0; j < k; ++j) {
    post[j] = std::exp(lp[j] - lse);
    if (post[j] > post[static_cast<std::size_t>(best)]) best = static_cast<int>(j);
  }
  return {best, post};
}

}  // namespace conststyle
