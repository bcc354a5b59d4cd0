#include "conststyle/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "conststyle/style_align.hpp"
#include "conststyle/util.hpp"

namespace conststyle {

namespace {

// Independent RNG streams derived from the run seed. erm and conststyle runs
// consume identical draws from every stream except the style stream, so
// paired runs differ only through the alignment path.
constexpr std::uint64_t kInitStream = 0x11;
constexpr std::uint64_t kShuffleStream = 0x22;
constexpr std::uint64_t kStyleStream = 0x33;
constexpr std::uint64_t kClusterStream = 0x44;

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (initial_epochs < 1 || initial_epochs > epochs)
    throw ConfigError("initial_epochs must satisfy 1 <= xi <= epochs");
  if (update_interval < 1) throw ConfigError("update_interval must be >= 1");
  if (mode == TrainMode::conststyle && update_interval > initial_epochs)
    throw ConfigError(
        "conststyle needs a unified domain before aligned epochs start: require gamma <= xi");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (momentum < 0.0) throw ConfigError("momentum must be nonnegative");
  if (n_clusters < 1) throw ConfigError("n_clusters must be >= 1");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(sigma_floor > 0.0)) throw ConfigError("sigma_floor must be positive");
}

ClusterConfig TrainConfig::cluster_config(std::uint64_t refresh_stream) const {
  ClusterConfig cfg;
  cfg.n_clusters = n_clusters;
  cfg.max_iterations = cluster_max_iterations;
  cfg.log_likelihood_tol = cluster_tol;
  cfg.covariance_floor = covariance_floor;
  cfg.seed = derive_seed(seed, kClusterStream + refresh_stream);
  return cfg;
}

std::vector<InstanceStyle> harvest_styles(const DeskNet& net,
                                          std::span<const LabeledSample> samples) {
  std::vector<InstanceStyle> styles(samples.size());
  parallel_for(samples.size(), [&](std::size_t i) {
    styles[i] = compute_instance_style(forward_style(net, samples[i].input));
  });
  return styles;
}

TrainResult train(const SyntheticDataset& dataset, const TrainConfig& config) {
  config.validate();
  if (dataset.samples.empty()) throw EmptyDomainError("dataset has no samples");

  std::vector<LabeledSample> train_samples;
  for (const auto& s : dataset.samples)
    if (config.holdout_domain < 0 || s.domain_id != config.holdout_domain)
      train_samples.push_back(s);
  if (train_samples.empty()) throw ConfigError("holdout leaves no training samples");

  RngState rng_init(derive_seed(config.seed, kInitStream));
  RngState rng_shuffle(derive_seed(config.seed, kShuffleStream));
  RngState rng_style(derive_seed(config.seed, kStyleStream));

  TrainResult result{DeskNet::random_init(dataset.n_classes, rng_init), std::nullopt, {}, {}};
  OptimState optim{config.learning_rate, config.momentum, {}};

  const std::size_t n = train_samples.size();
  const std::size_t bs = static_cast<std::size_t>(config.batch_size);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    const bool aligned_phase = config.mode == TrainMode::conststyle && epoch > config.initial_epochs;

    rng_shuffle.shuffle(train_samples);

    double loss_sum = 0.0;
    int correct = 0;
    for (std::size_t lo = 0; lo < n; lo += bs) {
      const std::size_t hi = std::min(n, lo + bs);
      const std::span<const LabeledSample> batch(train_samples.data() + lo, hi - lo);
      const BatchGrad bg =
          loss_and_grad(result.net, batch, aligned_phase ? &*result.unified : nullptr, rng_style,
                        aligned_phase ? TrainMode::conststyle : TrainMode::erm, config.sigma_floor);
      sgd_step(result.net, bg.grad, optim);
      loss_sum += bg.loss * static_cast<double>(batch.size());
      correct += bg.correct;
    }

    if (epoch == config.initial_epochs) result.initial_style_params = result.net.style_params();

    EpochLog log;
    log.epoch = epoch;
    log.phase = aligned_phase ? "conststyle" : "erm";
    log.loss = loss_sum / static_cast<double>(n);
    log.train_accuracy = static_cast<double>(correct) / static_cast<double>(n);

    // Unified-domain refresh: a separate post-epoch harvesting pass with the
    // current style stage, no alignment applied while collecting.
    if (config.mode == TrainMode::conststyle && epoch % config.update_interval == 0) {
      const auto styles = harvest_styles(result.net, train_samples);
      result.unified = determine_unified_domain(
          styles, config.cluster_config(static_cast<std::uint64_t>(epoch)), config.unified_method);
      log.refreshed = true;
      log.barycenter_residual = result.unified->residual;
      result.report.refreshes.push_back({epoch, result.unified->method, result.unified->residual});
    }

    log.seconds = elapsed_seconds(start);
    result.report.epochs.push_back(std::move(log));
  }
  return result;
}

std::vector<int> infer(const DeskNet& net, const UnifiedDomain* unified,
                       std::span<const LabeledSample> samples, double alpha, double sigma_floor) {
  AlignmentParams params{alpha, sigma_floor};
  params.validate();
  const bool plain = alpha == 1.0;  // original state: skip the transform entirely
  if (!plain && unified == nullptr)
    throw StateError("partial alignment requires a unified domain");
  if (!plain && unified->style.dim() != 2 * kStyleChannels)
    throw ShapeError("unified domain dimension does not match the style stage");

  std::vector<int> labels(samples.size());
  parallel_for(samples.size(), [&](std::size_t i) {
    const FeatureMap z = forward_style(net, samples[i].input);
    const Vec logits = plain
                           ? forward_head(net, z)
                           : forward_head(net, partial_align(z, unified->style.mean, params));
    labels[i] = argmax_index(softmax(logits));
  });
  return labels;
}

EvalReport evaluate(const DeskNet& net, const UnifiedDomain* unified,
                    std::span<const LabeledSample> samples, double alpha, double sigma_floor) {
  if (samples.empty()) throw EmptyDomainError("no samples to evaluate");
  EvalReport report;
  report.alpha = alpha;
  report.total = static_cast<int>(samples.size());
  report.confusion.assign(static_cast<std::size_t>(net.n_classes()),
                          std::vector<int>(static_cast<std::size_t>(net.n_classes()), 0));

  const std::vector<int> predictions = infer(net, unified, samples, alpha, sigma_floor);

  std::vector<int> domain_order;
  for (const auto& s : samples) domain_order.push_back(s.domain_id);
  std::sort(domain_order.begin(), domain_order.end());
  domain_order.erase(std::unique(domain_order.begin(), domain_order.end()), domain_order.end());

  for (int domain : domain_order) {
    DomainEval de;
    de.domain_id = domain;
    std::vector<InstanceStyle> styles;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (samples[i].domain_id != domain) continue;
      ++de.n;
      const bool ok = predictions[i] == samples[i].class_label;
      de.correct += ok ? 1 : 0;
      report.confusion[static_cast<std::size_t>(samples[i].class_label)]
                      [static_cast<std::size_t>(predictions[i])] += 1;
      styles.push_back(compute_instance_style(forward_style(net, samples[i].input)));
    }
    de.accuracy = static_cast<double>(de.correct) / de.n;
    de.frechet_to_unified =
        unified ? frechet_distance(estimate_domain_style(styles), unified->style)
                : std::numeric_limits<double>::quiet_NaN();
    report.correct += de.correct;
    report.domains.push_back(std::move(de));
  }
  report.overall_accuracy = static_cast<double>(report.correct) / report.total;
  return report;
}

LooResult run_leave_one_out(const SyntheticDataset& dataset, const TrainConfig& config) {
  if (dataset.domain_ids.size() < 2)
    throw ConfigError("leave-one-domain-out needs at least two domains");

  LooResult result;
  for (int held_out : dataset.domain_ids) {
    TrainConfig fold_config = config;
    fold_config.holdout_domain = held_out;
    const TrainResult trained = train(dataset, fold_config);

    const std::vector<LabeledSample> unseen = dataset.filter(true, held_out);
    const UnifiedDomain* unified = trained.unified ? &*trained.unified : nullptr;
    const double alpha = config.mode == TrainMode::erm ? 1.0 : config.alpha;
    EvalReport report = evaluate(trained.net, unified, unseen, alpha, config.sigma_floor);
    report.held_out_domain = held_out;
    result.mean_unseen_accuracy += report.overall_accuracy;
    result.folds.push_back(std::move(report));
  }
  result.mean_unseen_accuracy /= static_cast<double>(result.folds.size());
  return result;
}

std::vector<DistanceRow> distance_sweep(const DomainSpec& base, std::span<const double> shift_levels,
                                        const TrainConfig& config, int n_classes,
                                        int per_cell_train, int per_cell_eval) {
  if (shift_levels.size() < 3) throw ConfigError("distance sweep needs at least 3 shift levels");
  config.validate();

  const auto family = make_domain_family(static_cast<int>(shift_levels.size()), shift_levels,
                                         derive_seed(config.seed, 0x71));
  std::vector<DomainSpec> composed;
  composed.reserve(family.size());
  for (const auto& f : family) composed.push_back(compose_domains(base, f));

  const SyntheticDataset train_ds =
      generate_dataset(std::span(composed.data(), 1), n_classes, per_cell_train,
                       derive_seed(config.seed, 0x72));
  const SyntheticDataset eval_ds =
      generate_dataset(composed, n_classes, per_cell_eval, derive_seed(config.seed, 0x73));

  TrainConfig cs_config = config;
  cs_config.mode = TrainMode::conststyle;
  cs_config.holdout_domain = -1;
  TrainConfig erm_config = cs_config;
  erm_config.mode = TrainMode::erm;

  const TrainResult cs = train(train_ds, cs_config);
  const TrainResult erm = train(train_ds, erm_config);
  if (!cs.unified) throw StateError("conststyle training produced no unified domain");

  std::vector<DistanceRow> rows;
  for (std::size_t k = 0; k < composed.size(); ++k) {
    const std::vector<LabeledSample> level = eval_ds.filter(true, composed[k].domain_id);
    DistanceRow row;
    row.shift_level = composed[k].shift_level;
    const auto styles = harvest_styles(cs.net, level);
    row.frechet_to_unified = frechet_distance(estimate_domain_style(styles), cs.unified->style);
    row.accuracy_erm = evaluate(erm.net, nullptr, level, 1.0).overall_accuracy;
    row.accuracy_conststyle =
        evaluate(cs.net, &*cs.unified, level, config.alpha, config.sigma_floor).overall_accuracy;
    rows.push_back(row);
  }
  std::sort(rows.begin(), rows.end(),
            [](const DistanceRow& a, const DistanceRow& b) { return a.shift_level < b.shift_level; });
  return rows;
}

std::vector<AlphaRow> alpha_sweep(const DeskNet& net, const UnifiedDomain& unified,
                                  std::span<const LabeledSample> samples,
                                  std::span<const double> alphas, double sigma_floor) {
  std::vector<AlphaRow> rows;
  rows.reserve(alphas.size());
  for (double alpha : alphas)
    rows.push_back({alpha, evaluate(net, &unified, samples, alpha, sigma_floor)});
  return rows;
}

std::vector<ClusterRow> cluster_sweep(const SyntheticDataset& dataset, const TrainConfig& config,
                                      std::span<const int> cluster_counts) {
  if (config.holdout_domain < 0)
    throw ConfigError("cluster sweep needs a held-out domain to evaluate on");
  if (cluster_counts.empty()) throw ConfigError("no cluster counts given");

  const std::vector<LabeledSample> unseen = dataset.filter(true, config.holdout_domain);
  if (unseen.empty()) throw ConfigError("held-out domain not present in the dataset");

  std::vector<ClusterRow> rows;
  for (int count : cluster_counts) {
    TrainConfig cfg = config;
    cfg.mode = TrainMode::conststyle;
    cfg.n_clusters = count;
    const TrainResult trained = train(dataset, cfg);
    EvalReport report =
        evaluate(trained.net, &*trained.unified, unseen, config.alpha, config.sigma_floor);
    report.held_out_domain = config.holdout_domain;
    rows.push_back({count, std::move(report)});
  }
  return rows;
}

std::vector<ScaleRow> scalability_sweep(std::span<const int> sizes, const TrainConfig& config,
                                        int n_classes) {
  if (sizes.empty()) throw ConfigError("no dataset sizes given");
  config.validate();

  std::vector<int> sorted(sizes.begin(), sizes.end());
  std::sort(sorted.begin(), sorted.end());

  std::vector<ScaleRow> rows;
  for (int size : sorted) {
    if (size < n_classes) throw ConfigError("dataset size smaller than the class count");
    const int per_cell = size / n_classes;
    const DomainSpec canonical = DomainSpec::identity(0);
    const SyntheticDataset ds = generate_dataset(std::span(&canonical, 1), n_classes, per_cell,
                                                 derive_seed(config.seed, 0x51));
    TrainConfig cfg = config;
    cfg.holdout_domain = -1;
    const TrainResult trained = train(ds, cfg);

    const auto& epochs = trained.report.epochs;
    const std::size_t skip = epochs.size() >= 4 ? 1 : 0;  // first epoch is warmup
    double total = 0.0;
    for (std::size_t i = skip; i < epochs.size(); ++i) total += epochs[i].seconds;
    rows.push_back({per_cell * n_classes,
                    total / static_cast<double>(epochs.size() - skip)});
  }
  return rows;
}

std::vector<BoundRow> bound_diagnostics(
    const UnifiedDomain& unified,
    std::span<const std::pair<int, std::vector<InstanceStyle>>> per_domain_styles) {
  std::vector<BoundRow> rows;
  rows.reserve(per_domain_styles.size());
  for (const auto& [domain_id, styles] : per_domain_styles) {
    BoundRow row;
    row.domain_id = domain_id;
    const auto [d_mu, d_sigma] = domain_gap_terms(unified.style, styles);
    row.d_mu = d_mu;
    row.d_sigma = d_sigma;
    row.frechet_to_unified = frechet_distance(estimate_domain_style(styles), unified.style);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace conststyle
