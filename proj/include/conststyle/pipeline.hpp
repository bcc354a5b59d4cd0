#pragma once

#include <optional>
#include <string>
#include <vector>

#include "conststyle/datagen.hpp"
#include "conststyle/desknet.hpp"
#include "conststyle/style_clustering.hpp"
#include "conststyle/unified_domain.hpp"

namespace conststyle {

struct TrainConfig {
  int epochs = 30;            // E
  int initial_epochs = 5;     // xi: plain (ERM) epochs before aligned training
  int update_interval = 5;    // gamma: unified-domain refresh period
  double learning_rate = 0.05;
  double momentum = 0.0;
  int n_clusters = 4;         // N'
  double alpha = 0.6;         // inference-time partial projection
  int batch_size = 32;
  std::uint64_t seed = 0;
  UnifiedMethod unified_method = UnifiedMethod::average;
  TrainMode mode = TrainMode::conststyle;
  int holdout_domain = -1;    // domain excluded from training (-1 = none)
  double sigma_floor = 1e-5;
  int cluster_max_iterations = 200;
  double cluster_tol = 1e-7;
  double covariance_floor = 1e-6;

  void validate() const;
  ClusterConfig cluster_config(std::uint64_t refresh_stream) const;
};

struct EpochLog {
  int epoch = 0;                   // 1-based
  std::string phase;               // "erm" or "conststyle"
  double loss = 0.0;
  double train_accuracy = 0.0;
  bool refreshed = false;
  double barycenter_residual = 0.0;
  double seconds = 0.0;            // wall clock; not part of the CSV schema
};

struct RefreshLog {
  int epoch = 0;
  UnifiedMethod method = UnifiedMethod::average;
  double residual = 0.0;
};

struct TrainReport {
  std::vector<EpochLog> epochs;
  std::vector<RefreshLog> refreshes;
};

struct TrainResult {
  DeskNet net;
  std::optional<UnifiedDomain> unified;
  TrainReport report;
  Vec initial_style_params;  // conv1 block snapshot at the end of epoch xi
};

// Two-phase training loop: epochs <= xi run plain ERM updates, later epochs
// sample a style per image and align the style stage's output onto it; the
// unified domain is recomputed from freshly harvested style features at
// every update_interval-multiple epoch (a separate post-epoch pass, without
// alignment). mode = erm trains the plain baseline and never harvests.
TrainResult train(const SyntheticDataset& dataset, const TrainConfig& config);

// Per-sample style extraction with the current style stage (plain forward).
std::vector<InstanceStyle> harvest_styles(const DeskNet& net,
                                          std::span<const LabeledSample> samples);

// Deterministic inference. alpha = 1 short-circuits to the plain forward
// pass (predictions bit-identical to no alignment); otherwise each sample's
// style feature is partially aligned with the unified domain's mean style.
std::vector<int> infer(const DeskNet& net, const UnifiedDomain* unified,
                       std::span<const LabeledSample> samples, double alpha,
                       double sigma_floor = 1e-5);

struct DomainEval {
  int domain_id = 0;
  int n = 0;
  int correct = 0;
  double accuracy = 0.0;
  double frechet_to_unified = 0.0;  // NaN when no unified domain is available
};

struct EvalReport {
  std::vector<DomainEval> domains;
  int total = 0;
  int correct = 0;
  double overall_accuracy = 0.0;
  std::vector<std::vector<int>> confusion;  // [true][pred]
  double alpha = 1.0;
  int held_out_domain = -1;
};

EvalReport evaluate(const DeskNet& net, const UnifiedDomain* unified,
                    std::span<const LabeledSample> samples, double alpha,
                    double sigma_floor = 1e-5);

struct LooResult {
  std::vector<EvalReport> folds;  // one per held-out domain, in domain order
  double mean_unseen_accuracy = 0.0;
};

// Leave-one-domain-out protocol: D paired train/eval runs, each holding out
// one domain; the configured mode is trained as-is per fold.
LooResult run_leave_one_out(const SyntheticDataset& dataset, const TrainConfig& config);

struct DistanceRow {
  double shift_level = 0.0;
  double frechet_to_unified = 0.0;  // measured on the ConstStyle model's style features
  double accuracy_erm = 0.0;
  double accuracy_conststyle = 0.0;
};

// Trains paired ERM/ConstStyle models on the base (level-0) domain and
// evaluates both across increasingly shifted unseen domains.
std::vector<DistanceRow> distance_sweep(const DomainSpec& base, std::span<const double> shift_levels,
                                        const TrainConfig& config, int n_classes = 4,
                                        int per_cell_train = 25, int per_cell_eval = 50);

struct AlphaRow {
  double alpha = 0.0;
  EvalReport report;
};

// Re-runs inference per alpha; training artifacts are untouched.
std::vector<AlphaRow> alpha_sweep(const DeskNet& net, const UnifiedDomain& unified,
                                  std::span<const LabeledSample> samples,
                                  std::span<const double> alphas, double sigma_floor = 1e-5);

struct ClusterRow {
  int n_clusters = 0;
  EvalReport report;
};

// Retrains per cluster count and evaluates on the configured held-out domain.
std::vector<ClusterRow> cluster_sweep(const SyntheticDataset& dataset, const TrainConfig& config,
                                      std::span<const int> cluster_counts);

struct ScaleRow {
  int dataset_size = 0;
  double seconds_per_epoch = 0.0;
};

// Wall-clock per-epoch averages over single-domain datasets of the given
// sizes (the first epoch is excluded as warmup when enough epochs ran).
std::vector<ScaleRow> scalability_sweep(std::span<const int> sizes, const TrainConfig& config,
                                        int n_classes = 4);

struct BoundRow {
  int domain_id = 0;
  double d_mu = 0.0;
  double d_sigma = 0.0;
  double frechet_to_unified = 0.0;
};

// Distance factors from the loss-gap bounds: per-domain mean-L2 terms plus
// the Frechet distance of the domain's style Gaussian to the unified domain.
std::vector<BoundRow> bound_diagnostics(
    const UnifiedDomain& unified,
    std::span<const std::pair<int, std::vector<InstanceStyle>>> per_domain_styles);

}  // namespace conststyle
