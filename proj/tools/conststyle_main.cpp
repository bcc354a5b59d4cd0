// ConstStyle command-line harness: dataset generation, two-phase training,
// alpha-controlled inference, leave-one-domain-out benchmarking, the
// distance/alpha/cluster/scale sweeps and bound diagnostics.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "conststyle/io.hpp"
#include "conststyle/pipeline.hpp"
#include "conststyle/style_align.hpp"

namespace fs = std::filesystem;
using namespace conststyle;

namespace {

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> out;
  std::istringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  if (out.empty()) throw ConfigError("empty numeric list: " + csv);
  return out;
}

std::vector<int> parse_int_list(const std::string& csv) {
  std::vector<int> out;
  for (double v : parse_double_list(csv)) out.push_back(static_cast<int>(v));
  return out;
}

// One manifest entry; defaulted values are marked with a trailing comment so
// the file still parses back to the bare value.
struct Manifest {
  std::vector<std::pair<std::string, std::string>> entries;

  void add(const std::string& key, const std::string& value, bool defaulted = false) {
    entries.emplace_back(key, defaulted ? value + "  # default" : value);
  }
  void write(const fs::path& dir) const { io::write_ini(dir / "manifest.ini", entries); }
};

// Train-configuration flags shared by train/loo/distances/ablate-clusters/scale.
struct TrainOptions {
  TrainConfig config;
  std::string method = "average";
  std::string mode = "conststyle";
  std::vector<CLI::Option*> opts;

  void attach(CLI::App* cmd) {
    opts = {
        cmd->add_option("--epochs", config.epochs, "Total training epochs E"),
        cmd->add_option("--initial-epochs", config.initial_epochs,
                        "Plain-training epochs before alignment starts (xi)"),
        cmd->add_option("--update-interval", config.update_interval,
                        "Unified-domain refresh period in epochs (gamma)"),
        cmd->add_option("--lr", config.learning_rate, "SGD learning rate"),
        cmd->add_option("--momentum", config.momentum, "SGD momentum"),
        cmd->add_option("--clusters", config.n_clusters, "GMM cluster count N'"),
        cmd->add_option("--alpha", config.alpha, "Partial-projection alpha for inference"),
        cmd->add_option("--batch-size", config.batch_size, "Mini-batch size"),
        cmd->add_option("--seed", config.seed, "Run seed"),
        cmd->add_option("--method", method, "Unified-domain aggregation: average|barycenter"),
        cmd->add_option("--mode", mode, "Training mode: erm|conststyle"),
        cmd->add_option("--holdout", config.holdout_domain, "Domain id excluded from training"),
        cmd->add_option("--sigma-floor", config.sigma_floor, "Guard floor for sigma divisions"),
        cmd->add_option("--covariance-floor", config.covariance_floor,
                        "Eigenvalue floor for cluster covariances"),
    };
  }

  TrainConfig resolve() {
    config.unified_method = unified_method_from_string(method);
    config.mode = train_mode_from_string(mode);
    return config;
  }

  void log(Manifest& manifest) const {
    for (const CLI::Option* opt : opts) {
      const std::string name = opt->get_name();
      std::string value = opt->count() ? opt->results().front() : std::string();
      if (value.empty()) {
        // reconstruct the default from the current struct values
        if (name == "--epochs") value = std::to_string(config.epochs);
        else if (name == "--initial-epochs") value = std::to_string(config.initial_epochs);
        else if (name == "--update-interval") value = std::to_string(config.update_interval);
        else if (name == "--lr") value = io::format_double(config.learning_rate);
        else if (name == "--momentum") value = io::format_double(config.momentum);
        else if (name == "--clusters") value = std::to_string(config.n_clusters);
        else if (name == "--alpha") value = io::format_double(config.alpha);
        else if (name == "--batch-size") value = std::to_string(config.batch_size);
        else if (name == "--seed") value = std::to_string(config.seed);
        else if (name == "--method") value = method;
        else if (name == "--mode") value = mode;
        else if (name == "--holdout") value = std::to_string(config.holdout_domain);
        else if (name == "--sigma-floor") value = io::format_double(config.sigma_floor);
        else if (name == "--covariance-floor") value = io::format_double(config.covariance_floor);
      }
      manifest.add(name.substr(2), value, opt->count() == 0);
    }
  }
};

void write_eval_csv(const fs::path& path, const EvalReport& report) {
  const std::vector<std::string> header = {"domain_id", "alpha",    "n",
                                           "correct",   "accuracy", "frechet_to_unified"};
  io::CsvWriter csv(path, header);
  for (const auto& d : report.domains) {
    csv.row(std::vector<std::string>{std::to_string(d.domain_id), io::format_double(report.alpha),
                                     std::to_string(d.n), std::to_string(d.correct),
                                     io::format_double(d.accuracy),
                                     io::format_double(d.frechet_to_unified)});
  }
}

void write_train_csv(const fs::path& path, const TrainReport& report) {
  const std::vector<std::string> header = {"epoch",   "mode",    "loss",
                                           "train_acc", "refresh", "barycenter_residual"};
  io::CsvWriter csv(path, header);
  for (const auto& e : report.epochs) {
    csv.row(std::vector<std::string>{std::to_string(e.epoch), e.phase, io::format_double(e.loss),
                                     io::format_double(e.train_accuracy), e.refreshed ? "1" : "0",
                                     io::format_double(e.barycenter_residual)});
  }
}

int run_gen_data(const std::string& out, int n_domains, int n_classes, int per_cell,
                 std::uint64_t seed, const std::string& levels_csv, int height, int width,
                 bool levels_given) {
  io::RunLock lock(out);
  std::vector<double> levels;
  if (levels_given) {
    levels = parse_double_list(levels_csv);
    if (static_cast<int>(levels.size()) != n_domains)
      throw ConfigError("--levels length must equal --domains");
  } else {
    for (int i = 0; i < n_domains; ++i) levels.push_back(static_cast<double>(i));
  }
  const auto family = make_domain_family(n_domains, levels, seed);
  const SyntheticDataset dataset = generate_dataset(family, n_classes, per_cell, seed, height, width);
  io::save_dataset(out, dataset);

  Manifest manifest;
  manifest.add("command", "gen-data");
  manifest.add("version", io::kLibraryVersion);
  manifest.add("domains", std::to_string(n_domains));
  manifest.add("classes", std::to_string(n_classes));
  manifest.add("per_cell", std::to_string(per_cell));
  manifest.add("seed", std::to_string(seed));
  std::string levels_str;
  for (std::size_t i = 0; i < levels.size(); ++i)
    levels_str += (i ? "," : "") + io::format_double(levels[i]);
  manifest.add("levels", levels_str, !levels_given);
  manifest.add("height", std::to_string(height));
  manifest.add("width", std::to_string(width));
  manifest.write(out);

  std::cout << "wrote " << dataset.samples.size() << " samples across " << n_domains
            << " domains to " << out << "\n";
  return 0;
}

int run_train(const std::string& data, const std::string& out, TrainOptions& options) {
  io::RunLock lock(out);
  const SyntheticDataset dataset = io::load_dataset(data);
  const TrainConfig config = options.resolve();
  const TrainResult result = train(dataset, config);

  io::save_model(out, result.net,
                 result.initial_style_params.empty() ? nullptr : &result.initial_style_params);
  if (result.unified) io::save_unified(out, *result.unified);
  write_train_csv(fs::path(out) / "train_log.csv", result.report);

  Manifest manifest;
  manifest.add("command", "train");
  manifest.add("version", io::kLibraryVersion);
  manifest.add("data", data);
  options.log(manifest);
  manifest.write(out);

  const auto& last = result.report.epochs.back();
  std::cout << "trained " << to_string(config.mode) << " for " << config.epochs
            << " epochs; final loss " << io::format_double(last.loss) << ", train acc "
            << io::format_double(last.train_accuracy) << "\n";
  return 0;
}

int run_eval(const std::string& model_dir, const std::string& data, int domain, double alpha,
             const std::string& out, bool use_initial_extractor) {
  io::RunLock lock(out);
  DeskNet net = io::load_model(model_dir);
  if (use_initial_extractor) {
    Vec initial;
    if (!io::load_initial_style_params(model_dir, initial))
      throw StateError("model dump carries no initial-phase style extractor");
    net.set_style_params(initial);
  }

  std::optional<UnifiedDomain> unified;
  if (io::unified_exists(model_dir)) {
    unified = io::load_unified(model_dir);
    // float32 round-trip can nudge small eigenvalues; keep the covariance usable
    unified->style.covariance = regularize_psd(unified->style.covariance, 1e-9);
  }
  if (alpha != 1.0 && !unified)
    throw StateError("model dump carries no unified domain; eval requires --alpha 1 (plain)");

  const SyntheticDataset dataset = io::load_dataset(data);
  std::vector<LabeledSample> samples =
      domain >= 0 ? dataset.filter(true, domain) : dataset.samples;
  if (samples.empty()) throw ConfigError("no samples in the requested eval domain");

  const EvalReport report = evaluate(net, unified ? &*unified : nullptr, samples, alpha);
  write_eval_csv(fs::path(out) / "eval.csv", report);

  Manifest manifest;
  manifest.add("command", "eval");
  manifest.add("version", io::kLibraryVersion);
  manifest.add("model", model_dir);
  manifest.add("data", data);
  manifest.add("domain", std::to_string(domain));
  manifest.add("alpha", io::format_double(alpha));
  manifest.add("use_initial_extractor", use_initial_extractor ? "1" : "0");
  manifest.write(out);

  std::cout << "eval accuracy " << io::format_double(report.overall_accuracy) << " over "
            << report.total << " samples\n";
  return 0;
}

int run_loo(const std::string& data, const std::string& out, TrainOptions& options) {
  io::RunLock lock(out);
  const SyntheticDataset dataset = io::load_dataset(data);
  const TrainConfig config = options.resolve();
  const LooResult result = run_leave_one_out(dataset, config);

  const std::vector<std::string> header = {"domain_id", "alpha",    "n",
                                           "correct",   "accuracy", "frechet_to_unified"};
  io::CsvWriter csv(fs::path(out) / "loo.csv", header);
  int total = 0;
  int correct = 0;
  for (const auto& fold : result.folds) {
    total += fold.total;
    correct += fold.correct;
    csv.row(std::vector<std::string>{std::to_string(fold.held_out_domain),
                                     io::format_double(fold.alpha), std::to_string(fold.total),
                                     std::to_string(fold.correct),
                                     io::format_double(fold.overall_accuracy),
                                     io::format_double(fold.domains.front().frechet_to_unified)});
  }
  // averaging row: domain_id -1
  csv.row(std::vector<std::string>{"-1", io::format_double(config.alpha), std::to_string(total),
                                   std::to_string(correct),
                                   io::format_double(result.mean_unseen_accuracy), "nan"});

  Manifest manifest;
  manifest.add("command", "loo");
  manifest.add("version", io::kLibraryVersion);
  manifest.add("data", data);
  options.log(manifest);
  manifest.write(out);

  std::cout << "leave-one-out mean unseen accuracy "
            << io::format_double(result.mean_unseen_accuracy) << " over " << result.folds.size()
            << " folds\n";
  return 0;
}

int run_distances(const std::string& out, const std::string& levels_csv, TrainOptions& options,
                  int n_classes, int per_cell_train, int per_cell_eval) {
  io::RunLock lock(out);
  const std::vector<double> levels = parse_double_list(levels_csv);
  const TrainConfig config = options.resolve();
  const DomainSpec base = DomainSpec::identity(0);
  const auto rows = distance_sweep(base, levels, config, n_classes, per_cell_train, per_cell_eval);

  const std::vector<std::string> header = {"shift_level", "frechet_to_unified", "n",
                                           "accuracy_erm", "accuracy_conststyle"};
  io::CsvWriter csv(fs::path(out) / "distances.csv", header);
  for (const auto& r : rows) {
    csv.row(std::vector<std::string>{
        io::format_double(r.shift_level), io::format_double(r.frechet_to_unified),
        std::to_string(per_cell_eval * n_classes), io::format_double(r.accuracy_erm),
        io::format_double(r.accuracy_conststyle)});
  }

  Manifest manifest;
  manifest.add("command", "distances");
  manifest.add("version", io::kLibraryVersion);
  manifest.add("levels", levels_csv);
  manifest.add("classes", std::to_string(n_classes));
  manifest.add("per_cell_train", std::to_string(per_cell_train));
  manifest.add("per_cell_eval", std::to_string(per_cell_eval));
  options.log(manifest);
  manifest.write(out);

  std::cout << "distance sweep over " << rows.size() << " levels written to " << out << "\n";
  return 0;
}

int run_ablate_alpha(const std::string& model_dir, const std::string& data, int domain,
                     const std::string& alphas_csv, const std::string& out) {
  io::RunLock lock(out);
  const DeskNet net = io::load_model(model_dir);
  if (!io::unified_exists(model_dir))
    throw StateError("model dump carries no unified domain; alpha ablation needs one");
  UnifiedDomain unified = io::load_unified(model_dir);
  unified.style.covariance = regularize_psd(unified.style.covariance, 1e-9);

  const SyntheticDataset dataset = io::load_dataset(data);
  const std::vector<LabeledSample> samples =
      domain >= 0 ? dataset.filter(true, domain) : dataset.samples;
  if (samples.empty()) throw ConfigError("no samples in the requested eval domain");

  const std::vector<double> alphas = parse_double_list(alphas_csv);
  const auto rows = alpha_sweep(net, unified, samples, alphas);

  const std::vector<std::string> header = {"alpha",   "domain_id", "n",
                                           "correct", "accuracy",  "frechet_to_unified"};
  io::CsvWriter csv(fs::path(out) / "alpha_sweep.csv", header);
  for (const auto& r : rows) {
    csv.row(std::vector<std::string>{
        io::format_double(r.alpha), std::to_string(domain), std::to_string(r.report.total),
        std::to_string(r.report.correct), io::format_double(r.report.overall_accuracy),
        io::format_double(r.report.domains.front().frechet_to_unified)});
  }

  Manifest manifest;
  manifest.add("command", "ablate-alpha");
  manifest.add("version", io::kLibraryVersion);
  manifest.add("model", model_dir);
  manifest.add("data", data);
  manifest.add("domain", std::to_string(domain));
  manifest.add("alphas", alphas_csv);
  manifest.write(out);

  std::cout << "alpha sweep over " << rows.size() << " values written to " << out << "\n";
  return 0;
}

int run_ablate_clusters(const std::string& data, const std::string& counts_csv,
                        const std::string& out, TrainOptions& options) {
  io::RunLock lock(out);
  const SyntheticDataset dataset = io::load_dataset(data);
  const TrainConfig config = options.resolve();
  const std::vector<int> counts = parse_int_list(counts_csv);
  const auto rows = cluster_sweep(dataset, config, counts);

  const std::vector<std::string> header = {"n_clusters", "domain_id", "alpha", "n",
                                           "correct",    "accuracy",  "frechet_to_unified"};
  io::CsvWriter csv(fs::path(out) / "cluster_sweep.csv", header);
  for (const auto& r : rows) {
    csv.row(std::vector<std::string>{
        std::to_string(r.n_clusters), std::to_string(r.report.held_out_domain),
        io::format_double(r.report.alpha), std::to_string(r.report.total),
        std::to_string(r.report.correct), io::format_double(r.report.overall_accuracy),
        io::format_double(r.report.domains.front().frechet_to_unified)});
  }

  Manifest manifest;
  manifest.add("command", "ablate-clusters");
  manifest.add("version", io::kLibraryVersion);
  manifest.add("data", data);
  manifest.add("counts", counts_csv);
  options.log(manifest);
  manifest.write(out);

  std::cout << "cluster sweep over " << rows.size() << " counts written to " << out << "\n";
  return 0;
}

int run_scale(const std::string& out, const std::string& sizes_csv, TrainOptions& options,
              int n_classes) {
  io::RunLock lock(out);
  const std::vector<int> sizes = parse_int_list(sizes_csv);
  const TrainConfig config = options.resolve();
  const auto rows = scalability_sweep(sizes, config, n_classes);

  const std::vector<std::string> header = {"size", "seconds_per_epoch"};
  io::CsvWriter csv(fs::path(out) / "scale.csv", header);
  for (const auto& r : rows)
    csv.row(std::vector<std::string>{std::to_string(r.dataset_size),
                                     io::format_double(r.seconds_per_epoch)});

  Manifest manifest;
  manifest.add("command", "scale");
  manifest.add("version", io::kLibraryVersion);
  manifest.add("sizes", sizes_csv);
  manifest.add("classes", std::to_string(n_classes));
  options.log(manifest);
  manifest.write(out);

  std::cout << "scalability sweep over " << rows.size() << " sizes written to " << out << "\n";
  return 0;
}

int run_diagnose(const std::string& model_dir, const std::string& data, const std::string& out) {
  io::RunLock lock(out);
  const DeskNet net = io::load_model(model_dir);
  if (!io::unified_exists(model_dir))
    throw StateError("model dump carries no unified domain; diagnostics need one");
  UnifiedDomain unified = io::load_unified(model_dir);
  unified.style.covariance = regularize_psd(unified.style.covariance, 1e-9);

  const SyntheticDataset dataset = io::load_dataset(data);
  std::vector<std::pair<int, std::vector<InstanceStyle>>> per_domain;
  for (int domain : dataset.domain_ids) {
    const std::vector<LabeledSample> samples = dataset.filter(true, domain);
    per_domain.emplace_back(domain, harvest_styles(net, samples));
  }
  const auto rows = bound_diagnostics(unified, per_domain);

  const std::vector<std::string> header = {"domain_id", "d_mu", "d_sigma", "frechet_to_unified"};
  io::CsvWriter csv(fs::path(out) / "diagnostics.csv", header);
  for (const auto& r : rows)
    csv.row(std::vector<std::string>{std::to_string(r.domain_id), io::format_double(r.d_mu),
                                     io::format_double(r.d_sigma),
                                     io::format_double(r.frechet_to_unified)});

  Manifest manifest;
  manifest.add("command", "diagnose");
  manifest.add("version", io::kLibraryVersion);
  manifest.add("model", model_dir);
  manifest.add("data", data);
  manifest.write(out);

  std::cout << "bound diagnostics for " << rows.size() << " domains written to " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ConstStyle: unified-domain style alignment at desk scale"};
  app.require_subcommand(1);
  app.set_config("--config", "", "INI config file (key = value; flags override)");
  app.allow_config_extras(false);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic multi-domain dataset");
  std::string gen_out;
  int gen_domains = 4, gen_classes = 4, gen_per_cell = 25, gen_height = 16, gen_width = 16;
  std::uint64_t gen_seed = 0;
  std::string gen_levels;
  gen->add_option("--out", gen_out, "Output run directory")->required();
  gen->add_option("--domains", gen_domains, "Number of domains");
  gen->add_option("--classes", gen_classes, "Number of classes (<= 8)");
  gen->add_option("--per-cell", gen_per_cell, "Samples per (class, domain) cell");
  gen->add_option("--seed", gen_seed, "Generation seed");
  auto* gen_levels_opt = gen->add_option("--levels", gen_levels, "Comma-separated shift levels");
  gen->add_option("--height", gen_height, "Image height");
  gen->add_option("--width", gen_width, "Image width");

  // train
  auto* tr = app.add_subcommand("train", "Train an ERM or ConstStyle model");
  std::string tr_data, tr_out;
  TrainOptions tr_options;
  tr->add_option("--data", tr_data, "Dataset run directory")->required();
  tr->add_option("--out", tr_out, "Output run directory")->required();
  tr_options.attach(tr);

  // eval
  auto* ev = app.add_subcommand("eval", "Evaluate a trained model on one domain");
  std::string ev_model, ev_data, ev_out;
  int ev_domain = -1;
  double ev_alpha = 0.6;
  bool ev_initial = false;
  ev->add_option("--model", ev_model, "Model run directory")->required();
  ev->add_option("--data", ev_data, "Dataset run directory")->required();
  ev->add_option("--out", ev_out, "Output run directory")->required();
  ev->add_option("--domain", ev_domain, "Domain id to evaluate (-1 = all)");
  ev->add_option("--alpha", ev_alpha, "Partial-projection alpha");
  ev->add_flag("--use-initial-extractor", ev_initial,
               "Run the frozen initial-phase style extractor instead of the final one");

  // loo
  auto* loo = app.add_subcommand("loo", "Leave-one-domain-out benchmark");
  std::string loo_data, loo_out;
  TrainOptions loo_options;
  loo->add_option("--data", loo_data, "Dataset run directory")->required();
  loo->add_option("--out", loo_out, "Output run directory")->required();
  loo_options.attach(loo);

  // distances
  auto* dist = app.add_subcommand("distances", "Domain-gap sweep (paired ERM vs ConstStyle)");
  std::string dist_out, dist_levels = "0,1,2,3";
  int dist_classes = 4, dist_train_cell = 25, dist_eval_cell = 50;
  TrainOptions dist_options;
  dist->add_option("--out", dist_out, "Output run directory")->required();
  dist->add_option("--levels", dist_levels, "Comma-separated shift levels");
  dist->add_option("--classes", dist_classes, "Number of classes");
  dist->add_option("--per-cell-train", dist_train_cell, "Training samples per class");
  dist->add_option("--per-cell-eval", dist_eval_cell, "Eval samples per class per level");
  dist_options.attach(dist);

  // ablate-alpha
  auto* aa = app.add_subcommand("ablate-alpha", "Accuracy per alpha, training untouched");
  std::string aa_model, aa_data, aa_out, aa_alphas = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0";
  int aa_domain = -1;
  aa->add_option("--model", aa_model, "Model run directory")->required();
  aa->add_option("--data", aa_data, "Dataset run directory")->required();
  aa->add_option("--out", aa_out, "Output run directory")->required();
  aa->add_option("--domain", aa_domain, "Domain id to evaluate (-1 = all)");
  aa->add_option("--alphas", aa_alphas, "Comma-separated alpha grid");

  // ablate-clusters
  auto* ac = app.add_subcommand("ablate-clusters", "Accuracy per cluster count (retrains)");
  std::string ac_data, ac_out, ac_counts = "1,2,3,4,5";
  TrainOptions ac_options;
  ac->add_option("--data", ac_data, "Dataset run directory")->required();
  ac->add_option("--out", ac_out, "Output run directory")->required();
  ac->add_option("--counts", ac_counts, "Comma-separated cluster counts");
  ac_options.attach(ac);

  // scale
  auto* sc = app.add_subcommand("scale", "Per-epoch wall-clock across dataset sizes");
  std::string sc_out, sc_sizes = "480,960,1440,1920";
  int sc_classes = 4;
  TrainOptions sc_options;
  sc_options.config.epochs = 6;
  sc_options.config.initial_epochs = 1;
  sc_options.config.update_interval = 1;
  sc->add_option("--out", sc_out, "Output run directory")->required();
  sc->add_option("--sizes", sc_sizes, "Comma-separated training-set sizes");
  sc->add_option("--classes", sc_classes, "Number of classes");
  sc_options.attach(sc);

  // diagnose
  auto* di = app.add_subcommand("diagnose", "Per-domain D_mu / D_sigma / Frechet table");
  std::string di_model, di_data, di_out;
  di->add_option("--model", di_model, "Model run directory")->required();
  di->add_option("--data", di_data, "Dataset run directory")->required();
  di->add_option("--out", di_out, "Output run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // user error
  }

  try {
    if (gen->parsed())
      return run_gen_data(gen_out, gen_domains, gen_classes, gen_per_cell, gen_seed, gen_levels,
                          gen_height, gen_width, gen_levels_opt->count() > 0);
    if (tr->parsed()) return run_train(tr_data, tr_out, tr_options);
    if (ev->parsed()) return run_eval(ev_model, ev_data, ev_domain, ev_alpha, ev_out, ev_initial);
    if (loo->parsed()) return run_loo(loo_data, loo_out, loo_options);
    if (dist->parsed())
      return run_distances(dist_out, dist_levels, dist_options, dist_classes, dist_train_cell,
                           dist_eval_cell);
    if (aa->parsed()) return run_ablate_alpha(aa_model, aa_data, aa_domain, aa_alphas, aa_out);
    if (ac->parsed()) return run_ablate_clusters(ac_data, ac_counts, ac_out, ac_options);
    if (sc->parsed()) return run_scale(sc_out, sc_sizes, sc_options, sc_classes);
    if (di->parsed()) return run_diagnose(di_model, di_data, di_out);
    std::cerr << "no subcommand given\n";
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const StateError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const InsufficientDataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const EmptyDomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
}
