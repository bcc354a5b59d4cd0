#pragma once

#include <optional>
#include <span>

#include "conststyle/datagen.hpp"
#include "conststyle/rng.hpp"
#include "conststyle/style_stats.hpp"
#include "conststyle/unified_domain.hpp"

namespace conststyle {

// Fixed architecture: 3x16x16 input -> conv 3x3 (valid) to 8x14x14 + ReLU
// (the style stage) -> optional style alignment -> conv 3x3 (valid) to
// 16x12x12 + ReLU -> global average pooling -> linear head to K logits.
inline constexpr int kInputChannels = 3;
inline constexpr int kInputSize = 16;
inline constexpr int kKernel = 3;
inline constexpr int kStyleChannels = 8;
inline constexpr int kStyleSize = kInputSize - kKernel + 1;  // 14
inline constexpr int kTrunkChannels = 16;
inline constexpr int kTrunkSize = kStyleSize - kKernel + 1;  // 12

enum class TrainMode { erm, conststyle };

std::string to_string(TrainMode mode);
TrainMode train_mode_from_string(const std::string& name);

// Tiny trainable classifier with a flat parameter vector view. The three
// stages map onto the style extractor (conv1), the trunk (conv2 + pooling)
// and the classifier head (linear).
class DeskNet {
 public:
  struct Layout {
    int w1, b1, w2, b2, w3, b3, total;
    explicit Layout(int n_classes);
  };

  explicit DeskNet(int n_classes);
  static DeskNet random_init(int n_classes, RngState& rng);  // He-normal weights, zero biases

  int n_classes() const { return n_classes_; }
  const Layout& layout() const { return layout_; }
  Vec& params() { return params_; }
  const Vec& params() const { return params_; }
  int param_count() const { return layout_.total; }

  // Copies the style-extractor block (conv1 weights + biases) between nets.
  Vec style_params() const;
  void set_style_params(const Vec& style);

 private:
  int n_classes_;
  Layout layout_;
  Vec params_;
};

// Cached activations for backprop. `aligned` marks the ConstStyle path;
// the normalization cache (mu/sigma of z, normalized residual) is only
// populated on that path.
struct ForwardTrace {
  FeatureMap input;
  Vec pre_style;       // conv1 pre-activation, 8x14x14
  FeatureMap style;    // z = relu(conv1), 8x14x14

  bool aligned = false;
  Vec mu_x, sigma_guard;  // per style channel; sigma_guard = max(sigma_x, floor)
  Vec sigma_floored;      // 1.0 where the guard clipped (gradient through sigma is cut)
  Vec normalized;         // u = (z - mu_x) / sigma_guard
  Vec mu_s, sigma_s;      // sampled target style (constant w.r.t. gradients)

  FeatureMap trunk_in;  // z or its aligned version
  Vec pre_trunk;        // conv2 pre-activation, 16x12x12
  Vec trunk_act;        // relu(conv2)
  Vec pooled;           // 16
  Vec logits;           // K
};

// Style stage: z = relu(conv1(x)) for a 3x16x16 input.
FeatureMap forward_style(const DeskNet& net, const FeatureMap& x, ForwardTrace* trace = nullptr);

// Remaining stages: logits = linear(gap(relu(conv2(z)))) for an 8x14x14 map.
Vec forward_head(const DeskNet& net, const FeatureMap& z, ForwardTrace* trace = nullptr);

Vec softmax(const Vec& logits);
int argmax_index(const Vec& v);  // lowest index wins ties

struct BatchGrad {
  double loss = 0.0;  // mean cross-entropy over the batch
  int correct = 0;
  Vec grad;           // d(loss)/d(params), same length as params
};

// Mean cross-entropy and its full analytic gradient over a batch. In
// conststyle mode a style (mu_s, sigma_s) is sampled per image from the
// unified domain and the style stage's output is aligned to it before the
// trunk; gradients flow through mu_x and sigma_x but the sampled style is a
// constant. Throws StateError when conststyle mode lacks a unified domain.
BatchGrad loss_and_grad(const DeskNet& net, std::span<const LabeledSample> batch,
                        const UnifiedDomain* unified, RngState& rng, TrainMode mode,
                        double sigma_floor = 1e-5);

struct OptimState {
  double learning_rate = 0.05;
  double momentum = 0.0;
  Vec velocity;  // lazily sized on first step
};

// params -= lr * v  with  v = momentum * v + grad.
void sgd_step(DeskNet& net, const Vec& grad, OptimState& optim);

}  // namespace conststyle
