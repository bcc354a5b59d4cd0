#include "conststyle/desknet.hpp"

#include <algorithm>
#include <cmath>

#include "conststyle/util.hpp"

namespace conststyle {

namespace {

constexpr int kStyleArea = kStyleSize * kStyleSize;
constexpr int kTrunkArea = kTrunkSize * kTrunkSize;

// out(o, y, x) = b[o] + sum_{i,kh,kw} w(o,i,kh,kw) * in(i, y+kh, x+kw)
void conv_valid(const double* in, int in_c, int in_hw, const double* w, const double* b,
                double* out, int out_c, int out_hw) {
  for (int o = 0; o < out_c; ++o) {
    double* dst = out + static_cast<std::size_t>(o) * out_hw * out_hw;
    for (int y = 0; y < out_hw; ++y)
      for (int x = 0; x < out_hw; ++x) dst[y * out_hw + x] = b[o];
    for (int i = 0; i < in_c; ++i) {
      const double* src = in + static_cast<std::size_t>(i) * in_hw * in_hw;
      const double* wk = w + (static_cast<std::size_t>(o) * in_c + i) * kKernel * kKernel;
      for (int kh = 0; kh < kKernel; ++kh) {
        for (int kw = 0; kw < kKernel; ++kw) {
          const double wv = wk[kh * kKernel + kw];
          for (int y = 0; y < out_hw; ++y) {
            const double* srow = src + (y + kh) * in_hw + kw;
            double* drow = dst + y * out_hw;
            for (int x = 0; x < out_hw; ++x) drow[x] += wv * srow[x];
          }
        }
      }
    }
  }
}

// Accumulates dW/db and (optionally) dIn for the convolution above.
void conv_backward(const double* in, int in_c, int in_hw, const double* w, const double* d_out,
                   int out_c, int out_hw, double* d_w, double* d_b, double* d_in) {
  for (int o = 0; o < out_c; ++o) {
    const double* do_ = d_out + static_cast<std::size_t>(o) * out_hw * out_hw;
    double db = 0.0;
    for (int p = 0; p < out_hw * out_hw; ++p) db += do_[p];
    d_b[o] += db;
    for (int i = 0; i < in_c; ++i) {
      const double* src = in + static_cast<std::size_t>(i) * in_hw * in_hw;
      double* dwk = d_w + (static_cast<std::size_t>(o) * in_c + i) * kKernel * kKernel;
      const double* wk = w + (static_cast<std::size_t>(o) * in_c + i) * kKernel * kKernel;
      double* din = d_in ? d_in + static_cast<std::size_t>(i) * in_hw * in_hw : nullptr;
      for (int kh = 0; kh < kKernel; ++kh) {
        for (int kw = 0; kw < kKernel; ++kw) {
          double acc = 0.0;
          const double wv = wk[kh * kKernel + kw];
          for (int y = 0; y < out_hw; ++y) {
            const double* srow = src + (y + kh) * in_hw + kw;
            const double* drow = do_ + y * out_hw;
            for (int x = 0; x < out_hw; ++x) {
              acc += drow[x] * srow[x];
              if (din) din[(y + kh) * in_hw + (x + kw)] += wv * drow[x];
            }
          }
          dwk[kh * kKernel + kw] += acc;
        }
      }
    }
  }
}

}  // namespace

DeskNet::Layout::Layout(int n_classes) {
  w1 = 0;
  b1 = w1 + kStyleChannels * kInputChannels * kKernel * kKernel;
  w2 = b1 + kStyleChannels;
  b2 = w2 + kTrunkChannels * kStyleChannels * kKernel * kKernel;
  w3 = b2 + kTrunkChannels;
  b3 = w3 + n_classes * kTrunkChannels;
  total = b3 + n_classes;
}

DeskNet::DeskNet(int n_classes) : n_classes_(n_classes), layout_(n_classes) {
  if (n_classes < 2) throw ConfigError("DeskNet needs at least two classes");
  params_.assign(static_cast<std::size_t>(layout_.total), 0.0);
}

DeskNet DeskNet::random_init(int n_classes, RngState& rng) {
  DeskNet net(n_classes);
  const Layout& l = net.layout_;
  const double std1 = std::sqrt(2.0 / (kInputChannels * kKernel * kKernel));
  const double std2 = std::sqrt(2.0 / (kStyleChannels * kKernel * kKernel));
  const double std3 = std::sqrt(1.0 / kTrunkChannels);
  for (int i = l.w1; i < l.b1; ++i) net.params_[static_cast<std::size_t>(i)] = std1 * rng.normal();
  for (int i = l.w2; i < l.b2; ++i) net.params_[static_cast<std::size_t>(i)] = std2 * rng.normal();
  for (int i = l.w3; i < l.b3; ++i) net.params_[static_cast<std::size_t>(i)] = std3 * rng.normal();
  return net;
}

Vec DeskNet::style_params() const {
  return Vec(params_.begin() + layout_.w1, params_.begin() + layout_.w2);
}

void DeskNet::set_style_params(const Vec& style) {
  if (static_cast<int>(style.size()) != layout_.w2 - layout_.w1)
    throw ShapeError("style parameter block has the wrong size");
  std::copy(style.begin(), style.end(), params_.begin() + layout_.w1);
}

std::string to_string(TrainMode mode) { return mode == TrainMode::erm ? "erm" : "conststyle"; }

TrainMode train_mode_from_string(const std::string& name) {
  if (name == "erm") return TrainMode::erm;
  if (name == "conststyle") return TrainMode::conststyle;
  throw ConfigError("unknown train mode: " + name);
}

FeatureMap forward_style(const DeskNet& net, const FeatureMap& x, ForwardTrace* trace) {
  x.validate();
  if (x.channels != kInputChannels || x.height != kInputSize || x.width != kInputSize)
    throw ShapeError("DeskNet input must be 3x16x16");

  const auto& l = net.layout();
  const double* p = net.params().data();
  Vec pre(static_cast<std::size_t>(kStyleChannels) * kStyleArea);
  conv_valid(x.values.data(), kInputChannels, kInputSize, p + l.w1, p + l.b1, pre.data(),
             kStyleChannels, kStyleSize);

  FeatureMap z(kStyleChannels, kStyleSize, kStyleSize);
  for (std::size_t i = 0; i < pre.size(); ++i) z.values[i] = pre[i] > 0.0 ? pre[i] : 0.0;

  if (trace) {
    trace->input = x;
    trace->pre_style = std::move(pre);
    trace->style = z;
  }
  return z;
}

Vec forward_head(const DeskNet& net, const FeatureMap& z, ForwardTrace* trace) {
  z.validate();
  if (z.channels != kStyleChannels || z.height != kStyleSize || z.width != kStyleSize)
    throw ShapeError("DeskNet trunk input must be 8x14x14");

  const auto& l = net.layout();
  const double* p = net.params().data();
  const int k = net.n_classes();

  Vec pre(static_cast<std::size_t>(kTrunkChannels) * kTrunkArea);
  conv_valid(z.values.data(), kStyleChannels, kStyleSize, p + l.w2, p + l.b2, pre.data(),
             kTrunkChannels, kTrunkSize);
  Vec act(pre.size());
  for (std::size_t i = 0; i < pre.size(); ++i) act[i] = pre[i] > 0.0 ? pre[i] : 0.0;

  Vec pooled(kTrunkChannels, 0.0);
  for (int c = 0; c < kTrunkChannels; ++c) {
    double s = 0.0;
    const double* a = act.data() + static_cast<std::size_t>(c) * kTrunkArea;
    for (int i = 0; i < kTrunkArea; ++i) s += a[i];
    pooled[static_cast<std::size_t>(c)] = s / kTrunkArea;
  }

  Vec logits(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    double s = p[l.b3 + j];
    const double* w = p + l.w3 + static_cast<std::size_t>(j) * kTrunkChannels;
    for (int c = 0; c < kTrunkChannels; ++c) s += w[c] * pooled[static_cast<std::size_t>(c)];
    logits[static_cast<std::size_t>(j)] = s;
  }

  if (trace) {
    trace->trunk_in = z;
    trace->pre_trunk = std::move(pre);
    trace->trunk_act = std::move(act);
    trace->pooled = pooled;
    trace->logits = logits;
  }
  return logits;
}

Vec softmax(const Vec& logits) {
  double m = logits.front();
  for (double v : logits) m = std::max(m, v);
  Vec p(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - m);
    z += p[i];
  }
  for (double& v : p) v /= z;
  return p;
}

int argmax_index(const Vec& v) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(v.size()); ++i)
    if (v[static_cast<std::size_t>(i)] > v[static_cast<std::size_t>(best)]) best = i;
  return best;
}

namespace {

struct SampleResult {
  double loss = 0.0;
  bool correct = false;
  Vec grad;
};

SampleResult sample_loss_and_grad(const DeskNet& net, const LabeledSample& sample,
                                  const Vec* mu_s, const Vec* sigma_s, double sigma_floor) {
  const auto& l = net.layout();
  const double* p = net.params().data();
  const int k = net.n_classes();
  if (sample.class_label < 0 || sample.class_label >= k)
    throw ShapeError("class label out of range for this head");

  ForwardTrace trace;
  FeatureMap z = forward_style(net, sample.input, &trace);

  if (mu_s != nullptr) {
    // Align z to the sampled style; cache the normalization for backprop.
    const InstanceStyle own = compute_instance_style(z);
    trace.aligned = true;
    trace.mu_x = own.mu;
    trace.sigma_guard.resize(kStyleChannels);
    trace.sigma_floored.assign(kStyleChannels, 0.0);
    trace.normalized.resize(z.values.size());
    trace.mu_s = *mu_s;
    trace.sigma_s = *sigma_s;

    FeatureMap zt(kStyleChannels, kStyleSize, kStyleSize);
    for (int c = 0; c < kStyleChannels; ++c) {
      const double sigma = own.sigma[static_cast<std::size_t>(c)];
      const bool floored = sigma < sigma_floor;
      const double guard = floored ? sigma_floor : sigma;
      trace.sigma_guard[static_cast<std::size_t>(c)] = guard;
      trace.sigma_floored[static_cast<std::size_t>(c)] = floored ? 1.0 : 0.0;
      const double mu = own.mu[static_cast<std::size_t>(c)];
      const double ts = (*sigma_s)[static_cast<std::size_t>(c)];
      const double tm = (*mu_s)[static_cast<std::size_t>(c)];
      const auto src = z.channel(c);
      auto u = std::span<double>(trace.normalized.data() + static_cast<std::size_t>(c) * kStyleArea,
                                 kStyleArea);
      auto dst = zt.channel(c);
      for (int i = 0; i < kStyleArea; ++i) {
        u[static_cast<std::size_t>(i)] = (src[static_cast<std::size_t>(i)] - mu) / guard;
        dst[static_cast<std::size_t>(i)] = ts * u[static_cast<std::size_t>(i)] + tm;
      }
    }
    forward_head(net, zt, &trace);
  } else {
    forward_head(net, z, &trace);
  }

  const Vec prob = softmax(trace.logits);
  SampleResult result;
  result.loss = -std::log(std::max(prob[static_cast<std::size_t>(sample.class_label)], 1e-300));
  result.correct = argmax_index(trace.logits) == sample.class_label;
  result.grad.assign(static_cast<std::size_t>(l.total), 0.0);
  double* g = result.grad.data();

  // Head: d_logits = softmax - onehot.
  Vec d_logits = prob;
  d_logits[static_cast<std::size_t>(sample.class_label)] -= 1.0;

  Vec d_pooled(kTrunkChannels, 0.0);
  for (int j = 0; j < k; ++j) {
    const double dj = d_logits[static_cast<std::size_t>(j)];
    g[l.b3 + j] += dj;
    double* gw = g + l.w3 + static_cast<std::size_t>(j) * kTrunkChannels;
    const double* w = p + l.w3 + static_cast<std::size_t>(j) * kTrunkChannels;
    for (int c = 0; c < kTrunkChannels; ++c) {
      gw[c] += dj * trace.pooled[static_cast<std::size_t>(c)];
      d_pooled[static_cast<std::size_t>(c)] += dj * w[c];
    }
  }

  // Pooling and trunk ReLU.
  Vec d_pre_trunk(trace.pre_trunk.size());
  for (int c = 0; c < kTrunkChannels; ++c) {
    const double dv = d_pooled[static_cast<std::size_t>(c)] / kTrunkArea;
    const double* pre = trace.pre_trunk.data() + static_cast<std::size_t>(c) * kTrunkArea;
    double* d = d_pre_trunk.data() + static_cast<std::size_t>(c) * kTrunkArea;
    for (int i = 0; i < kTrunkArea; ++i) d[i] = pre[i] > 0.0 ? dv : 0.0;
  }

  // conv2 backward into its input (z or aligned z).
  Vec d_trunk_in(trace.trunk_in.values.size(), 0.0);
  conv_backward(trace.trunk_in.values.data(), kStyleChannels, kStyleSize, p + l.w2,
                d_pre_trunk.data(), kTrunkChannels, kTrunkSize, g + l.w2, g + l.b2,
                d_trunk_in.data());

  // Alignment backward: z' = sigma_s * u + mu_s with u = (z - mu)/sigma.
  Vec d_style(trace.style.values.size());
  if (trace.aligned) {
    for (int c = 0; c < kStyleChannels; ++c) {
      const double ts = trace.sigma_s[static_cast<std::size_t>(c)];
      const double guard = trace.sigma_guard[static_cast<std::size_t>(c)];
      const bool floored = trace.sigma_floored[static_cast<std::size_t>(c)] != 0.0;
      const double* du_src = d_trunk_in.data() + static_cast<std::size_t>(c) * kStyleArea;
      const double* u = trace.normalized.data() + static_cast<std::size_t>(c) * kStyleArea;
      double du_mean = 0.0;
      double duu_mean = 0.0;
      for (int i = 0; i < kStyleArea; ++i) {
        const double du = ts * du_src[i];
        du_mean += du;
        duu_mean += du * u[i];
      }
      du_mean /= kStyleArea;
      duu_mean /= kStyleArea;
      double* d = d_style.data() + static_cast<std::size_t>(c) * kStyleArea;
      for (int i = 0; i < kStyleArea; ++i) {
        const double du = ts * du_src[i];
        // When the guard clipped, sigma is a constant and only the mean
        // couples the pixels.
        d[i] = floored ? (du - du_mean) / guard
                       : (du - du_mean - u[i] * duu_mean) / guard;
      }
    }
  } else {
    d_style = std::move(d_trunk_in);
  }

  // Style ReLU, then conv1 weight/bias gradients (input gradient not needed).
  Vec d_pre_style(trace.pre_style.size());
  for (std::size_t i = 0; i < d_pre_style.size(); ++i)
    d_pre_style[i] = trace.pre_style[i] > 0.0 ? d_style[i] : 0.0;
  conv_backward(trace.input.values.data(), kInputChannels, kInputSize, p + l.w1,
                d_pre_style.data(), kStyleChannels, kStyleSize, g + l.w1, g + l.b1, nullptr);

  return result;
}

}  // namespace

BatchGrad loss_and_grad(const DeskNet& net, std::span<const LabeledSample> batch,
                        const UnifiedDomain* unified, RngState& rng, TrainMode mode,
                        double sigma_floor) {
  if (batch.empty()) throw EmptyDomainError("empty batch");
  const bool aligned = mode == TrainMode::conststyle;
  if (aligned && unified == nullptr)
    throw StateError("conststyle mode requires a unified domain");

  // One style per image, drawn serially in batch order so the consumption
  // pattern is independent of the worker count.
  std::vector<std::pair<Vec, Vec>> styles;
  if (aligned) {
    const StyleSampler sampler = make_style_sampler(*unified, sigma_floor);
    if (sampler.channels() != kStyleChannels)
      throw ShapeError("unified domain dimension does not match the style stage");
    styles.reserve(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) styles.push_back(sampler.draw(rng));
  }

  std::vector<SampleResult> results(batch.size());
  parallel_for(batch.size(), [&](std::size_t i) {
    const Vec* mu_s = aligned ? &styles[i].first : nullptr;
    const Vec* sigma_s = aligned ? &styles[i].second : nullptr;
    results[i] = sample_loss_and_grad(net, batch[i], mu_s, sigma_s, sigma_floor);
  });

  BatchGrad out;
  out.grad.assign(net.params().size(), 0.0);
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  for (const auto& r : results) {  // fixed-order reduction, bit-identical to serial
    out.loss += r.loss * inv_b;
    out.correct += r.correct ? 1 : 0;
    for (std::size_t j = 0; j < out.grad.size(); ++j) out.grad[j] += r.grad[j] * inv_b;
  }
  return out;
}

void sgd_step(DeskNet& net, const Vec& grad, OptimState& optim) {
  if (grad.size() != net.params().size()) throw ShapeError("gradient size mismatch");
  if (!(optim.learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (optim.momentum < 0.0) throw ConfigError("momentum must be nonnegative");
  for (double v : grad)
    if (!std::isfinite(v)) throw NumericalError("non-finite gradient");

  if (optim.velocity.size() != grad.size()) optim.velocity.assign(grad.size(), 0.0);
  Vec& params = net.params();
  for (std::size_t i = 0; i < grad.size(); ++i) {
    optim.velocity[i] = optim.momentum * optim.velocity[i] + grad[i];
    params[i] -= optim.learning_rate * optim.velocity[i];
    if (!std::isfinite(params[i])) throw NumericalError("non-finite parameter after update");
  }
}

}  // namespace conststyle
