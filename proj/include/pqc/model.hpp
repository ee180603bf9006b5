#pragma once

#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "pqc/apot.hpp"
#include "pqc/arch_metrics.hpp"
#include "pqc/checkpoint.hpp"
#include "pqc/gm_prune.hpp"
#include "pqc/ops.hpp"
#include "pqc/optim.hpp"
#include "pqc/tensor.hpp"

// Desk-scale CNNs trained by the pipelines. Each conv/linear unit owns its
// full-precision shadow parameters; quantized forwards derive effective
// weights per step and gradients flow back through the straight-through
// clip gates into the shadows. Masks zero values, never shapes.

namespace pqc {

/// Weight and activation bit assignments for quantization-aware passes.
/// bits >= 32 means passthrough (no quantization).
struct QuantSpec {
  QuantConfig weight;  // body conv weights, signed
  QuantConfig act;     // body activations, unsigned
  int first_last_bits = 8;

  QuantSpec() {
    weight.bits = 4;
    weight.base_bits = 2;
    weight.signed_values = true;
    act.bits = 4;
    act.base_bits = 2;
    act.signed_values = false;
  }

  static QuantSpec passthrough() {
    QuantSpec q;
    q.weight.bits = 32;
    q.act.bits = 32;
    q.first_last_bits = 32;
    return q;
  }

  QuantConfig weight_for(bool edge_layer) const {
    QuantConfig c = weight;
    if (edge_layer) c.bits = first_last_bits;
    return c;
  }
  QuantConfig act_for(bool edge_layer) const {
    QuantConfig c = act;
    if (edge_layer) c.bits = first_last_bits;
    return c;
  }
};

/// Activation clip threshold: running maximum observed during the warm-up
/// epoch, then frozen.
struct ActQuantSite {
  QuantConfig cfg;
  double running_max = 0.0;
  double alpha = 0.0;
  bool warm = true;

  bool enabled() const { return cfg.bits < 32; }

  double current_alpha() const {
    const double a = warm ? running_max : alpha;
    return a > 0.0 ? a : static_cast<double>(std::numeric_limits<float>::min());
  }

  void freeze() {
    alpha = running_max;
    warm = false;
  }
};

namespace detail {

template <typename T>
inline void observe_max(ActQuantSite& site, const TensorBase<T>& t) {
  double mx = site.running_max;
  for (T v : t.data) mx = std::max(mx, std::abs(static_cast<double>(v)));
  site.running_max = mx;
}

}  // namespace detail

struct ConvUnit {
  std::string name;
  Tensor weight;  // OIHW shadow
  Tensor bias;    // O
  int stride = 1;
  int pad = 1;
  bool edge_layer = false;  // first layer: 8-bit weights and input activations

  OptimState<float> weight_state;
  OptimState<float> bias_state;

  PruneMask mask;  // empty keep = unmasked
  bool zero_grad_masked = false;

  ActQuantSite act_site;
  QuantConfig weight_quant;  // resolved; bits >= 32 = passthrough

  // per-step scratch
  Conv2dCtx<float> ctx;
  std::vector<uint8_t> weight_gate;
  std::vector<uint8_t> act_gate;
  Tensor last_output;  // captured when record_outputs is on

  void init(const std::string& n, int64_t in_ch, int64_t out_ch, int k, int stride_, int pad_, Rng& rng) {
    name = n;
    weight = Tensor({out_ch, in_ch, k, k});
    he_normal_init(weight, rng);
    bias = Tensor({out_ch});
    stride = stride_;
    pad = pad_;
  }

  bool masked() const { return !mask.keep.empty() && mask.any_pruned(); }

  /// Selects a new mask and zeroes the masked filters' shadow weights and
  /// bias entries in place. With zero_grad the velocity is cleared too and
  /// every later backward writes zero gradients there, so the filters stay
  /// at exactly zero.
  void set_mask(const PruneMask& m, bool zero_grad) {
    mask = m;
    zero_grad_masked = zero_grad;
    apply_mask(weight, &bias, mask);
    if (zero_grad) {
      if (!weight_state.velocity.empty()) apply_mask(weight_state.velocity, nullptr, mask);
      if (!bias_state.velocity.empty()) {
        const int64_t o = weight.shape[0];
        for (int64_t f = 0; f < o; ++f) {
          if (!mask.keep[static_cast<size_t>(f)]) bias_state.velocity.data[static_cast<size_t>(f)] = 0.0f;
        }
      }
    }
  }

  Tensor forward(const Tensor& input, bool quantized, bool record_output) {
    Tensor x = input;
    act_gate.clear();
    if (quantized && act_site.enabled()) {
      if (act_site.warm) detail::observe_max(act_site, input);
      LevelSet ls = build_level_set(act_site.cfg, act_site.current_alpha());
      x = quantize_tensor(input, ls, &act_gate);
    }
    Tensor w_eff = weight;
    weight_gate.clear();
    if (quantized && weight_quant.bits < 32) {
      const double alpha = compute_clip_threshold(weight, weight_quant.clip, weight_quant.percentile_q);
      LevelSet ls = build_level_set(weight_quant, alpha);
      w_eff = quantize_tensor(weight, ls, &weight_gate);
    }
    Tensor b_eff = bias;
    if (masked()) apply_mask(w_eff, &b_eff, mask);  // masked channels output exactly 0
    Tensor out = conv2d_forward(x, w_eff, b_eff, stride, pad, &ctx);
    if (record_output) last_output = out;
    return out;
  }

  Tensor backward(const Tensor& upstream) {
    auto [gin, gw, gb] = conv2d_backward(ctx, upstream);
    weight.ensure_grad();
    bias.ensure_grad();
    if (!weight_gate.empty()) {
      for (size_t i = 0; i < gw.data.size(); ++i) {
        if (weight_gate[i]) weight.grad[i] += gw.data[i];
      }
    } else {
      for (size_t i = 0; i < gw.data.size(); ++i) weight.grad[i] += gw.data[i];
    }
    for (size_t i = 0; i < gb.data.size(); ++i) bias.grad[i] += gb.data[i];
    if (zero_grad_masked && masked()) mask_gradients(weight, &bias, mask);
    if (!act_gate.empty()) {
      for (size_t i = 0; i < gin.data.size(); ++i) {
        if (!act_gate[i]) gin.data[i] = 0.0f;
      }
    }
    return gin;
  }
};

struct LinearUnit {
  std::string name;
  Tensor weight;  // C x F shadow
  Tensor bias;
  bool edge_layer = true;  // the classifier head is the network's last layer

  OptimState<float> weight_state;
  OptimState<float> bias_state;

  ActQuantSite act_site;
  QuantConfig weight_quant;

  LinearCtx<float> ctx;
  std::vector<uint8_t> weight_gate;
  std::vector<uint8_t> act_gate;

  void init(const std::string& n, int64_t in_f, int64_t out_f, Rng& rng) {
    name = n;
    weight = Tensor({out_f, in_f});
    he_normal_init(weight, rng);
    bias = Tensor({out_f});
  }

  Tensor forward(const Tensor& input, bool quantized) {
    Tensor x = input;
    act_gate.clear();
    if (quantized && act_site.enabled()) {
      if (act_site.warm) detail::observe_max(act_site, input);
      LevelSet ls = build_level_set(act_site.cfg, act_site.current_alpha());
      x = quantize_tensor(input, ls, &act_gate);
    }
    Tensor w_eff = weight;
    weight_gate.clear();
    if (quantized && weight_quant.bits < 32) {
      const double alpha = compute_clip_threshold(weight, weight_quant.clip, weight_quant.percentile_q);
      LevelSet ls = build_level_set(weight_quant, alpha);
      w_eff = quantize_tensor(weight, ls, &weight_gate);
    }
    return linear_forward(x, w_eff, bias, &ctx);
  }

  Tensor backward(const Tensor& upstream) {
    auto [gin, gw, gb] = linear_backward(ctx, upstream);
    weight.ensure_grad();
    bias.ensure_grad();
    if (!weight_gate.empty()) {
      for (size_t i = 0; i < gw.data.size(); ++i) {
        if (weight_gate[i]) weight.grad[i] += gw.data[i];
      }
    } else {
      for (size_t i = 0; i < gw.data.size(); ++i) weight.grad[i] += gw.data[i];
    }
    for (size_t i = 0; i < gb.data.size(); ++i) bias.grad[i] += gb.data[i];
    if (!act_gate.empty()) {
      for (size_t i = 0; i < gin.data.size(); ++i) {
        if (!act_gate[i]) gin.data[i] = 0.0f;
      }
    }
    return gin;
  }
};

struct ParamRef {
  std::string name;
  Tensor* value = nullptr;
  OptimState<float>* state = nullptr;
};

class Model {
 public:
  virtual ~Model() = default;

  virtual Tensor forward(const Tensor& images, bool quantized) = 0;
  virtual void backward(const Tensor& grad_logits) = 0;
  virtual std::string arch_name() const = 0;
  virtual int image_size() const = 0;
  virtual std::vector<ConvUnit*> conv_units() = 0;
  virtual LinearUnit* head() = 0;

  bool record_outputs = false;

  std::vector<ParamRef> params() {
    std::vector<ParamRef> out;
    for (ConvUnit* c : conv_units()) {
      out.push_back({c->name + ".weight", &c->weight, &c->weight_state});
      out.push_back({c->name + ".bias", &c->bias, &c->bias_state});
    }
    LinearUnit* h = head();
    out.push_back({h->name + ".weight", &h->weight, &h->weight_state});
    out.push_back({h->name + ".bias", &h->bias, &h->bias_state});
    return out;
  }

  void zero_grad() {
    for (auto& p : params()) {
      p.value->ensure_grad();
      p.value->zero_grad();
    }
  }

  void sgd_update(double lr, double momentum, double weight_decay) {
    for (auto& p : params()) {
      p.state->lr = static_cast<float>(lr);
      p.state->momentum = static_cast<float>(momentum);
      p.state->weight_decay = static_cast<float>(weight_decay);
      sgd_step(*p.value, *p.state);
    }
    // pruned-and-frozen filters are a fixed point of the update
    for (ConvUnit* c : conv_units()) {
      if (c->zero_grad_masked && c->masked()) apply_mask(c->weight, &c->bias, c->mask);
    }
  }

  void configure_quant(const QuantSpec& spec) {
    auto convs = conv_units();
    for (size_t i = 0; i < convs.size(); ++i) {
      const bool edge = convs[i]->edge_layer;
      convs[i]->weight_quant = spec.weight_for(edge);
      convs[i]->act_site.cfg = spec.act_for(edge);
    }
    LinearUnit* h = head();
    h->weight_quant = spec.weight_for(true);
    h->act_site.cfg = spec.act_for(true);
  }

  void freeze_act_alphas() {
    for (ConvUnit* c : conv_units()) c->act_site.freeze();
    head()->act_site.freeze();
  }

  double pruned_fraction() {
    int64_t filters = 0, pruned = 0;
    for (ConvUnit* c : conv_units()) {
      filters += c->weight.shape[0];
      pruned += c->mask.keep.empty() ? 0 : c->mask.pruned_count;
    }
    return filters == 0 ? 0.0 : static_cast<double>(pruned) / static_cast<double>(filters);
  }

  Checkpoint to_checkpoint() {
    Checkpoint ck;
    for (ConvUnit* c : conv_units()) {
      CheckpointEntry w;
      w.name = c->name + ".weight";
      w.tensor = c->weight;
      w.tensor.grad.clear();
      if (!c->mask.keep.empty()) {
        w.has_mask = true;
        w.mask = c->mask.keep;
      }
      ck.entries.push_back(std::move(w));
      CheckpointEntry b;
      b.name = c->name + ".bias";
      b.tensor = c->bias;
      b.tensor.grad.clear();
      ck.entries.push_back(std::move(b));
      if (c->act_site.enabled() && !c->act_site.warm) {
        CheckpointEntry a;
        a.name = "quant.alpha." + c->name;
        a.tensor = Tensor({1}, {static_cast<float>(c->act_site.alpha)});
        ck.entries.push_back(std::move(a));
      }
    }
    LinearUnit* h = head();
    CheckpointEntry w;
    w.name = h->name + ".weight";
    w.tensor = h->weight;
    w.tensor.grad.clear();
    ck.entries.push_back(std::move(w));
    CheckpointEntry b;
    b.name = h->name + ".bias";
    b.tensor = h->bias;
    b.tensor.grad.clear();
    ck.entries.push_back(std::move(b));
    if (h->act_site.enabled() && !h->act_site.warm) {
      CheckpointEntry a;
      a.name = "quant.alpha." + h->name;
      a.tensor = Tensor({1}, {static_cast<float>(h->act_site.alpha)});
      ck.entries.push_back(std::move(a));
    }
    return ck;
  }

  /// Restores parameters, masks (as frozen zero_grad masks) and frozen
  /// activation thresholds by name.
  void load_from_checkpoint(const Checkpoint& ck, bool masks_zero_grad) {
    for (auto& p : params()) {
      const CheckpointEntry* e = ck.find(p.name);
      if (!e) throw std::runtime_error("checkpoint: missing entry " + p.name);
      if (e->tensor.shape != p.value->shape) {
        throw std::runtime_error("checkpoint: shape mismatch for " + p.name + ": file has " +
                                 shape_str(e->tensor.shape) + ", model wants " + shape_str(p.value->shape));
      }
      p.value->data = e->tensor.data;
      p.state->velocity = Tensor();
    }
    for (ConvUnit* c : conv_units()) {
      const CheckpointEntry* e = ck.find(c->name + ".weight");
      if (e && e->has_mask) {
        PruneMask m;
        m.keep = e->mask;
        m.pruned_count = static_cast<int>(std::count(e->mask.begin(), e->mask.end(), uint8_t(0)));
        c->set_mask(m, masks_zero_grad);
      }
      const CheckpointEntry* a = ck.find("quant.alpha." + c->name);
      if (a && !a->tensor.data.empty()) {
        c->act_site.running_max = a->tensor.data[0];
        c->act_site.freeze();
      }
    }
    LinearUnit* h = head();
    const CheckpointEntry* a = ck.find("quant.alpha." + h->name);
    if (a && !a->tensor.data.empty()) {
      h->act_site.running_max = a->tensor.data[0];
      h->act_site.freeze();
    }
  }
};

/// 2 conv + fc.
class DeskNetS : public Model {
 public:
  DeskNetS(int image, uint64_t seed) : image_(image) {
    Rng rng(seed);
    conv1_.init("conv1", 3, 8, 3, 1, 1, rng);
    conv1_.edge_layer = true;
    conv2_.init("conv2", 8, 16, 3, 1, 1, rng);
    fc_.init("fc", 16, 10, rng);
  }

  Tensor forward(const Tensor& images, bool quantized) override {
    Tensor t = conv1_.forward(images, quantized, record_outputs);
    t = relu_forward(t, &r1_);
    t = conv2_.forward(t, quantized, record_outputs);
    t = relu_forward(t, &r2_);
    t = global_avg_pool_forward(t, &gap_);
    return fc_.forward(t, quantized);
  }

  void backward(const Tensor& grad_logits) override {
    Tensor g = fc_.backward(grad_logits);
    g = global_avg_pool_backward(gap_, g);
    g = relu_backward(r2_, g);
    g = conv2_.backward(g);
    g = relu_backward(r1_, g);
    conv1_.backward(g);
  }

  std::string arch_name() const override { return "desknet-s"; }
  int image_size() const override { return image_; }
  std::vector<ConvUnit*> conv_units() override { return {&conv1_, &conv2_}; }
  LinearUnit* head() override { return &fc_; }

 private:
  int image_;
  ConvUnit conv1_, conv2_;
  LinearUnit fc_;
  ReluCtx<float> r1_, r2_;
  GapCtx<float> gap_;
};

/// 3-stage residual net, one conv-conv block per stage, channels 8/16/32,
/// 1x1 projection shortcuts at the striding stages. No batch norm.
class DeskNetR8 : public Model {
 public:
  DeskNetR8(int image, uint64_t seed) : image_(image) {
    Rng rng(seed);
    conv1_.init("conv1", 3, 8, 3, 1, 1, rng);
    conv1_.edge_layer = true;
    stages_[0].a.init("s1.conv_a", 8, 8, 3, 1, 1, rng);
    stages_[0].b.init("s1.conv_b", 8, 8, 3, 1, 1, rng);
    stages_[0].has_proj = false;
    stages_[1].a.init("s2.conv_a", 8, 16, 3, 2, 1, rng);
    stages_[1].b.init("s2.conv_b", 16, 16, 3, 1, 1, rng);
    stages_[1].proj.init("s2.proj", 8, 16, 1, 2, 0, rng);
    stages_[1].has_proj = true;
    stages_[2].a.init("s3.conv_a", 16, 32, 3, 2, 1, rng);
    stages_[2].b.init("s3.conv_b", 32, 32, 3, 1, 1, rng);
    stages_[2].proj.init("s3.proj", 16, 32, 1, 2, 0, rng);
    stages_[2].has_proj = true;
    fc_.init("fc", 32, 10, rng);
  }

  Tensor forward(const Tensor& images, bool quantized) override {
    Tensor t = conv1_.forward(images, quantized, record_outputs);
    t = relu_forward(t, &r_conv1_);
    for (auto& s : stages_) {
      Tensor u = s.a.forward(t, quantized, record_outputs);
      u = relu_forward(u, &s.r_mid);
      Tensor v = s.b.forward(u, quantized, record_outputs);
      Tensor sc = s.has_proj ? s.proj.forward(t, quantized, record_outputs) : t;
      if (v.shape != sc.shape) {
        throw std::logic_error("residual add shape mismatch: " + shape_str(v.shape) + " vs " + shape_str(sc.shape));
      }
      for (size_t i = 0; i < v.data.size(); ++i) v.data[i] += sc.data[i];
      t = relu_forward(v, &s.r_out);
    }
    t = global_avg_pool_forward(t, &gap_);
    return fc_.forward(t, quantized);
  }

  void backward(const Tensor& grad_logits) override {
    Tensor g = fc_.backward(grad_logits);
    g = global_avg_pool_backward(gap_, g);
    for (int i = 2; i >= 0; --i) {
      auto& s = stages_[static_cast<size_t>(i)];
      g = relu_backward(s.r_out, g);  // grad of the residual sum, fans out to both branches
      Tensor gu = s.b.backward(g);
      gu = relu_backward(s.r_mid, gu);
      Tensor g_main = s.a.backward(gu);
      Tensor g_short = s.has_proj ? s.proj.backward(g) : g;
      for (size_t k = 0; k < g_main.data.size(); ++k) g_main.data[k] += g_short.data[k];
      g = std::move(g_main);
    }
    g = relu_backward(r_conv1_, g);
    conv1_.backward(g);
  }

  std::string arch_name() const override { return "desknet-r8"; }
  int image_size() const override { return image_; }

  std::vector<ConvUnit*> conv_units() override {
    return {&conv1_,         &stages_[0].a, &stages_[0].b, &stages_[1].a, &stages_[1].b,
            &stages_[1].proj, &stages_[2].a, &stages_[2].b, &stages_[2].proj};
  }
  LinearUnit* head() override { return &fc_; }

 private:
  struct Stage {
    ConvUnit a, b, proj;
    bool has_proj = false;
    ReluCtx<float> r_mid, r_out;
  };

  int image_;
  ConvUnit conv1_;
  Stage stages_[3];
  LinearUnit fc_;
  ReluCtx<float> r_conv1_;
  GapCtx<float> gap_;
};

inline std::unique_ptr<Model> make_model(const std::string& arch, int image, uint64_t seed) {
  if (arch == "desknet-s") return std::make_unique<DeskNetS>(image, seed);
  if (arch == "desknet-r8") return std::make_unique<DeskNetR8>(image, seed);
  throw std::invalid_argument("unknown trainable model '" + arch + "'; valid: desknet-s, desknet-r8");
}

}  // namespace pqc
