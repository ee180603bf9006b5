#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

// Static architecture analysis: storage bits and BOPs for a layer stack under
// a bit-width / pruning policy.
//
//   size = sum_i |W_i|_eff * weight_bits(i)
//   bops = sum_i MACs_eff(i) * weight_bits(i) * act_in_bits(i)
//
// Pruning is accounted as structure removal: a pruned output filter drops its
// row and the matching input channel of every consumer, with per-dimension
// counts kept as dim - floor(rate * dim). The training pipelines use soft
// masks of the same census, so the two views agree on counts.

namespace pqc {

enum class LayerKind { conv, fc };

struct LayerSpec {
  std::string name;
  LayerKind kind = LayerKind::conv;
  int64_t in_ch = 0;
  int64_t out_ch = 0;
  int kernel_h = 1;
  int kernel_w = 1;
  int64_t out_h = 1;
  int64_t out_w = 1;
  bool has_bias = false;
  int producer = -1;  // index of the layer feeding this one; -1 = network input

  // policy-resolved fields
  int weight_bits = 32;
  int act_in_bits = 32;
  double prune_rate_out = 0.0;
  double prune_rate_in = 0.0;

  int64_t param_count() const {
    return out_ch * in_ch * kernel_h * kernel_w + (has_bias ? out_ch : 0);
  }
  int64_t macs() const { return out_h * out_w * out_ch * in_ch * kernel_h * kernel_w; }
};

struct ResidualLink {
  int source_layer = -1;  // layer whose output joins the sum
  int into_layer = -1;    // layer whose output it is summed with
};

struct ArchDescriptor {
  std::string name;
  int64_t input_channels = 3;
  std::vector<LayerSpec> layers;
  std::vector<ResidualLink> residual_links;

  void validate() const {
    for (size_t i = 0; i < layers.size(); ++i) {
      const LayerSpec& l = layers[i];
      const int64_t feed = l.producer < 0 ? input_channels : layers.at(static_cast<size_t>(l.producer)).out_ch;
      if (l.in_ch != feed) {
        throw std::invalid_argument("arch " + name + ": layer " + l.name + " expects " +
                                    std::to_string(l.in_ch) + " input channels but its producer provides " +
                                    std::to_string(feed));
      }
      if (l.producer >= static_cast<int>(i)) {
        throw std::invalid_argument("arch " + name + ": layer " + l.name + " has a non-causal producer");
      }
    }
    for (const ResidualLink& r : residual_links) {
      const auto& src = layers.at(static_cast<size_t>(r.source_layer));
      const auto& dst = layers.at(static_cast<size_t>(r.into_layer));
      if (src.out_ch != dst.out_ch) {
        throw std::invalid_argument("arch " + name + ": residual sum of " + src.name + " and " + dst.name +
                                    " mixes " + std::to_string(src.out_ch) + " and " +
                                    std::to_string(dst.out_ch) + " channels");
      }
    }
  }

  int64_t total_params() const {
    int64_t n = 0;
    for (const auto& l : layers) n += l.param_count();
    return n;
  }
};

/// Uniform policy description. Conv filters are pruned at `prune_rate`
/// (fc layers never are); pruned outputs remove the matching input channels
/// of every consumer. First and last layers carry `first_last_bits`.
struct CompressionPolicy {
  int body_bits = 4;
  int first_last_bits = 8;
  int input_act_bits = 8;  // activations feeding the first layer (image data)
  double prune_rate = 0.0;
  std::map<std::string, double> prune_rate_overrides;  // per conv layer, by name

  static CompressionPolicy baseline32() {
    CompressionPolicy p;
    p.body_bits = 32;
    p.first_last_bits = 32;
    p.input_act_bits = 32;
    p.prune_rate = 0.0;
    return p;
  }

  static CompressionPolicy reference_default() {
    CompressionPolicy p;
    p.body_bits = 4;
    p.first_last_bits = 8;
    p.input_act_bits = 8;
    p.prune_rate = 0.3;
    return p;
  }
};

inline int64_t kept_count(int64_t dim, double rate) {
  return dim - static_cast<int64_t>(std::floor(rate * static_cast<double>(dim)));
}

/// Fills the policy-resolved fields of every layer.
inline ArchDescriptor apply_policy(const ArchDescriptor& arch, const CompressionPolicy& policy) {
  arch.validate();
  if (policy.prune_rate < 0.0 || policy.prune_rate >= 1.0) {
    throw std::invalid_argument("policy: prune rate must be in [0, 1)");
  }
  ArchDescriptor out = arch;
  const size_t last = out.layers.size() - 1;
  for (size_t i = 0; i < out.layers.size(); ++i) {
    LayerSpec& l = out.layers[i];
    const bool edge = (i == 0 || i == last);
    l.weight_bits = edge ? policy.first_last_bits : policy.body_bits;
    l.act_in_bits = (i == 0)      ? policy.input_act_bits
                    : (i == last) ? policy.first_last_bits
                                  : policy.body_bits;
    l.prune_rate_out = (l.kind == LayerKind::conv) ? policy.prune_rate : 0.0;
    if (auto it = policy.prune_rate_overrides.find(l.name); it != policy.prune_rate_overrides.end()) {
      if (l.kind != LayerKind::conv) {
        throw std::invalid_argument("policy: fc layer " + l.name + " cannot be pruned");
      }
      l.prune_rate_out = it->second;
    }
    l.prune_rate_in = l.producer < 0 ? 0.0 : out.layers[static_cast<size_t>(l.producer)].prune_rate_out;
  }
  return out;
}

inline int64_t effective_params(const LayerSpec& l) {
  const int64_t ko = kept_count(l.out_ch, l.prune_rate_out);
  const int64_t ki = kept_count(l.in_ch, l.prune_rate_in);
  return ko * ki * l.kernel_h * l.kernel_w + (l.has_bias ? ko : 0);
}

inline int64_t effective_macs(const LayerSpec& l) {
  const int64_t ko = kept_count(l.out_ch, l.prune_rate_out);
  const int64_t ki = kept_count(l.in_ch, l.prune_rate_in);
  return l.out_h * l.out_w * ko * ki * l.kernel_h * l.kernel_w;
}

/// Total bits to store the weights under a resolved policy.
inline int64_t model_size_bits(const ArchDescriptor& arch, const CompressionPolicy& policy) {
  const ArchDescriptor r = apply_policy(arch, policy);
  int64_t bits = 0;
  for (const auto& l : r.layers) bits += effective_params(l) * l.weight_bits;
  return bits;
}

inline int64_t bops(const ArchDescriptor& arch, const CompressionPolicy& policy) {
  const ArchDescriptor r = apply_policy(arch, policy);
  int64_t total = 0;
  for (const auto& l : r.layers) total += effective_macs(l) * l.weight_bits * l.act_in_bits;
  return total;
}

struct LayerReport {
  std::string name;
  int64_t params = 0;
  int64_t params_effective = 0;
  int64_t macs = 0;
  int64_t macs_effective = 0;
  int weight_bits = 32;
  int act_in_bits = 32;
  double survival_out = 1.0;
  double survival_in = 1.0;
  int64_t size_bits_baseline = 0;
  int64_t size_bits_compressed = 0;
  int64_t bops_baseline = 0;
  int64_t bops_compressed = 0;
};

struct CompressionReport {
  int64_t size_bits_baseline = 0;
  int64_t size_bits_compressed = 0;
  int64_t bops_baseline = 0;
  int64_t bops_compressed = 0;
  double size_ratio = 1.0;
  double bops_ratio = 1.0;
  std::vector<LayerReport> layers;
};

inline CompressionReport compression_report(const ArchDescriptor& arch,
                                            const CompressionPolicy& baseline,
                                            const CompressionPolicy& compressed) {
  const ArchDescriptor rb = apply_policy(arch, baseline);
  const ArchDescriptor rc = apply_policy(arch, compressed);
  CompressionReport rep;
  for (size_t i = 0; i < arch.layers.size(); ++i) {
    const LayerSpec& lb = rb.layers[i];
    const LayerSpec& lc = rc.layers[i];
    LayerReport row;
    row.name = lc.name;
    row.params = lb.param_count();
    row.params_effective = effective_params(lc);
    row.macs = lb.macs();
    row.macs_effective = effective_macs(lc);
    row.weight_bits = lc.weight_bits;
    row.act_in_bits = lc.act_in_bits;
    row.survival_out = static_cast<double>(kept_count(lc.out_ch, lc.prune_rate_out)) /
                       static_cast<double>(lc.out_ch);
    row.survival_in = static_cast<double>(kept_count(lc.in_ch, lc.prune_rate_in)) /
                      static_cast<double>(lc.in_ch);
    row.size_bits_baseline = effective_params(lb) * lb.weight_bits;
    row.size_bits_compressed = effective_params(lc) * lc.weight_bits;
    row.bops_baseline = effective_macs(lb) * lb.weight_bits * lb.act_in_bits;
    row.bops_compressed = effective_macs(lc) * lc.weight_bits * lc.act_in_bits;
    rep.size_bits_baseline += row.size_bits_baseline;
    rep.size_bits_compressed += row.size_bits_compressed;
    rep.bops_baseline += row.bops_baseline;
    rep.bops_compressed += row.bops_compressed;
    rep.layers.push_back(std::move(row));
  }
  rep.size_ratio = static_cast<double>(rep.size_bits_baseline) / static_cast<double>(rep.size_bits_compressed);
  rep.bops_ratio = static_cast<double>(rep.bops_baseline) / static_cast<double>(rep.bops_compressed);
  return rep;
}

namespace detail {

inline LayerSpec conv_spec(std::string name, int64_t in_ch, int64_t out_ch, int k, int64_t out_hw,
                           bool bias, int producer) {
  LayerSpec l;
  l.name = std::move(name);
  l.kind = LayerKind::conv;
  l.in_ch = in_ch;
  l.out_ch = out_ch;
  l.kernel_h = l.kernel_w = k;
  l.out_h = l.out_w = out_hw;
  l.has_bias = bias;
  l.producer = producer;
  return l;
}

inline LayerSpec fc_spec(std::string name, int64_t in_ch, int64_t out_ch, int producer) {
  LayerSpec l;
  l.name = std::move(name);
  l.kind = LayerKind::fc;
  l.in_ch = in_ch;
  l.out_ch = out_ch;
  l.has_bias = true;
  l.producer = producer;
  return l;
}

// CIFAR ResNet: conv1 + 3 stages of (depth-2)/6 basic blocks at 16/32/64
// channels, 1x1 projection shortcuts at stage transitions, global pool, fc.
// Convs carry no bias (folded into the fc-only bias convention that matches
// the reference sizes).
inline ArchDescriptor make_resnet_cifar(int depth) {
  if ((depth - 2) % 6 != 0) throw std::invalid_argument("resnet depth must be 6n+2");
  const int blocks = (depth - 2) / 6;
  ArchDescriptor a;
  a.name = "resnet" + std::to_string(depth);
  a.input_channels = 3;
  a.layers.push_back(conv_spec("conv1", 3, 16, 3, 32, false, -1));
  int stream = 0;  // index of the layer providing the running residual stream
  const int64_t chans[3] = {16, 32, 64};
  const int64_t spatial[3] = {32, 16, 8};
  for (int s = 0; s < 3; ++s) {
    for (int b = 0; b < blocks; ++b) {
      const bool transition = (s > 0 && b == 0);
      const int64_t in_ch = transition ? chans[s - 1] : chans[s];
      const std::string base = "s" + std::to_string(s + 1) + "b" + std::to_string(b + 1);
      a.layers.push_back(conv_spec(base + ".conv_a", in_ch, chans[s], 3, spatial[s], false, stream));
      const int conv_a = static_cast<int>(a.layers.size()) - 1;
      a.layers.push_back(conv_spec(base + ".conv_b", chans[s], chans[s], 3, spatial[s], false, conv_a));
      const int conv_b = static_cast<int>(a.layers.size()) - 1;
      int shortcut = stream;
      if (transition) {
        a.layers.push_back(conv_spec(base + ".proj", in_ch, chans[s], 1, spatial[s], false, stream));
        shortcut = static_cast<int>(a.layers.size()) - 1;
      }
      a.residual_links.push_back(ResidualLink{shortcut, conv_b});
      stream = conv_b;
    }
  }
  a.layers.push_back(fc_spec("fc", 64, 10, stream));
  a.validate();
  return a;
}

// CIFAR VGG-16: the standard 13-conv stack with a 512-512-10 classifier.
inline ArchDescriptor make_vgg16_cifar() {
  ArchDescriptor a;
  a.name = "vgg16";
  a.input_channels = 3;
  const int64_t plan[5][2] = {{64, 2}, {128, 2}, {256, 3}, {512, 3}, {512, 3}};
  int64_t spatial = 32;
  int64_t in_ch = 3;
  int producer = -1;
  int conv_idx = 0;
  for (const auto& stage : plan) {
    for (int64_t i = 0; i < stage[1]; ++i) {
      a.layers.push_back(conv_spec("conv" + std::to_string(++conv_idx), in_ch, stage[0], 3, spatial, false, producer));
      producer = static_cast<int>(a.layers.size()) - 1;
      in_ch = stage[0];
    }
    spatial /= 2;  // max-pool between stages
  }
  a.layers.push_back(fc_spec("fc1", 512, 512, producer));
  a.layers.push_back(fc_spec("fc2", 512, 10, static_cast<int>(a.layers.size()) - 1));
  a.validate();
  return a;
}

// Desk-scale models trained by the pipelines; descriptors assume the default
// 8x8 synthetic inputs.
inline ArchDescriptor make_desknet_s(int64_t image = 8) {
  ArchDescriptor a;
  a.name = "desknet-s";
  a.input_channels = 3;
  a.layers.push_back(conv_spec("conv1", 3, 8, 3, image, true, -1));
  a.layers.push_back(conv_spec("conv2", 8, 16, 3, image, true, 0));
  a.layers.push_back(fc_spec("fc", 16, 10, 1));
  a.validate();
  return a;
}

inline ArchDescriptor make_desknet_r8(int64_t image = 8) {
  ArchDescriptor a;
  a.name = "desknet-r8";
  a.input_channels = 3;
  a.layers.push_back(conv_spec("conv1", 3, 8, 3, image, true, -1));
  a.layers.push_back(conv_spec("s1.conv_a", 8, 8, 3, image, true, 0));
  a.layers.push_back(conv_spec("s1.conv_b", 8, 8, 3, image, true, 1));
  a.residual_links.push_back(ResidualLink{0, 2});
  a.layers.push_back(conv_spec("s2.conv_a", 8, 16, 3, image / 2, true, 2));
  a.layers.push_back(conv_spec("s2.conv_b", 16, 16, 3, image / 2, true, 3));
  a.layers.push_back(conv_spec("s2.proj", 8, 16, 1, image / 2, true, 2));
  a.residual_links.push_back(ResidualLink{5, 4});
  a.layers.push_back(conv_spec("s3.conv_a", 16, 32, 3, image / 4, true, 4));
  a.layers.push_back(conv_spec("s3.conv_b", 32, 32, 3, image / 4, true, 6));
  a.layers.push_back(conv_spec("s3.proj", 16, 32, 1, image / 4, true, 4));
  a.residual_links.push_back(ResidualLink{8, 7});
  a.layers.push_back(fc_spec("fc", 32, 10, 7));
  a.validate();
  return a;
}

}  // namespace detail

inline ArchDescriptor builtin_arch(const std::string& name) {
  if (name == "resnet20") return detail::make_resnet_cifar(20);
  if (name == "resnet32") return detail::make_resnet_cifar(32);
  if (name == "resnet56") return detail::make_resnet_cifar(56);
  if (name == "resnet110") return detail::make_resnet_cifar(110);
  if (name == "vgg16") return detail::make_vgg16_cifar();
  if (name == "desknet-s") return detail::make_desknet_s();
  if (name == "desknet-r8") return detail::make_desknet_r8();
  throw std::invalid_argument(
      "unknown architecture '" + name +
      "'; valid names: resnet20, resnet32, resnet56, resnet110, vgg16, desknet-s, desknet-r8");
}

}  // namespace pqc
