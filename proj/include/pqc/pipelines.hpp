#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pqc/checkpoint.hpp"
#include "pqc/data.hpp"
#include "pqc/gm_prune.hpp"
#include "pqc/model.hpp"
#include "pqc/ops.hpp"

// Training pipelines:
//   baseline - full-precision training with the plateau LR schedule
//   SPQ      - quantized forward every iteration, GM masks re-selected from
//              the full-precision shadows at every epoch end; pruned filters
//              keep receiving updates
//   PPQ      - staged permanent pruning (gradients zeroed) at full precision,
//              then quantization-aware training of the pruned model at a
//              reduced learning rate

namespace pqc {

struct TrainConfig {
  int epochs_prune = 30;  // n
  int epochs_quant = 15;  // m
  int stages = 2;         // s
  std::vector<double> prune_rates = {0.15, 0.30};  // cumulative; back() is p_max

  double lr0 = 0.1;
  double lr_quant = 0.01;
  double lr_decay = 0.9;
  int plateau_window = 3;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  int batch_size = 128;
  uint64_t seed = 42;
  double val_fraction = 0.1;
  bool augment_flip = false;  // seeded horizontal flips on training batches

  QuantSpec quant;
  std::string arch = "desknet-r8";

  double prune_rate_max() const { return prune_rates.empty() ? 0.0 : prune_rates.back(); }

  void validate() const {
    if (epochs_prune < 0 || epochs_quant < 0) throw std::invalid_argument("config: negative epoch count");
    if (stages < 1) throw std::invalid_argument("config: stages must be >= 1");
    if (prune_rates.empty()) throw std::invalid_argument("config: prune_rates must not be empty");
    for (size_t i = 0; i < prune_rates.size(); ++i) {
      if (prune_rates[i] < 0.0) throw std::invalid_argument("config: negative prune rate");
      if (i > 0 && prune_rates[i] < prune_rates[i - 1]) {
        throw std::invalid_argument("config: prune_rates must be nondecreasing");
      }
    }
    if (prune_rate_max() >= 1.0) throw std::invalid_argument("config: p_max must be < 1");
    if (batch_size < 1) throw std::invalid_argument("config: batch_size must be >= 1");
    if (plateau_window < 1) throw std::invalid_argument("config: plateau_window must be >= 1");
    if (quant.weight.bits < 32) quant.weight.validate();
    if (quant.act.bits < 32) quant.act.validate();
    if (quant.act.signed_values) {
      throw std::invalid_argument("config: activation quantization must be unsigned (post-ReLU values)");
    }
  }
};

struct EpochRecord {
  int epoch = 0;
  std::string phase;  // baseline | spq | ppq-prune | ppq-qat
  double train_acc = 0.0;
  double eval_acc = 0.0;
  double lr = 0.0;
  double pruned_fraction = 0.0;
  int stage = 0;
  // SPQ telemetry: some filter masked in the previous epoch carried nonzero
  // shadow weights when this epoch ended (pruned weights kept updating)
  bool pruned_weights_updated = false;
};

/// Plateau rule: an epoch improves when its accuracy exceeds the best seen so
/// far (the first epoch only sets the baseline). After `window` consecutive
/// non-improving epochs the rate decays and the streak resets. The rate never
/// increases.
struct LrState {
  double lr = 0.1;
  double decay = 0.9;
  int window = 3;
  double best = 0.0;
  int streak = 0;
  bool any = false;

  double update(double eval_acc) {
    const bool improved = any && eval_acc > best;
    best = any ? std::max(best, eval_acc) : eval_acc;
    any = true;
    if (improved) {
      streak = 0;
    } else if (++streak >= window) {
      lr *= decay;
      streak = 0;
    }
    return lr;
  }
};

/// Pure replay of the plateau rule over a full accuracy history.
inline double lr_from_history(double lr0, double decay, int window, std::span<const double> history) {
  if (history.empty()) throw std::invalid_argument("lr_from_history: history must be nonempty");
  LrState st;
  st.lr = lr0;
  st.decay = decay;
  st.window = window;
  double lr = lr0;
  for (double acc : history) lr = st.update(acc);
  return lr;
}

struct MaskCensusRow {
  std::string layer;
  int64_t filters = 0;
  int64_t pruned = 0;
};

struct RunResult {
  std::vector<EpochRecord> records;
  Checkpoint checkpoint;
  double final_train_acc = 0.0;
  double final_eval_acc = 0.0;
  std::vector<MaskCensusRow> mask_census;
};

/// Per-epoch observation hook for tests and progress printing.
using EpochObserver = std::function<void(const EpochRecord&, Model&)>;

/// SPQ-only hook that fires after the epoch's updates but before the
/// epoch-end mask re-selection, while the shadow weights still carry the
/// drift accumulated by pruned filters.
using PrePruneHook = std::function<void(int epoch, Model&)>;

inline double evaluate(Model& model, const Dataset& data, bool quantized, int batch_size = 128) {
  if (data.size() == 0) throw std::invalid_argument("evaluate: empty dataset");
  int64_t correct = 0;
  for (int64_t at = 0; at < data.size(); at += batch_size) {
    std::vector<int64_t> idx;
    for (int64_t i = at; i < std::min(data.size(), at + batch_size); ++i) idx.push_back(i);
    Tensor logits = model.forward(data.batch_images(idx), quantized);
    const std::vector<int> labels = data.batch_labels(idx);
    const int64_t classes = logits.shape[1];
    for (size_t r = 0; r < idx.size(); ++r) {
      const float* row = logits.data.data() + static_cast<int64_t>(r) * classes;
      int best = 0;
      for (int64_t c = 1; c < classes; ++c) {
        if (row[c] > row[best]) best = static_cast<int>(c);
      }
      if (best == labels[r]) ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

/// One observation pass to seed the activation clip thresholds, then freeze.
/// Used when evaluating a checkpoint that carries no stored thresholds.
inline void calibrate_act_alphas(Model& model, const Dataset& data, int batch_size = 128) {
  for (int64_t at = 0; at < data.size(); at += batch_size) {
    std::vector<int64_t> idx;
    for (int64_t i = at; i < std::min(data.size(), at + batch_size); ++i) idx.push_back(i);
    model.forward(data.batch_images(idx), /*quantized=*/true);
  }
  model.freeze_act_alphas();
}

namespace detail {

inline std::vector<std::vector<int64_t>> epoch_batches(int64_t n, int batch_size, uint64_t seed, int epoch) {
  std::vector<int64_t> order(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
  Rng rng(seed * 0x9e3779b9ULL + static_cast<uint64_t>(epoch) + 1);
  rng.shuffle(order.begin(), order.end());
  std::vector<std::vector<int64_t>> batches;
  for (int64_t at = 0; at < n; at += batch_size) {  // ceil(|D| / BS) batches
    batches.emplace_back(order.begin() + at, order.begin() + std::min<int64_t>(n, at + batch_size));
  }
  return batches;
}

inline void flip_horizontal(Tensor& images, Rng& rng) {
  const int64_t n = images.shape[0], c = images.shape[1], h = images.shape[2], w = images.shape[3];
  for (int64_t i = 0; i < n; ++i) {
    if (rng.uniform() < 0.5) continue;
    for (int64_t ch = 0; ch < c; ++ch) {
      float* plane = images.data.data() + (i * c + ch) * h * w;
      for (int64_t y = 0; y < h; ++y) {
        for (int64_t x = 0; x < w / 2; ++x) std::swap(plane[y * w + x], plane[y * w + (w - 1 - x)]);
      }
    }
  }
}

/// One epoch of SGD. Returns the running train accuracy over the epoch.
inline double train_epoch(Model& model, const Dataset& train, const TrainConfig& cfg, double lr,
                          bool quantized, int epoch) {
  const auto batches = epoch_batches(train.size(), cfg.batch_size, cfg.seed, epoch);
  Rng flip_rng(cfg.seed * 0x51ed2701ULL + static_cast<uint64_t>(epoch));
  int64_t correct = 0;
  for (const auto& idx : batches) {
    Tensor images = train.batch_images(idx);
    if (cfg.augment_flip) flip_horizontal(images, flip_rng);
    const std::vector<int> labels = train.batch_labels(idx);
    model.zero_grad();
    Tensor logits = model.forward(images, quantized);
    check_finite(logits, "logits");
    const int64_t classes = logits.shape[1];
    for (size_t r = 0; r < idx.size(); ++r) {
      const float* row = logits.data.data() + static_cast<int64_t>(r) * classes;
      int best = 0;
      for (int64_t c = 1; c < classes; ++c) {
        if (row[c] > row[best]) best = static_cast<int>(c);
      }
      if (best == labels[r]) ++correct;
    }
    auto [loss, grad] = softmax_cross_entropy(logits, labels);
    model.backward(grad);
    model.sgd_update(lr, cfg.momentum, cfg.weight_decay);
  }
  for (auto& p : model.params()) check_finite(*p.value, p.name);
  return static_cast<double>(correct) / static_cast<double>(train.size());
}

inline std::vector<MaskCensusRow> mask_census(Model& model) {
  std::vector<MaskCensusRow> rows;
  for (ConvUnit* c : model.conv_units()) {
    MaskCensusRow row;
    row.layer = c->name;
    row.filters = c->weight.shape[0];
    row.pruned = c->mask.keep.empty() ? 0 : c->mask.pruned_count;
    rows.push_back(std::move(row));
  }
  return rows;
}

inline void warn_single_filter(const ConvUnit& c) {
  std::fprintf(stderr, "[pqc] warning: layer %s has a single filter; pruning skipped\n", c.name.c_str());
}

}  // namespace detail

inline RunResult train_baseline(Model& model, const Dataset& data, const TrainConfig& cfg,
                                const EpochObserver& observer = {}) {
  cfg.validate();
  if (data.size() == 0) throw std::invalid_argument("train_baseline: empty dataset");
  auto [train_idx, val_idx] = split_train_val(data.size(), cfg.val_fraction, cfg.seed);
  const Dataset train = subset(data, train_idx, Split::train);
  const Dataset val = subset(data, val_idx, Split::val);

  RunResult result;
  LrState lr_state{cfg.lr0, cfg.lr_decay, cfg.plateau_window};
  double lr = cfg.lr0;
  for (int epoch = 0; epoch < cfg.epochs_prune; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    rec.phase = "baseline";
    rec.lr = lr;
    rec.train_acc = detail::train_epoch(model, train, cfg, lr, /*quantized=*/false, epoch);
    rec.eval_acc = evaluate(model, val.size() > 0 ? val : train, /*quantized=*/false, cfg.batch_size);
    lr = lr_state.update(rec.eval_acc);
    result.records.push_back(rec);
    if (observer) observer(rec, model);
  }
  result.final_train_acc = result.records.empty() ? 0.0 : result.records.back().train_acc;
  result.final_eval_acc = result.records.empty() ? 0.0 : result.records.back().eval_acc;
  result.checkpoint = model.to_checkpoint();
  result.mask_census = detail::mask_census(model);
  return result;
}

/// Simultaneous prune + quantize: every iteration runs the quantized forward
/// and updates both pruned and unpruned shadow weights; at every epoch end
/// the masks are re-selected from the full-precision shadows (they may move)
/// and the selected filters are zeroed.
inline RunResult run_spq(Model& model, const Dataset& data, const TrainConfig& cfg,
                         const EpochObserver& observer = {}, const PrePruneHook& pre_prune = {}) {
  cfg.validate();
  if (data.size() == 0) throw std::invalid_argument("run_spq: empty dataset");
  auto [train_idx, val_idx] = split_train_val(data.size(), cfg.val_fraction, cfg.seed);
  const Dataset train = subset(data, train_idx, Split::train);
  const Dataset val = subset(data, val_idx, Split::val);
  const double rate = cfg.prune_rate_max();

  model.configure_quant(cfg.quant);
  RunResult result;
  LrState lr_state{cfg.lr0, cfg.lr_decay, cfg.plateau_window};
  double lr = cfg.lr0;
  for (int epoch = 0; epoch < cfg.epochs_prune; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    rec.phase = "spq";
    rec.lr = lr;
    rec.train_acc = detail::train_epoch(model, train, cfg, lr, /*quantized=*/true, epoch);
    if (epoch == 0) model.freeze_act_alphas();
    if (pre_prune) pre_prune(epoch, model);

    // did the filters masked last epoch drift off zero during this one?
    for (ConvUnit* c : model.conv_units()) {
      if (c->mask.keep.empty()) continue;
      const int64_t d = c->weight.numel() / c->weight.shape[0];
      for (int64_t f = 0; f < c->weight.shape[0] && !rec.pruned_weights_updated; ++f) {
        if (c->mask.keep[static_cast<size_t>(f)]) continue;
        for (int64_t k = 0; k < d; ++k) {
          if (c->weight.data[static_cast<size_t>(f * d + k)] != 0.0f) {
            rec.pruned_weights_updated = true;
            break;
          }
        }
      }
    }

    // epoch-end pruning on full-precision shadow weights
    if (rate > 0.0) {
      for (ConvUnit* c : model.conv_units()) {
        if (c->weight.shape[0] < 2) {
          detail::warn_single_filter(*c);
          continue;
        }
        const auto scores = filter_distance_sums(c->weight);
        c->set_mask(select_prune_set(scores, rate), /*zero_grad=*/false);
      }
    }
    rec.pruned_fraction = model.pruned_fraction();
    rec.eval_acc = evaluate(model, val.size() > 0 ? val : train, /*quantized=*/true, cfg.batch_size);
    lr = lr_state.update(rec.eval_acc);
    result.records.push_back(rec);
    if (observer) observer(rec, model);
  }
  result.final_train_acc = result.records.empty() ? 0.0 : result.records.back().train_acc;
  result.final_eval_acc = result.records.empty() ? 0.0 : result.records.back().eval_acc;
  result.checkpoint = model.to_checkpoint();
  result.mask_census = detail::mask_census(model);
  return result;
}

/// Staged pruning then QAT. Phase 1 trains at full precision and advances the
/// stage every floor(n/s) epochs, zero-masking the cumulative p_stage
/// fraction with gradients zeroed from then on (masks only grow). Phase 2
/// reloads the pruned weights and runs quantization-aware training at
/// lr_quant with the masks frozen.
inline RunResult run_ppq(Model& model, const Dataset& data, const TrainConfig& cfg,
                         const EpochObserver& observer = {}) {
  cfg.validate();
  if (data.size() == 0) throw std::invalid_argument("run_ppq: empty dataset");
  auto [train_idx, val_idx] = split_train_val(data.size(), cfg.val_fraction, cfg.seed);
  const Dataset train = subset(data, train_idx, Split::train);
  const Dataset val = subset(data, val_idx, Split::val);

  RunResult result;

  // phase 1: full-precision training with staged pruning
  const int n = cfg.epochs_prune;
  const int stage_every = std::max(1, n / cfg.stages);
  int stage = 0;
  LrState lr_state{cfg.lr0, cfg.lr_decay, cfg.plateau_window};
  double lr = cfg.lr0;
  for (int epoch = 0; epoch < n; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    rec.phase = "ppq-prune";
    rec.lr = lr;
    rec.train_acc = detail::train_epoch(model, train, cfg, lr, /*quantized=*/false, epoch);
    if ((epoch + 1) % stage_every == 0 && stage < cfg.stages) {
      ++stage;
      const double p_stage = cfg.prune_rates[std::min<size_t>(static_cast<size_t>(stage - 1),
                                                              cfg.prune_rates.size() - 1)];
      for (ConvUnit* c : model.conv_units()) {
        if (c->weight.shape[0] < 2) {
          detail::warn_single_filter(*c);
          continue;
        }
        const auto scores = filter_distance_sums(c->weight);
        const std::vector<uint8_t> keep =
            c->mask.keep.empty() ? std::vector<uint8_t>(static_cast<size_t>(c->weight.shape[0]), 1)
                                 : c->mask.keep;
        c->set_mask(select_prune_set_monotone(scores, p_stage, keep), /*zero_grad=*/true);
      }
    }
    rec.stage = stage;
    rec.pruned_fraction = model.pruned_fraction();
    rec.eval_acc = evaluate(model, val.size() > 0 ? val : train, /*quantized=*/false, cfg.batch_size);
    lr = lr_state.update(rec.eval_acc);
    result.records.push_back(rec);
    if (observer) observer(rec, model);
  }

  // phase 2: load W^p and run QAT on the unpruned weights
  const Checkpoint pruned = model.to_checkpoint();
  model.load_from_checkpoint(pruned, /*masks_zero_grad=*/true);
  model.configure_quant(cfg.quant);
  LrState qat_state{cfg.lr_quant, cfg.lr_decay, cfg.plateau_window};
  lr = cfg.lr_quant;
  for (int epoch = 0; epoch < cfg.epochs_quant; ++epoch) {
    EpochRecord rec;
    rec.epoch = n + epoch;
    rec.phase = "ppq-qat";
    rec.stage = stage;
    rec.lr = lr;
    rec.train_acc = detail::train_epoch(model, train, cfg, lr, /*quantized=*/true, n + epoch);
    if (epoch == 0) model.freeze_act_alphas();
    rec.pruned_fraction = model.pruned_fraction();
    rec.eval_acc = evaluate(model, val.size() > 0 ? val : train, /*quantized=*/true, cfg.batch_size);
    lr = qat_state.update(rec.eval_acc);
    result.records.push_back(rec);
    if (observer) observer(rec, model);
  }

  result.final_train_acc = result.records.empty() ? 0.0 : result.records.back().train_acc;
  result.final_eval_acc = result.records.empty() ? 0.0 : result.records.back().eval_acc;
  result.checkpoint = model.to_checkpoint();
  result.mask_census = detail::mask_census(model);
  return result;
}

}  // namespace pqc
