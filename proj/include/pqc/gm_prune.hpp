#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "pqc/tensor.hpp"

// Geometric-median filter scoring: each filter of a conv layer is ranked by
// its total Euclidean distance to every other filter in the layer, and the
// lowest-scoring (most redundant) fraction is zero-masked.

namespace pqc {

struct PruneMask {
  std::vector<uint8_t> keep;  // 1 = kept, 0 = pruned, one entry per output filter
  int pruned_count = 0;

  bool any_pruned() const { return pruned_count > 0; }
  double pruned_fraction() const {
    return keep.empty() ? 0.0 : static_cast<double>(pruned_count) / static_cast<double>(keep.size());
  }
};

/// scores[j] = sum over j' of ||F_j - F_j'||_2 with filters flattened
/// input-channel-major, row, column (the natural OIHW layout). Uses the Gram
/// identity ||a-b||^2 = ||a||^2 + ||b||^2 - 2<a,b> with double accumulation.
template <typename T>
inline std::vector<double> filter_distance_sums(const TensorBase<T>& weights) {
  if (weights.rank() != 4) {
    throw std::invalid_argument("filter_distance_sums: expected OIHW weights, got " + shape_str(weights.shape));
  }
  const int64_t o = weights.shape[0];
  if (o < 2) {
    throw std::invalid_argument("filter_distance_sums: layer has " + std::to_string(o) +
                                " filter(s); need at least 2");
  }
  const int64_t d = weights.numel() / o;
  std::vector<double> dots(static_cast<size_t>(o * o), 0.0);
  for (int64_t a = 0; a < o; ++a) {
    const T* fa = weights.data.data() + a * d;
    for (int64_t b = a; b < o; ++b) {
      const T* fb = weights.data.data() + b * d;
      double acc = 0.0;
      for (int64_t k = 0; k < d; ++k) acc += static_cast<double>(fa[k]) * static_cast<double>(fb[k]);
      dots[static_cast<size_t>(a * o + b)] = acc;
      dots[static_cast<size_t>(b * o + a)] = acc;
    }
  }
  std::vector<double> scores(static_cast<size_t>(o), 0.0);
  for (int64_t a = 0; a < o; ++a) {
    double sum = 0.0;
    for (int64_t b = 0; b < o; ++b) {
      const double sq = dots[static_cast<size_t>(a * o + a)] + dots[static_cast<size_t>(b * o + b)] -
                        2.0 * dots[static_cast<size_t>(a * o + b)];
      sum += std::sqrt(std::max(sq, 0.0));
    }
    scores[static_cast<size_t>(a)] = sum;
  }
  return scores;
}

/// Masks the floor(rate * O) filters with the smallest distance sums.
/// Ties break toward the lower filter index.
inline PruneMask select_prune_set(const std::vector<double>& scores, double rate) {
  if (!(rate >= 0.0) || rate >= 1.0) {
    throw std::invalid_argument("select_prune_set: rate must be in [0, 1), got " + std::to_string(rate));
  }
  const size_t o = scores.size();
  const size_t count = static_cast<size_t>(std::floor(rate * static_cast<double>(o)));
  std::vector<size_t> order(o);
  std::iota(order.begin(), order.end(), size_t(0));
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (scores[a] != scores[b]) return scores[a] < scores[b];
    return a < b;
  });
  PruneMask mask;
  mask.keep.assign(o, 1);
  for (size_t i = 0; i < count; ++i) mask.keep[order[i]] = 0;
  mask.pruned_count = static_cast<int>(count);
  return mask;
}

/// Staged variant: previously pruned filters stay pruned; only enough of the
/// lowest-scoring still-kept filters are added to reach floor(rate * O).
inline PruneMask select_prune_set_monotone(const std::vector<double>& scores, double rate,
                                           const std::vector<uint8_t>& already_keep) {
  if (!(rate >= 0.0) || rate >= 1.0) {
    throw std::invalid_argument("select_prune_set_monotone: rate must be in [0, 1)");
  }
  const size_t o = scores.size();
  if (already_keep.size() != o) {
    throw std::invalid_argument("select_prune_set_monotone: mask size mismatch");
  }
  const size_t target = static_cast<size_t>(std::floor(rate * static_cast<double>(o)));
  PruneMask mask;
  mask.keep = already_keep;
  size_t pruned = static_cast<size_t>(std::count(mask.keep.begin(), mask.keep.end(), uint8_t(0)));
  std::vector<size_t> order(o);
  std::iota(order.begin(), order.end(), size_t(0));
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (scores[a] != scores[b]) return scores[a] < scores[b];
    return a < b;
  });
  for (size_t i = 0; i < o && pruned < target; ++i) {
    if (mask.keep[order[i]]) {
      mask.keep[order[i]] = 0;
      ++pruned;
    }
  }
  mask.pruned_count = static_cast<int>(pruned);
  return mask;
}

/// Zeroes the masked filters in place (weights plus the filters' bias
/// entries). The tensors keep their shape; removal accounting lives in the
/// architecture metrics.
template <typename T>
inline void apply_mask(TensorBase<T>& weights, std::type_identity_t<TensorBase<T>>* bias,
                       const PruneMask& mask) {
  if (weights.rank() != 4) throw std::invalid_argument("apply_mask: expected OIHW weights");
  const int64_t o = weights.shape[0];
  if (static_cast<int64_t>(mask.keep.size()) != o) {
    throw std::invalid_argument("apply_mask: mask has " + std::to_string(mask.keep.size()) +
                                " entries for " + std::to_string(o) + " filters");
  }
  const int64_t d = weights.numel() / o;
  for (int64_t f = 0; f < o; ++f) {
    if (mask.keep[static_cast<size_t>(f)]) continue;
    std::fill(weights.data.begin() + f * d, weights.data.begin() + (f + 1) * d, T(0));
    if (bias && !bias->empty()) bias->data[static_cast<size_t>(f)] = T(0);
  }
}

/// Zeroes gradient rows of masked filters; with zero_grad this runs after
/// every backward pass so pruned filters stay at exactly zero.
template <typename T>
inline void mask_gradients(TensorBase<T>& weights, std::type_identity_t<TensorBase<T>>* bias,
                           const PruneMask& mask) {
  const int64_t o = weights.shape[0];
  const int64_t d = weights.numel() / o;
  if (!weights.has_grad()) return;
  for (int64_t f = 0; f < o; ++f) {
    if (mask.keep[static_cast<size_t>(f)]) continue;
    std::fill(weights.grad.begin() + f * d, weights.grad.begin() + (f + 1) * d, T(0));
    if (bias && bias->has_grad()) bias->grad[static_cast<size_t>(f)] = T(0);
  }
}

}  // namespace pqc
