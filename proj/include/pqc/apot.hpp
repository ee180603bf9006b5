#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "pqc/tensor.hpp"

// Additive powers-of-two quantization. A level is gamma * sum_i P_i where
// each P_i is zero or a power of two drawn from a per-term exponent set, the
// exponent sets are disjoint, and gamma scales the largest magnitude onto the
// clipping threshold alpha.

namespace pqc {

enum class ClipPolicy { max_abs, percentile };

struct QuantConfig {
  int bits = 4;       // b: total bit-width
  int base_bits = 2;  // k: base PoT bit-width
  bool signed_values = true;
  ClipPolicy clip = ClipPolicy::max_abs;
  double percentile_q = 99.9;

  int terms() const { return bits / base_bits; }  // n = b/k

  // bits >= 32 is the pipeline-level passthrough sentinel; it is not a
  // constructible level set and is rejected here.
  void validate() const {
    if (base_bits != 1 && base_bits != 2) {
      throw std::invalid_argument("apot: base bit-width k must be 1 or 2, got " + std::to_string(base_bits));
    }
    if (bits != 2 && bits != 3 && bits != 4 && bits != 8) {
      throw std::invalid_argument("apot: bit-width b must be one of {2,3,4,8}, got " + std::to_string(bits));
    }
    if (bits % base_bits != 0) {
      throw std::invalid_argument("apot: b=" + std::to_string(bits) + " is not divisible by k=" +
                                  std::to_string(base_bits));
    }
  }
};

struct PotTerm {
  int sign = 1;      // +1 or -1
  int exponent = 0;  // value contribution is sign * 2^-exponent (before gamma)
};

struct LevelSet {
  double gamma = 1.0;
  double alpha = 1.0;
  bool signed_values = false;
  std::vector<double> levels;                   // sorted ascending
  std::vector<std::vector<PotTerm>> terms;      // decomposition per level, same order
  int max_exponent = 0;                         // deepest fractional exponent used

  size_t size() const { return levels.size(); }
};

namespace detail {

// Exponent sets for the magnitude construction over `total_bits` bits:
// ceil(total_bits / k) terms; term i carries k bits (the last may carry the
// remainder) and its nonzero values are 2^-(i + j*n_terms).
inline std::vector<std::vector<int>> term_exponent_sets(int total_bits, int k) {
  const int n_terms = (total_bits + k - 1) / k;
  std::vector<std::vector<int>> sets(static_cast<size_t>(n_terms));
  for (int i = 0; i < n_terms; ++i) {
    const int bits_here = std::min(k, total_bits - i * k);
    const int nonzero_count = (1 << bits_here) - 1;
    for (int j = 0; j < nonzero_count; ++j) {
      sets[static_cast<size_t>(i)].push_back(i + j * n_terms);
    }
  }
  return sets;
}

struct RawLevel {
  double value = 0.0;
  std::vector<PotTerm> terms;
};

// All combinations "pick zero or one exponent per term".
inline std::vector<RawLevel> enumerate_sums(const std::vector<std::vector<int>>& sets) {
  std::vector<RawLevel> acc{RawLevel{}};
  for (const auto& set : sets) {
    std::vector<RawLevel> next;
    next.reserve(acc.size() * (set.size() + 1));
    for (const auto& partial : acc) {
      next.push_back(partial);
      for (int e : set) {
        RawLevel ext = partial;
        ext.value += std::ldexp(1.0, -e);
        ext.terms.push_back(PotTerm{1, e});
        next.push_back(std::move(ext));
      }
    }
    acc = std::move(next);
  }
  return acc;
}

}  // namespace detail

/// Realized distinct level counts: 2^b for unsigned sets; 2^b - 1 for signed
/// sets because the mirrored construction shares the zero level.
inline size_t expected_level_count(const QuantConfig& cfg) {
  return cfg.signed_values ? (size_t(1) << cfg.bits) - 1 : (size_t(1) << cfg.bits);
}

inline LevelSet build_level_set(const QuantConfig& cfg, double alpha) {
  cfg.validate();
  if (!(alpha > 0.0)) throw std::invalid_argument("apot: alpha must be positive");

  // Unsigned: all b bits build magnitudes. Signed: one sign bit, magnitudes
  // from b-1 bits, mirrored around zero.
  const int mag_bits = cfg.signed_values ? cfg.bits - 1 : cfg.bits;
  const auto sets = detail::term_exponent_sets(mag_bits, cfg.base_bits);
  auto raw = detail::enumerate_sums(sets);

  double max_raw = 0.0;
  int max_exp = 0;
  for (const auto& r : raw) {
    max_raw = std::max(max_raw, r.value);
    for (const auto& t : r.terms) max_exp = std::max(max_exp, t.exponent);
  }
  const double gamma = alpha / max_raw;

  LevelSet ls;
  ls.gamma = gamma;
  ls.alpha = alpha;
  ls.signed_values = cfg.signed_values;
  ls.max_exponent = max_exp;

  std::vector<std::pair<double, std::vector<PotTerm>>> entries;
  entries.reserve(raw.size() * (cfg.signed_values ? 2 : 1));
  for (const auto& r : raw) {
    entries.emplace_back(gamma * r.value, r.terms);
    if (cfg.signed_values && r.value != 0.0) {
      std::vector<PotTerm> neg = r.terms;
      for (auto& t : neg) t.sign = -1;
      entries.emplace_back(-gamma * r.value, std::move(neg));
    }
  }
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (auto& e : entries) {
    if (!ls.levels.empty() && ls.levels.back() == e.first) continue;  // dedupe exact duplicates
    ls.levels.push_back(e.first);
    ls.terms.push_back(std::move(e.second));
  }

  if (ls.size() != expected_level_count(cfg)) {
    throw std::logic_error("apot: realized level count " + std::to_string(ls.size()) +
                           " != expected " + std::to_string(expected_level_count(cfg)) +
                           " for b=" + std::to_string(cfg.bits) + " k=" + std::to_string(cfg.base_bits));
  }
  return ls;
}

/// Clipping threshold from data. An all-zero tensor degenerates to the
/// smallest positive normal so the quantizer maps everything to 0.
template <typename T>
inline double compute_clip_threshold(const TensorBase<T>& values, ClipPolicy policy,
                                     double percentile_q = 99.9) {
  if (values.empty()) throw std::invalid_argument("compute_clip_threshold: empty tensor");
  if (policy == ClipPolicy::max_abs) {
    double mx = 0.0;
    for (T x : values.data) mx = std::max(mx, std::abs(static_cast<double>(x)));
    if (mx == 0.0) return static_cast<double>(std::numeric_limits<float>::min());
    return mx;
  }
  std::vector<double> mags(values.data.size());
  for (size_t i = 0; i < mags.size(); ++i) mags[i] = std::abs(static_cast<double>(values.data[i]));
  // nearest-rank percentile: ceil(q * N / 100)-th smallest, with a guard
  // against q*N/100 landing an ulp above an integer
  const size_t n = mags.size();
  size_t rank = static_cast<size_t>(std::ceil(percentile_q * static_cast<double>(n) / 100.0 - 1e-9));
  rank = std::min(std::max<size_t>(rank, 1), n);
  std::nth_element(mags.begin(), mags.begin() + static_cast<std::ptrdiff_t>(rank - 1), mags.end());
  const double a = mags[rank - 1];
  if (a == 0.0) return static_cast<double>(std::numeric_limits<float>::min());
  return a;
}

/// Nearest-level projection after clamping to the representable range.
/// Ties round toward zero, which keeps signed sets odd-symmetric.
inline double quantize_nearest(double x, const LevelSet& ls) {
  const double lo = ls.levels.front();
  const double hi = ls.levels.back();
  double v = std::min(std::max(x, lo), hi);
  auto it = std::lower_bound(ls.levels.begin(), ls.levels.end(), v);
  if (it == ls.levels.end()) return ls.levels.back();
  if (it == ls.levels.begin() || *it == v) return *it;
  const double above = *it;
  const double below = *(it - 1);
  const double d_above = above - v;
  const double d_below = v - below;
  if (d_below < d_above) return below;
  if (d_above < d_below) return above;
  return std::abs(below) <= std::abs(above) ? below : above;
}

/// STE clip gate: 1 inside [-alpha, alpha] (unsigned: [0, alpha]), 0 outside.
inline bool ste_inside(double x, const LevelSet& ls) {
  const double lo = ls.signed_values ? -ls.alpha : 0.0;
  return x >= lo && x <= ls.alpha;
}

/// Elementwise nearest-level projection. `gate`, when given, receives the
/// straight-through indicator used to mask gradients flowing back into the
/// full-precision shadow tensor.
template <typename T>
inline TensorBase<T> quantize_tensor(const TensorBase<T>& t, const LevelSet& ls,
                                     std::vector<uint8_t>* gate = nullptr) {
  TensorBase<T> out(t.shape);
  if (gate) gate->assign(t.data.size(), 0);
  for (size_t i = 0; i < t.data.size(); ++i) {
    const double x = static_cast<double>(t.data[i]);
    out.data[i] = static_cast<T>(quantize_nearest(x, ls));
    if (gate) (*gate)[i] = ste_inside(x, ls) ? 1 : 0;
  }
  return out;
}

/// One-shot helper implementing the full APoTQuantization step for a tensor:
/// clip threshold from policy, level set, projection. Activations must use
/// unsigned configs (post-ReLU values are nonnegative).
template <typename T>
inline TensorBase<T> quantize_tensor_ste(const TensorBase<T>& t, const QuantConfig& cfg,
                                         std::vector<uint8_t>* gate = nullptr,
                                         LevelSet* used_levels = nullptr) {
  cfg.validate();
  const double alpha = compute_clip_threshold(t, cfg.clip, cfg.percentile_q);
  LevelSet ls = build_level_set(cfg, alpha);
  TensorBase<T> out = quantize_tensor(t, ls, gate);
  if (used_levels) *used_levels = std::move(ls);
  return out;
}

/// PoT decomposition of a level: gamma * sum sign*2^-exponent == level, with
/// at most n nonzero terms. The level must be a member of the set.
inline std::pair<std::vector<PotTerm>, double> decompose_level(double level, const LevelSet& ls) {
  auto it = std::lower_bound(ls.levels.begin(), ls.levels.end(), level);
  if (it == ls.levels.end() || *it != level) {
    throw std::domain_error("decompose_level: " + std::to_string(level) + " is not a level of this set");
  }
  const size_t idx = static_cast<size_t>(it - ls.levels.begin());
  return {ls.terms[idx], ls.gamma};
}

}  // namespace pqc
