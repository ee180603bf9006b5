#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "pqc/apot.hpp"

// Bit-exact demonstration that multiplying by an APoT level needs only
// shifts and adds. Values are fixed-point: mantissa * 2^-frac_bits, always
// exact; anything that would round is an error, never a silent approximation.

namespace pqc {

struct FixedPoint {
  int64_t mantissa = 0;
  int frac_bits = 0;

  double value() const { return std::ldexp(static_cast<double>(mantissa), -frac_bits); }
};

/// Exact encode: x * 2^frac_bits must be an integer.
inline FixedPoint fixed_point_encode(double x, int frac_bits) {
  if (frac_bits < 0 || frac_bits > 62) throw std::invalid_argument("fixed_point_encode: bad frac_bits");
  const double scaled = std::ldexp(x, frac_bits);
  const double rounded = std::nearbyint(scaled);
  if (scaled != rounded || std::abs(scaled) > 4.6e18) {
    throw std::invalid_argument("fixed_point_encode: " + std::to_string(x) +
                                " is not exactly representable with " + std::to_string(frac_bits) +
                                " fractional bits");
  }
  return FixedPoint{static_cast<int64_t>(rounded), frac_bits};
}

namespace detail {

inline int64_t checked_shl(int64_t v, int sh) {
  if (sh < 0 || sh > 62) throw std::overflow_error("shift_mac: shift amount out of range");
  if (v != 0) {
    const int64_t limit = int64_t(1) << (62 - sh);
    if (v > limit || v < -limit) throw std::overflow_error("shift_mac: mantissa overflow");
  }
  return v << sh;
}

inline int64_t checked_add(int64_t a, int64_t b) {
  int64_t r = 0;
  if (__builtin_add_overflow(a, b, &r)) throw std::overflow_error("shift_mac: accumulator overflow");
  return r;
}

}  // namespace detail

/// act * (2^gamma_exp * sum sign*2^-exponent), by shifts and adds only.
/// The common budget E = max exponent keeps every term integral; the result
/// widens instead of rounding.
inline FixedPoint shift_mac(const FixedPoint& act, const std::vector<PotTerm>& weight_terms,
                            int gamma_exp) {
  if (weight_terms.empty()) return FixedPoint{0, act.frac_bits};
  int max_exp = 0;
  for (const auto& t : weight_terms) max_exp = std::max(max_exp, t.exponent);
  int64_t acc = 0;
  for (const auto& t : weight_terms) {
    const int64_t shifted = detail::checked_shl(act.mantissa, max_exp - t.exponent);
    acc = detail::checked_add(acc, t.sign >= 0 ? shifted : -shifted);
  }
  int frac = act.frac_bits + max_exp - gamma_exp;
  if (frac < 0) {
    acc = detail::checked_shl(acc, -frac);
    frac = 0;
  }
  return FixedPoint{acc, frac};
}

/// Aligns by left shift only (never loses fractional bits) and adds.
inline FixedPoint fixed_point_add(const FixedPoint& a, const FixedPoint& b) {
  const int frac = std::max(a.frac_bits, b.frac_bits);
  const int64_t ma = detail::checked_shl(a.mantissa, frac - a.frac_bits);
  const int64_t mb = detail::checked_shl(b.mantissa, frac - b.frac_bits);
  return FixedPoint{detail::checked_add(ma, mb), frac};
}

/// Exact equality as rationals: a.mantissa * 2^-a.frac == b.mantissa * 2^-b.frac.
inline bool fixed_point_equal(const FixedPoint& a, const FixedPoint& b) {
  const int frac = std::max(a.frac_bits, b.frac_bits);
  const auto wa = static_cast<__int128>(a.mantissa) << (frac - a.frac_bits);
  const auto wb = static_cast<__int128>(b.mantissa) << (frac - b.frac_bits);
  return wa == wb;
}

/// Nearest power of two <= gamma (the MAC-side scale; the residual ratio is
/// applied per output channel outside the shift-add loop).
inline int pot_gamma_exponent(double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("pot_gamma_exponent: gamma must be positive");
  return static_cast<int>(std::floor(std::log2(gamma)));
}

/// Builds the exact fixed-point encoding of a level from its PoT terms,
/// with the set-wide gamma replaced by 2^gamma_exp.
inline FixedPoint encode_level(const std::vector<PotTerm>& terms, int gamma_exp, int max_exponent) {
  int64_t m = 0;
  for (const auto& t : terms) {
    const int64_t part = detail::checked_shl(1, max_exponent - t.exponent);
    m = detail::checked_add(m, t.sign >= 0 ? part : -part);
  }
  int frac = max_exponent - gamma_exp;
  if (frac < 0) {
    m = detail::checked_shl(m, -frac);
    frac = 0;
  }
  return FixedPoint{m, frac};
}

struct MacMismatch {
  double activation = 0.0;
  double weight = 0.0;
  double expected = 0.0;
  double got = 0.0;
};

struct MacVerifyReport {
  size_t pair_count = 0;
  size_t mismatch_count = 0;
  std::vector<MacMismatch> mismatches;  // at most the first 16

  bool ok() const { return mismatch_count == 0; }
};

/// Exhaustive check over every (activation level, weight level) pair that the
/// shift-add product equals the exact rational product. Both gammas are
/// snapped to powers of two, which is the regime the MAC path supports.
inline MacVerifyReport verify_equivalence(const LevelSet& activations, const LevelSet& weights) {
  const int ga = pot_gamma_exponent(activations.gamma);
  const int gw = pot_gamma_exponent(weights.gamma);
  MacVerifyReport report;
  for (size_t ai = 0; ai < activations.size(); ++ai) {
    const FixedPoint act = encode_level(activations.terms[ai], ga, activations.max_exponent);
    for (size_t wi = 0; wi < weights.size(); ++wi) {
      const FixedPoint wt = encode_level(weights.terms[wi], gw, weights.max_exponent);
      const FixedPoint got = shift_mac(act, weights.terms[wi], gw);
      // reference: plain integer multiply of the two exact encodings
      const auto wide = static_cast<__int128>(act.mantissa) * static_cast<__int128>(wt.mantissa);
      if (wide > INT64_MAX || wide < INT64_MIN) throw std::overflow_error("verify_equivalence: reference overflow");
      const FixedPoint expected{static_cast<int64_t>(wide), act.frac_bits + wt.frac_bits};
      ++report.pair_count;
      if (!fixed_point_equal(got, expected)) {
        ++report.mismatch_count;
        if (report.mismatches.size() < 16) {
          report.mismatches.push_back(MacMismatch{act.value(), wt.value(), expected.value(), got.value()});
        }
      }
    }
  }
  return report;
}

}  // namespace pqc
