#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace pqc {

using Shape = std::vector<int64_t>;

inline int64_t shape_numel(const Shape& s) {
  int64_t n = 1;
  for (int64_t d : s) {
    if (d <= 0) {
      throw std::invalid_argument("tensor extent must be positive, got " + std::to_string(d));
    }
    n *= d;
  }
  return n;
}

inline std::string shape_str(const Shape& s) {
  std::string out = "[";
  for (size_t i = 0; i < s.size(); ++i) {
    out += std::to_string(s[i]);
    if (i + 1 < s.size()) out += "x";
  }
  return out + "]";
}

/// Dense row-major tensor. `grad` stays empty until ensure_grad() is called.
template <typename T>
struct TensorBase {
  Shape shape;
  std::vector<T> data;
  std::vector<T> grad;

  TensorBase() = default;
  explicit TensorBase(Shape s)
      : shape(std::move(s)), data(static_cast<size_t>(shape_numel(shape)), T(0)) {}
  TensorBase(Shape s, std::vector<T> d) : shape(std::move(s)), data(std::move(d)) {
    if (static_cast<int64_t>(data.size()) != shape_numel(shape)) {
      throw std::invalid_argument("data length " + std::to_string(data.size()) +
                                  " does not match shape " + shape_str(shape));
    }
  }

  int64_t numel() const { return static_cast<int64_t>(data.size()); }
  int64_t dim(size_t i) const { return shape.at(i); }
  size_t rank() const { return shape.size(); }
  bool empty() const { return data.empty(); }

  void ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), T(0));
  }
  void zero_grad() { std::fill(grad.begin(), grad.end(), T(0)); }
  bool has_grad() const { return !data.empty() && grad.size() == data.size(); }

  T* begin() { return data.data(); }
  T* end() { return data.data() + data.size(); }
};

using Tensor = TensorBase<float>;
using TensorD = TensorBase<double>;

template <typename T>
inline bool all_finite(const std::vector<T>& v) {
  for (T x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

/// NaN/Inf after a forward or backward pass is a hard error.
template <typename T>
inline void check_finite(const TensorBase<T>& t, const std::string& what) {
  if (!all_finite(t.data)) {
    throw std::runtime_error("non-finite values in " + what);
  }
  if (!t.grad.empty() && !all_finite(t.grad)) {
    throw std::runtime_error("non-finite gradient in " + what);
  }
}

template <typename T, typename U>
inline TensorBase<U> cast_tensor(const TensorBase<T>& t) {
  TensorBase<U> out(t.shape);
  for (size_t i = 0; i < t.data.size(); ++i) out.data[i] = static_cast<U>(t.data[i]);
  return out;
}

/// Deterministic RNG. Box-Muller on top of mt19937 so the bit stream does not
/// depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(static_cast<std::mt19937::result_type>(seed)) {}

  // uniform in [0, 1) with 27-bit resolution
  double uniform() { return (gen_() >> 5) * (1.0 / 134217728.0); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  uint32_t next_u32() { return gen_(); }

  // integer in [0, n)
  uint64_t below(uint64_t n) { return n == 0 ? 0 : gen_() % n; }

  template <typename It>
  void shuffle(It first, It last) {
    auto n = static_cast<uint64_t>(last - first);
    for (uint64_t i = n; i > 1; --i) {
      std::swap(first[i - 1], first[below(i)]);
    }
  }

 private:
  std::mt19937 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// He/fan-in scaled normal init for conv (OIHW) and linear (CxF) weights.
template <typename T>
inline void he_normal_init(TensorBase<T>& w, Rng& rng) {
  int64_t fan_in = 1;
  for (size_t i = 1; i < w.shape.size(); ++i) fan_in *= w.shape[i];
  double std_dev = std::sqrt(2.0 / static_cast<double>(fan_in));
  for (auto& x : w.data) x = static_cast<T>(rng.normal() * std_dev);
}

}  // namespace pqc
