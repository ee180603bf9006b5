#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "pqc/tensor.hpp"

// Forward/backward kernels for the small CNNs trained by the pipelines.
// Single-threaded with fixed accumulation order (input-channel major, then
// kernel row, then kernel column) so repeated runs are bitwise identical.

namespace pqc {

template <typename T>
struct Conv2dCtx {
  TensorBase<T> input;   // N,Ci,H,W as used in forward
  TensorBase<T> weight;  // O,Ci,Kh,Kw as used in forward (may be quantized/masked)
  bool has_bias = false;
  int stride = 1;
  int pad = 0;
  bool ready = false;
};

template <typename T>
inline TensorBase<T> conv2d_forward(const TensorBase<T>& input, const TensorBase<T>& weight,
                                    const TensorBase<T>& bias, int stride, int pad,
                                    Conv2dCtx<T>* ctx = nullptr) {
  if (input.rank() != 4) throw std::invalid_argument("conv2d: input must be NCHW, got " + shape_str(input.shape));
  if (weight.rank() != 4) throw std::invalid_argument("conv2d: weight must be OIHW, got " + shape_str(weight.shape));
  if (input.shape[1] != weight.shape[1]) {
    throw std::invalid_argument("conv2d: input channels " + std::to_string(input.shape[1]) +
                                " != weight input channels " + std::to_string(weight.shape[1]));
  }
  if (stride < 1) throw std::invalid_argument("conv2d: stride must be >= 1");
  if (pad < 0) throw std::invalid_argument("conv2d: pad must be >= 0");
  const int64_t n_batch = input.shape[0], ci = input.shape[1], h = input.shape[2], w = input.shape[3];
  const int64_t co = weight.shape[0], kh = weight.shape[2], kw = weight.shape[3];
  if (!bias.empty() && (bias.rank() != 1 || bias.shape[0] != co)) {
    throw std::invalid_argument("conv2d: bias shape " + shape_str(bias.shape) +
                                " does not match output channels " + std::to_string(co));
  }
  const int64_t oh = (h + 2 * pad - kh) / stride + 1;
  const int64_t ow = (w + 2 * pad - kw) / stride + 1;
  if (oh < 1 || ow < 1) {
    throw std::invalid_argument("conv2d: kernel " + shape_str(weight.shape) + " does not fit input " +
                                shape_str(input.shape) + " with pad " + std::to_string(pad));
  }

  TensorBase<T> out({n_batch, co, oh, ow});
  const T* in = input.data.data();
  const T* wt = weight.data.data();
  T* op = out.data.data();
  for (int64_t n = 0; n < n_batch; ++n) {
    for (int64_t o = 0; o < co; ++o) {
      const T b = bias.empty() ? T(0) : bias.data[static_cast<size_t>(o)];
      for (int64_t y = 0; y < oh; ++y) {
        for (int64_t x = 0; x < ow; ++x) {
          T acc = b;
          for (int64_t i = 0; i < ci; ++i) {
            for (int64_t r = 0; r < kh; ++r) {
              const int64_t iy = y * stride + r - pad;
              if (iy < 0 || iy >= h) continue;
              const T* in_row = in + ((n * ci + i) * h + iy) * w;
              const T* wt_row = wt + ((o * ci + i) * kh + r) * kw;
              for (int64_t c = 0; c < kw; ++c) {
                const int64_t ix = x * stride + c - pad;
                if (ix < 0 || ix >= w) continue;
                acc += in_row[ix] * wt_row[c];
              }
            }
          }
          op[((n * co + o) * oh + y) * ow + x] = acc;
        }
      }
    }
  }
  if (ctx) {
    ctx->input = input;
    ctx->weight = weight;
    ctx->has_bias = !bias.empty();
    ctx->stride = stride;
    ctx->pad = pad;
    ctx->ready = true;
  }
  return out;
}

template <typename T>
inline std::tuple<TensorBase<T>, TensorBase<T>, TensorBase<T>> conv2d_backward(
    Conv2dCtx<T>& ctx, const TensorBase<T>& upstream) {
  if (!ctx.ready) throw std::logic_error("conv2d_backward called before forward");
  const TensorBase<T>& input = ctx.input;
  const TensorBase<T>& weight = ctx.weight;
  const int64_t n_batch = input.shape[0], ci = input.shape[1], h = input.shape[2], w = input.shape[3];
  const int64_t co = weight.shape[0], kh = weight.shape[2], kw = weight.shape[3];
  const int64_t oh = upstream.shape[2], ow = upstream.shape[3];
  if (upstream.rank() != 4 || upstream.shape[0] != n_batch || upstream.shape[1] != co) {
    throw std::invalid_argument("conv2d_backward: upstream shape " + shape_str(upstream.shape) +
                                " does not match forward output");
  }

  TensorBase<T> gin(input.shape);
  TensorBase<T> gw(weight.shape);
  TensorBase<T> gb(ctx.has_bias ? Shape{co} : Shape{});
  if (!ctx.has_bias) gb = TensorBase<T>();

  const T* in = input.data.data();
  const T* wt = weight.data.data();
  const T* up = upstream.data.data();
  for (int64_t n = 0; n < n_batch; ++n) {
    for (int64_t o = 0; o < co; ++o) {
      for (int64_t y = 0; y < oh; ++y) {
        for (int64_t x = 0; x < ow; ++x) {
          const T g = up[((n * co + o) * oh + y) * ow + x];
          if (ctx.has_bias) gb.data[static_cast<size_t>(o)] += g;
          for (int64_t i = 0; i < ci; ++i) {
            for (int64_t r = 0; r < kh; ++r) {
              const int64_t iy = y * ctx.stride + r - ctx.pad;
              if (iy < 0 || iy >= h) continue;
              const T* in_row = in + ((n * ci + i) * h + iy) * w;
              T* gin_row = gin.data.data() + ((n * ci + i) * h + iy) * w;
              const T* wt_row = wt + ((o * ci + i) * kh + r) * kw;
              T* gw_row = gw.data.data() + ((o * ci + i) * kh + r) * kw;
              for (int64_t c = 0; c < kw; ++c) {
                const int64_t ix = x * ctx.stride + c - ctx.pad;
                if (ix < 0 || ix >= w) continue;
                gin_row[ix] += g * wt_row[c];
                gw_row[c] += g * in_row[ix];
              }
            }
          }
        }
      }
    }
  }
  return {std::move(gin), std::move(gw), std::move(gb)};
}

template <typename T>
struct LinearCtx {
  TensorBase<T> input;   // N,F
  TensorBase<T> weight;  // C,F
  bool has_bias = false;
  bool ready = false;
};

template <typename T>
inline TensorBase<T> linear_forward(const TensorBase<T>& input, const TensorBase<T>& weight,
                                    const TensorBase<T>& bias, LinearCtx<T>* ctx = nullptr) {
  if (input.rank() != 2 || weight.rank() != 2) {
    throw std::invalid_argument("linear: expected input NxF and weight CxF, got " +
                                shape_str(input.shape) + " and " + shape_str(weight.shape));
  }
  if (input.shape[1] != weight.shape[1]) {
    throw std::invalid_argument("linear: feature mismatch " + shape_str(input.shape) + " vs " +
                                shape_str(weight.shape));
  }
  const int64_t n = input.shape[0], f = input.shape[1], c = weight.shape[0];
  if (!bias.empty() && (bias.rank() != 1 || bias.shape[0] != c)) {
    throw std::invalid_argument("linear: bias shape " + shape_str(bias.shape) + " != " + std::to_string(c));
  }
  TensorBase<T> out({n, c});
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t j = 0; j < c; ++j) {
      T acc = bias.empty() ? T(0) : bias.data[static_cast<size_t>(j)];
      const T* xi = input.data.data() + i * f;
      const T* wj = weight.data.data() + j * f;
      for (int64_t k = 0; k < f; ++k) acc += xi[k] * wj[k];
      out.data[static_cast<size_t>(i * c + j)] = acc;
    }
  }
  if (ctx) {
    ctx->input = input;
    ctx->weight = weight;
    ctx->has_bias = !bias.empty();
    ctx->ready = true;
  }
  return out;
}

template <typename T>
inline std::tuple<TensorBase<T>, TensorBase<T>, TensorBase<T>> linear_backward(
    LinearCtx<T>& ctx, const TensorBase<T>& upstream) {
  if (!ctx.ready) throw std::logic_error("linear_backward called before forward");
  const int64_t n = ctx.input.shape[0], f = ctx.input.shape[1], c = ctx.weight.shape[0];
  if (upstream.rank() != 2 || upstream.shape[0] != n || upstream.shape[1] != c) {
    throw std::invalid_argument("linear_backward: upstream shape " + shape_str(upstream.shape));
  }
  TensorBase<T> gin({n, f});
  TensorBase<T> gw({c, f});
  TensorBase<T> gb = ctx.has_bias ? TensorBase<T>({c}) : TensorBase<T>();
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t j = 0; j < c; ++j) {
      const T g = upstream.data[static_cast<size_t>(i * c + j)];
      if (ctx.has_bias) gb.data[static_cast<size_t>(j)] += g;
      const T* xi = ctx.input.data.data() + i * f;
      const T* wj = ctx.weight.data.data() + j * f;
      T* gi = gin.data.data() + i * f;
      T* gwj = gw.data.data() + j * f;
      for (int64_t k = 0; k < f; ++k) {
        gi[k] += g * wj[k];
        gwj[k] += g * xi[k];
      }
    }
  }
  return {std::move(gin), std::move(gw), std::move(gb)};
}

template <typename T>
struct ReluCtx {
  TensorBase<T> input;
  bool ready = false;
};

template <typename T>
inline TensorBase<T> relu_forward(const TensorBase<T>& input, ReluCtx<T>* ctx = nullptr) {
  TensorBase<T> out(input.shape);
  for (size_t i = 0; i < input.data.size(); ++i) out.data[i] = input.data[i] > T(0) ? input.data[i] : T(0);
  if (ctx) {
    ctx->input = input;
    ctx->ready = true;
  }
  return out;
}

// Subgradient at exactly 0 is 0.
template <typename T>
inline TensorBase<T> relu_backward(ReluCtx<T>& ctx, const TensorBase<T>& upstream) {
  if (!ctx.ready) throw std::logic_error("relu_backward called before forward");
  if (upstream.shape != ctx.input.shape) {
    throw std::invalid_argument("relu_backward: upstream shape " + shape_str(upstream.shape));
  }
  TensorBase<T> gin(ctx.input.shape);
  for (size_t i = 0; i < gin.data.size(); ++i) {
    gin.data[i] = ctx.input.data[i] > T(0) ? upstream.data[i] : T(0);
  }
  return gin;
}

template <typename T>
struct GapCtx {
  Shape input_shape;
  bool ready = false;
};

/// Spatial mean per channel: NCHW -> NxC.
template <typename T>
inline TensorBase<T> global_avg_pool_forward(const TensorBase<T>& input, GapCtx<T>* ctx = nullptr) {
  if (input.rank() != 4) throw std::invalid_argument("global_avg_pool: input must be NCHW");
  const int64_t n = input.shape[0], c = input.shape[1], h = input.shape[2], w = input.shape[3];
  TensorBase<T> out({n, c});
  const T inv = T(1) / static_cast<T>(h * w);
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t j = 0; j < c; ++j) {
      T acc = T(0);
      const T* p = input.data.data() + (i * c + j) * h * w;
      for (int64_t k = 0; k < h * w; ++k) acc += p[k];
      out.data[static_cast<size_t>(i * c + j)] = acc * inv;
    }
  }
  if (ctx) {
    ctx->input_shape = input.shape;
    ctx->ready = true;
  }
  return out;
}

template <typename T>
inline TensorBase<T> global_avg_pool_backward(GapCtx<T>& ctx, const TensorBase<T>& upstream) {
  if (!ctx.ready) throw std::logic_error("global_avg_pool_backward called before forward");
  const int64_t n = ctx.input_shape[0], c = ctx.input_shape[1], h = ctx.input_shape[2], w = ctx.input_shape[3];
  if (upstream.rank() != 2 || upstream.shape[0] != n || upstream.shape[1] != c) {
    throw std::invalid_argument("global_avg_pool_backward: upstream shape " + shape_str(upstream.shape));
  }
  TensorBase<T> gin(ctx.input_shape);
  const T inv = T(1) / static_cast<T>(h * w);
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t j = 0; j < c; ++j) {
      const T g = upstream.data[static_cast<size_t>(i * c + j)] * inv;
      T* p = gin.data.data() + (i * c + j) * h * w;
      for (int64_t k = 0; k < h * w; ++k) p[k] = g;
    }
  }
  return gin;
}

/// Mean cross-entropy over the batch plus the gradient w.r.t. the logits,
/// i.e. (softmax - onehot) / N. L2 regularization is handled by the optimizer,
/// not folded into this value.
template <typename T>
inline std::pair<T, TensorBase<T>> softmax_cross_entropy(const TensorBase<T>& logits,
                                                         const std::vector<int>& labels) {
  if (logits.rank() != 2) throw std::invalid_argument("softmax_cross_entropy: logits must be NxC");
  const int64_t n = logits.shape[0], c = logits.shape[1];
  if (static_cast<int64_t>(labels.size()) != n) {
    throw std::invalid_argument("softmax_cross_entropy: got " + std::to_string(labels.size()) +
                                " labels for batch " + std::to_string(n));
  }
  TensorBase<T> grad({n, c});
  double loss = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    const int label = labels[static_cast<size_t>(i)];
    if (label < 0 || label >= c) {
      throw std::out_of_range("softmax_cross_entropy: label " + std::to_string(label) +
                              " out of range [0, " + std::to_string(c) + ")");
    }
    const T* row = logits.data.data() + i * c;
    T mx = row[0];
    for (int64_t j = 1; j < c; ++j) mx = std::max(mx, row[j]);
    double denom = 0.0;
    for (int64_t j = 0; j < c; ++j) denom += std::exp(static_cast<double>(row[j] - mx));
    const double log_denom = std::log(denom);
    loss += log_denom - static_cast<double>(row[label] - mx);
    for (int64_t j = 0; j < c; ++j) {
      const double p = std::exp(static_cast<double>(row[j] - mx)) / denom;
      const double onehot = (j == label) ? 1.0 : 0.0;
      grad.data[static_cast<size_t>(i * c + j)] = static_cast<T>((p - onehot) / static_cast<double>(n));
    }
  }
  return {static_cast<T>(loss / static_cast<double>(n)), std::move(grad)};
}

}  // namespace pqc
