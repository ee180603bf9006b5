#pragma once

#include <stdexcept>

#include "pqc/tensor.hpp"

namespace pqc {

/// Per-parameter SGD state. Paper defaults: momentum 0.9, weight decay 5e-4.
template <typename T>
struct OptimState {
  TensorBase<T> velocity;
  T momentum = T(0.9);
  T weight_decay = T(5e-4);
  T lr = T(0.1);
};

// v <- momentum * v + grad + weight_decay * param
// param <- param - lr * v
template <typename T>
inline void sgd_step(TensorBase<T>& param, OptimState<T>& state) {
  if (!param.has_grad()) throw std::logic_error("sgd_step: parameter has no gradient");
  if (state.velocity.data.size() != param.data.size()) {
    state.velocity = TensorBase<T>(param.shape);
  }
  for (size_t i = 0; i < param.data.size(); ++i) {
    T v = state.momentum * state.velocity.data[i] + param.grad[i] + state.weight_decay * param.data[i];
    state.velocity.data[i] = v;
    param.data[i] -= state.lr * v;
  }
}

}  // namespace pqc
