#pragma once

#include <span>
#include <vector>

#include "donet/layers.hpp"

namespace donet {

template <typename T>
struct AdamState {
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

  std::vector<Tensor<T>> m;
  std::vector<Tensor<T>> v;
  std::uint64_t step = 0;

  // Zero moments shaped like the trainable entries of `params`.
  static AdamState for_params(std::span<const ParamRef<T>> params);
};

// One bias-corrected Adam update over the trainable entries of `params`, in
// order. A nonzero `weight_decay` additionally shrinks each parameter by
// (1 - lr_t * weight_decay) before the update (decoupled decay). Rejects the
// whole step with NumericsError if any gradient is non-finite.
template <typename T>
void adam_step(std::span<const ParamRef<T>> params, AdamState<T>& state, double lr_t, double weight_decay = 0.0);

}  // namespace donet
