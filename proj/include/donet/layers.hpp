#pragma once

#include <span>
#include <string>
#include <vector>

#include "donet/octconv.hpp"
#include "donet/tensor.hpp"

namespace donet {

// Train: batch statistics, running averages updated. Eval: running statistics.
// Bypass: identity (used to make algebraic tests exact).
enum class BnMode { Train, Eval, Bypass };

// Non-owning view of a named tensor. `grad` is null for buffers such as BN
// running statistics, which are checkpointed but not optimised.
template <typename T>
struct ParamRef {
  std::string name;
  Tensor<T>* value = nullptr;
  Tensor<T>* grad = nullptr;

  bool trainable() const { return grad != nullptr; }
};

template <typename T>
void zero_grads(std::span<const ParamRef<T>> params);

template <typename T>
class BatchNorm {
 public:
  static constexpr double kMomentum = 0.1;
  static constexpr double kEps = 1e-5;

  BatchNorm() = default;
  BatchNorm(std::string name, std::size_t channels);

  Tensor<T> forward(const Tensor<T>& x, BnMode mode);
  Tensor<T> backward(const Tensor<T>& grad_out);
  void collect(std::vector<ParamRef<T>>& out);

  Tensor<T> gamma, beta, running_mean, running_var;
  Tensor<T> gamma_grad, beta_grad;

 private:
  std::string name_;
  BnMode mode_ = BnMode::Bypass;
  Tensor<T> xhat_;
  std::vector<T> inv_std_;
};

// One Dual-OctConv layer with its cached input.
template <typename T>
class OctConvLayer {
 public:
  OctConvLayer() = default;
  OctConvLayer(std::string name, OctSplit in, OctSplit out, std::size_t kernel);

  OctFeature<T> forward(const OctFeature<T>& x);
  OctFeature<T> backward(const OctFeature<T>& grad_out);
  void collect(std::vector<ParamRef<T>>& out);

  DualOctKernel<T> weight;
  DualOctKernel<T> grad;

 private:
  std::string name_;
  OctFeature<T> input_;
};

// Dense fusion C_k: per group, concatenate the history (newest first), then
// BN-ReLU-Conv1x1-BN-ReLU-Conv3x3 back to the group width of the newest entry.
// Convolution weights are per frequency band and shared by the real and
// imaginary groups; BN parameters are per group.
template <typename T>
class DenseFuseUnit {
 public:
  static constexpr std::size_t kFuseKernel = 3;

  DenseFuseUnit() = default;
  DenseFuseUnit(std::string name, std::vector<OctSplit> history_splits);

  OctFeature<T> forward(std::span<const OctFeature<T>* const> history, BnMode mode);
  // Gradients for each history entry, same order as forward.
  std::vector<OctFeature<T>> backward(const OctFeature<T>& grad_out);
  void collect(std::vector<ParamRef<T>>& out);

  // Concatenated input channels of the 1x1 conv for the high (band 0) or low (band 1) band.
  std::size_t fused_width(std::size_t band) const;
  OctSplit output_split() const { return out_; }

  // band 0 = high, 1 = low
  Tensor<T> conv1[2], conv3[2];
  Tensor<T> conv1_grad[2], conv3_grad[2];
  // groups: 0 r_h, 1 i_h, 2 r_l, 3 i_l
  BatchNorm<T> bn1[4], bn2[4];

 private:
  struct GroupCache {
    Tensor<T> a1, r1, a2, r2;
  };
  std::string name_;
  std::vector<OctSplit> history_;
  OctSplit out_;
  GroupCache cache_[4];
};

template <typename T>
OctFeature<T> relu(const OctFeature<T>& x);
template <typename T>
OctFeature<T> relu_backward(const OctFeature<T>& grad_out, const OctFeature<T>& x);

}  // namespace donet
