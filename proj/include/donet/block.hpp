#pragma once

#include <vector>

#include "donet/layers.hpp"

namespace donet {

struct BlockConfig {
  std::size_t layers = 4;  // K
  std::size_t channels = 64;
  double alpha = 0.125;
  std::size_t kernel = 3;
  bool dense = true;

  void validate() const;
};

// K Dual-OctConv layers between a frequency split and a merge.
//
//   X_0 = split(x)                         coils complex channels
//   A_k = D_k(X_{k-1})                     D_1: coils -> c, D_k: c -> c, D_K: c -> merge width
//   X_k = C_k([A_k, X_{k-1}, ..., X_0])    dense; otherwise X_k = relu(A_k) for k < K, X_K = A_K
//   out = merge(X_K)                       (n, 2*coils, h, w), real half then imaginary half
//
// The merge width is (high=coils, low=0) at alpha == 0 and (coils, coils) otherwise so
// that both branches of the merge sum carry the same channel count.
template <typename T>
class Block {
 public:
  Block() = default;
  Block(std::string name, BlockConfig cfg, std::size_t coils);

  Tensor<T> forward(const ComplexTensor<T>& x, BnMode mode);
  ComplexTensor<T> backward(const Tensor<T>& grad_out);
  void collect(std::vector<ParamRef<T>>& out);

  const BlockConfig& config() const { return cfg_; }
  std::size_t coils() const { return coils_; }
  // Channel split of X_k, k = 0..K.
  const std::vector<OctSplit>& feature_splits() const { return splits_; }

  std::vector<OctConvLayer<T>>& layers() { return layers_; }
  std::vector<DenseFuseUnit<T>>& fuse_units() { return fuse_; }

 private:
  std::string name_;
  BlockConfig cfg_;
  std::size_t coils_ = 0;
  std::vector<OctSplit> splits_;
  std::vector<OctConvLayer<T>> layers_;
  std::vector<DenseFuseUnit<T>> fuse_;
  // forward caches
  std::vector<OctFeature<T>> features_;     // X_0..X_K
  std::vector<OctFeature<T>> pre_activation_;  // A_1..A_K
};

// Real channel stack (n, 2c, h, w) <-> complex (n, c, h, w).
template <typename T>
ComplexTensor<T> channels_to_complex(const Tensor<T>& x);
template <typename T>
Tensor<T> complex_to_channels(const ComplexTensor<T>& x);

}  // namespace donet
