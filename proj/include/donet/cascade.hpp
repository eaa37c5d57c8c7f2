#pragma once

#include <vector>

#include "donet/block.hpp"
#include "donet/kspace.hpp"

namespace donet {

struct CascadeConfig {
  std::size_t blocks = 10;  // T
  BlockConfig block;
  std::size_t coils = 1;

  void validate() const;
};

// Per coil: ifft2c((1 - M) * fft2c(x_hat) + M * y). `mask` is (1, 1, h, w) and
// broadcast over samples and coils.
template <typename T>
ComplexTensor<T> data_fidelity(const ComplexTensor<T>& x_hat, const ComplexTensor<T>& y, const Tensor<T>& mask);
template <typename T>
ComplexTensor<T> data_fidelity(const ComplexTensor<T>& x_hat, const KSpaceMeasurement<T>& y);
// Adjoint of the x_hat dependence: ifft2c((1 - M) * fft2c(g)).
template <typename T>
ComplexTensor<T> data_fidelity_backward(const ComplexTensor<T>& grad_out, const Tensor<T>& mask);

// Mean of |pred - target| over every real and imaginary entry of the batch.
template <typename T>
T l1_loss(const ComplexTensor<T>& pred, const ComplexTensor<T>& target);
template <typename T>
ComplexTensor<T> l1_loss_grad(const ComplexTensor<T>& pred, const ComplexTensor<T>& target);

// T blocks, each followed by a data fidelity unit, fed with the zero-filled
// coil images.
template <typename T>
class DONet {
 public:
  DONet() = default;
  explicit DONet(CascadeConfig cfg);

  ComplexTensor<T> forward(const KSpaceMeasurement<T>& y, BnMode mode);
  // Accumulates parameter gradients for the last forward call.
  void backward(const ComplexTensor<T>& grad_out);

  std::vector<ParamRef<T>> params();
  void zero_grad();
  std::size_t parameter_count();

  const CascadeConfig& config() const { return cfg_; }
  std::vector<Block<T>>& blocks() { return blocks_; }

 private:
  CascadeConfig cfg_;
  std::vector<Block<T>> blocks_;
  Tensor<T> mask_;
};

}  // namespace donet
