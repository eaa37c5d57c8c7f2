#pragma once

#include "donet/tensor.hpp"

namespace donet {

// Cross-correlation, stride 1, SAME zero padding. Kernel layout (out, in, kh, kw)
// with odd kh, kw. x: (n, in, h, w) -> (n, out, h, w).
template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& k);

// Adjoint of conv2d with respect to its input.
template <typename T>
Tensor<T> conv2d_grad_input(const Tensor<T>& grad_out, const Tensor<T>& k);

// Gradient with respect to the kernel, summed over the batch in sample order.
template <typename T>
Tensor<T> conv2d_grad_kernel(const Tensor<T>& grad_out, const Tensor<T>& x, const Shape& kernel_shape);

// 2x2 mean, stride 2. Requires even h and w.
template <typename T>
Tensor<T> avg_pool2(const Tensor<T>& x);
// Adjoint of avg_pool2: broadcast each gradient over its 2x2 block, divided by 4.
template <typename T>
Tensor<T> avg_pool2_adjoint(const Tensor<T>& grad_out);

// Nearest-neighbour x2: each pixel becomes a 2x2 block.
template <typename T>
Tensor<T> upsample_nearest2(const Tensor<T>& x);
// Adjoint of upsample_nearest2: 2x2 block sums.
template <typename T>
Tensor<T> upsample_nearest2_adjoint(const Tensor<T>& grad_out);

template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> slice_channels(const Tensor<T>& x, std::size_t begin, std::size_t count);

template <typename T>
Tensor<T> relu(const Tensor<T>& x);
// Passes grad where the forward input was strictly positive.
template <typename T>
Tensor<T> relu_backward(const Tensor<T>& grad_out, const Tensor<T>& x);

}  // namespace donet
