#pragma once

#include "donet/tensor.hpp"

namespace donet {

// Per-channel 2-D DFT with orthonormal scaling (1/sqrt(h*w) in both
// directions). Index (0,0) holds DC. Power-of-two lengths use radix-2; other
// lengths fall back to a direct O(n^2) DFT per row/column.
template <typename T>
ComplexTensor<T> fft2(const ComplexTensor<T>& x);
template <typename T>
ComplexTensor<T> ifft2(const ComplexTensor<T>& x);

// Centred variants used for k-space: DC sits at (h/2, w/2) and the image
// origin at the array centre, i.e. fftshift(fft2(ifftshift(x))).
template <typename T>
ComplexTensor<T> fft2c(const ComplexTensor<T>& x);
template <typename T>
ComplexTensor<T> ifft2c(const ComplexTensor<T>& x);

template <typename T>
Tensor<T> fftshift(const Tensor<T>& x);
template <typename T>
Tensor<T> ifftshift(const Tensor<T>& x);

}  // namespace donet
