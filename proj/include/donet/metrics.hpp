#pragma once

#include "donet/tensor.hpp"

namespace donet {

// Root-sum-of-squares over coils: (n, coils, h, w) complex -> (n, 1, h, w).
template <typename T>
Tensor<T> coil_combine(const ComplexTensor<T>& x);

inline constexpr double kPsnrSentinel = 99.0;

// 10 log10(peak^2 / MSE) with peak = max(ref). Returns kPsnrSentinel when
// MSE < 1e-12 peak^2. Computed over every entry of the tensors.
template <typename T>
double psnr(const Tensor<T>& test, const Tensor<T>& ref);

struct SsimComponents {
  double ssim = 0.0;
  double luminance = 0.0;
  double contrast = 0.0;
  double structure = 0.0;
};

// Mean local SSIM over the valid region of an 11x11 Gaussian window
// (sigma 1.5), K1 = 0.01, K2 = 0.03, dynamic range max(ref) - min(ref); a
// constant reference falls back to a range of 1. Inputs are single images,
// (1, 1, h, w) with h, w >= 11.
template <typename T>
SsimComponents ssim_components(const Tensor<T>& test, const Tensor<T>& ref);
template <typename T>
double ssim(const Tensor<T>& test, const Tensor<T>& ref) {
  return ssim_components(test, ref).ssim;
}

}  // namespace donet
