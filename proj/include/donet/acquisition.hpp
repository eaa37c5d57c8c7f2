#pragma once

#include "donet/kspace.hpp"
#include "donet/phantom.hpp"

namespace donet {

// S_i * x for every coil: image (n, 1, h, w), maps (n or 1, coils, h, w) -> (n, coils, h, w).
template <typename T>
ComplexTensor<T> coil_images(const ComplexTensor<T>& image, const ComplexTensor<T>& maps);

// y_i = M * fft2c(coil image i), same mask for every coil.
template <typename T>
KSpaceMeasurement<T> acquire(const ComplexTensor<T>& coil_imgs, const SamplingMask& mask);

KSpaceMeasurement<double> forward_acquire(const Phantom& x, const CoilSensitivities& s, const SamplingMask& m);

// Per-coil inverse FFT of the zero-filled measurement; the cascade input and
// the evaluation baseline.
template <typename T>
ComplexTensor<T> zero_filled_recon(const KSpaceMeasurement<T>& y);

}  // namespace donet
