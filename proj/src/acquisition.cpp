#include "donet/acquisition.hpp"

#include "donet/fft.hpp"

namespace donet {

template <typename T>
ComplexTensor<T> coil_images(const ComplexTensor<T>& image, const ComplexTensor<T>& maps) {
  const Shape is = image.shape();
  const Shape ms = maps.shape();
  if (is.c != 1 || is.h != ms.h || is.w != ms.w || (ms.n != 1 && ms.n != is.n)) {
    throw ShapeError("coil_images: image " + to_string(is) + " vs maps " + to_string(ms));
  }
  ComplexTensor<T> out(Shape{is.n, ms.c, is.h, is.w});
  const std::size_t P = is.plane();
  for (std::size_t n = 0; n < is.n; ++n) {
    const std::size_t mn = ms.n == 1 ? 0 : n;
    const T* xr = image.re.plane(n, 0);
    const T* xi = image.im.plane(n, 0);
    for (std::size_t c = 0; c < ms.c; ++c) {
      const T* sr = maps.re.plane(mn, c);
      const T* si = maps.im.plane(mn, c);
      T* orr = out.re.plane(n, c);
      T* oi = out.im.plane(n, c);
      for (std::size_t i = 0; i < P; ++i) {
        orr[i] = sr[i] * xr[i] - si[i] * xi[i];
        oi[i] = sr[i] * xi[i] + si[i] * xr[i];
      }
    }
  }
  return out;
}

template <typename T>
KSpaceMeasurement<T> acquire(const ComplexTensor<T>& coil_imgs, const SamplingMask& mask) {
  const Shape s = coil_imgs.shape();
  if (mask.h != s.h || mask.w != s.w) throw ShapeError("acquire: mask does not match image size");
  ComplexTensor<T> k = fft2c(coil_imgs);
  const std::size_t P = s.plane();
  for (std::size_t n = 0; n < s.n; ++n) {
    for (std::size_t c = 0; c < s.c; ++c) {
      T* kr = k.re.plane(n, c);
      T* ki = k.im.plane(n, c);
      for (std::size_t i = 0; i < P; ++i) {
        if (!mask.bits[i]) {
          kr[i] = 0;
          ki[i] = 0;
        }
      }
    }
  }
  return {std::move(k), mask};
}

KSpaceMeasurement<double> forward_acquire(const Phantom& x, const CoilSensitivities& s, const SamplingMask& m) {
  return acquire(coil_images(x.image, s.maps), m);
}

template <typename T>
ComplexTensor<T> zero_filled_recon(const KSpaceMeasurement<T>& y) {
  return ifft2c(y.y);
}

#define DONET_INSTANTIATE(T)                                                                  \
  template ComplexTensor<T> coil_images(const ComplexTensor<T>&, const ComplexTensor<T>&);    \
  template KSpaceMeasurement<T> acquire(const ComplexTensor<T>&, const SamplingMask&);        \
  template ComplexTensor<T> zero_filled_recon(const KSpaceMeasurement<T>&);

DONET_INSTANTIATE(float)
DONET_INSTANTIATE(double)

}  // namespace donet
