#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "donet/random.hpp"
#include "donet/tensor.hpp"

namespace donet::testing {

template <typename T>
Tensor<T> random_tensor(Shape s, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  Rng rng(seed);
  Tensor<T> t(s);
  for (auto& v : t.data()) v = static_cast<T>(rng.uniform(lo, hi));
  return t;
}

template <typename T>
ComplexTensor<T> random_complex(Shape s, std::uint64_t seed) {
  return ComplexTensor<T>(random_tensor<T>(s, seed), random_tensor<T>(s, seed + 7919));
}

// Direct SAME cross-correlation, the textbook loop nest.
template <typename T>
Tensor<T> naive_conv2d(const Tensor<T>& x, const Tensor<T>& k) {
  const Shape xs = x.shape();
  const Shape ks = k.shape();
  const long ph = static_cast<long>(ks.h / 2);
  const long pw = static_cast<long>(ks.w / 2);
  Tensor<T> out(Shape{xs.n, ks.n, xs.h, xs.w});
  for (std::size_t n = 0; n < xs.n; ++n)
    for (std::size_t o = 0; o < ks.n; ++o)
      for (long y = 0; y < static_cast<long>(xs.h); ++y)
        for (long xx = 0; xx < static_cast<long>(xs.w); ++xx) {
          double acc = 0.0;
          for (std::size_t i = 0; i < xs.c; ++i)
            for (long u = 0; u < static_cast<long>(ks.h); ++u)
              for (long v = 0; v < static_cast<long>(ks.w); ++v) {
                const long yy = y + u - ph;
                const long xv = xx + v - pw;
                if (yy < 0 || xv < 0 || yy >= static_cast<long>(xs.h) || xv >= static_cast<long>(xs.w)) continue;
                acc += static_cast<double>(k(o, i, u, v)) * x(n, i, yy, xv);
              }
          out(n, o, y, xx) = static_cast<T>(acc);
        }
  return out;
}

// Unnormalised-then-scaled 2-D DFT of one plane, straight from the definition.
inline std::vector<std::complex<double>> naive_dft2(const std::vector<std::complex<double>>& x, std::size_t h,
                                                    std::size_t w, bool inverse) {
  const double sign = inverse ? 1.0 : -1.0;
  const double pi = 3.14159265358979323846;
  std::vector<std::complex<double>> out(h * w);
  for (std::size_t ky = 0; ky < h; ++ky)
    for (std::size_t kx = 0; kx < w; ++kx) {
      std::complex<double> acc = 0.0;
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t xx = 0; xx < w; ++xx) {
          const double ph = sign * 2.0 * pi *
                            (static_cast<double>(ky * y) / static_cast<double>(h) +
                             static_cast<double>(kx * xx) / static_cast<double>(w));
          acc += x[y * w + xx] * std::polar(1.0, ph);
        }
      out[ky * w + kx] = acc / std::sqrt(static_cast<double>(h * w));
    }
  return out;
}

template <typename T>
double dot(const Tensor<T>& a, const Tensor<T>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a.data()[i]) * b.data()[i];
  return s;
}

template <typename T>
double dot(const ComplexTensor<T>& a, const ComplexTensor<T>& b) {
  return dot(a.re, b.re) + dot(a.im, b.im);
}

}  // namespace donet::testing
