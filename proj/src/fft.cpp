#include "donet/fft.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace donet {

namespace {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// One 1-D transform plan: twiddles in the working precision, computed in double.
template <typename T>
class Plan1d {
 public:
  Plan1d(std::size_t n, bool inverse) : n_(n), pow2_(is_pow2(n)) {
    const double sign = inverse ? 1.0 : -1.0;
    const std::size_t count = pow2_ ? n / 2 : n;
    twiddle_.resize(count);
    for (std::size_t k = 0; k < count; ++k) {
      const double a = sign * 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
      twiddle_[k] = std::complex<T>(static_cast<T>(std::cos(a)), static_cast<T>(std::sin(a)));
    }
    scale_ = static_cast<T>(1.0 / std::sqrt(static_cast<double>(n)));
    if (pow2_) {
      bitrev_.resize(n);
      std::size_t bits = 0;
      while ((std::size_t{1} << bits) < n) ++bits;
      for (std::size_t i = 0; i < n; ++i) {
        std::size_t r = 0;
        for (std::size_t b = 0; b < bits; ++b) r |= ((i >> b) & 1u) << (bits - 1 - b);
        bitrev_[i] = r;
      }
    }
  }

  // In-place on `buf` (length n), `tmp` is scratch.
  void run(std::complex<T>* buf, std::vector<std::complex<T>>& tmp) const {
    if (n_ <= 1) return;
    if (pow2_) {
      for (std::size_t i = 0; i < n_; ++i) {
        if (i < bitrev_[i]) std::swap(buf[i], buf[bitrev_[i]]);
      }
      for (std::size_t len = 2; len <= n_; len <<= 1) {
        const std::size_t half = len / 2;
        const std::size_t step = n_ / len;
        for (std::size_t s = 0; s < n_; s += len) {
          for (std::size_t j = 0; j < half; ++j) {
            const std::complex<T> t = twiddle_[j * step] * buf[s + j + half];
            buf[s + j + half] = buf[s + j] - t;
            buf[s + j] += t;
          }
        }
      }
    } else {
      tmp.assign(n_, {});
      for (std::size_t k = 0; k < n_; ++k) {
        std::complex<T> acc{};
        for (std::size_t j = 0; j < n_; ++j) acc += buf[j] * twiddle_[(j * k) % n_];
        tmp[k] = acc;
      }
      std::copy(tmp.begin(), tmp.end(), buf);
    }
    for (std::size_t i = 0; i < n_; ++i) buf[i] *= scale_;
  }

 private:
  std::size_t n_;
  bool pow2_;
  T scale_{1};
  std::vector<std::complex<T>> twiddle_;
  std::vector<std::size_t> bitrev_;
};

template <typename T>
ComplexTensor<T> transform(const ComplexTensor<T>& x, bool inverse) {
  const Shape s = x.shape();
  ComplexTensor<T> out(s);
  if (s.numel() == 0) return out;
  const Plan1d<T> row_plan(s.w, inverse);
  const Plan1d<T> col_plan(s.h, inverse);
  std::vector<std::complex<T>> plane(s.h * s.w);
  std::vector<std::complex<T>> line(std::max(s.h, s.w));
  std::vector<std::complex<T>> tmp;
  for (std::size_t ni = 0; ni < s.n; ++ni) {
    for (std::size_t ci = 0; ci < s.c; ++ci) {
      const T* re = x.re.plane(ni, ci);
      const T* im = x.im.plane(ni, ci);
      for (std::size_t i = 0; i < s.h * s.w; ++i) plane[i] = {re[i], im[i]};
      for (std::size_t y = 0; y < s.h; ++y) row_plan.run(plane.data() + y * s.w, tmp);
      for (std::size_t xx = 0; xx < s.w; ++xx) {
        for (std::size_t y = 0; y < s.h; ++y) line[y] = plane[y * s.w + xx];
        col_plan.run(line.data(), tmp);
        for (std::size_t y = 0; y < s.h; ++y) plane[y * s.w + xx] = line[y];
      }
      T* ore = out.re.plane(ni, ci);
      T* oim = out.im.plane(ni, ci);
      for (std::size_t i = 0; i < s.h * s.w; ++i) {
        ore[i] = plane[i].real();
        oim[i] = plane[i].imag();
      }
    }
  }
  return out;
}

// Circular shift by (sy, sx) in every plane.
template <typename T>
Tensor<T> roll(const Tensor<T>& x, std::size_t sy, std::size_t sx) {
  Tensor<T> out(x.shape());
  const std::size_t h = x.h();
  const std::size_t w = x.w();
  for (std::size_t ni = 0; ni < x.n(); ++ni) {
    for (std::size_t ci = 0; ci < x.c(); ++ci) {
      const T* s = x.plane(ni, ci);
      T* d = out.plane(ni, ci);
      for (std::size_t y = 0; y < h; ++y) {
        const std::size_t dy = (y + sy) % h;
        for (std::size_t xx = 0; xx < w; ++xx) d[dy * w + (xx + sx) % w] = s[y * w + xx];
      }
    }
  }
  return out;
}

}  // namespace

template <typename T>
ComplexTensor<T> fft2(const ComplexTensor<T>& x) {
  return transform(x, false);
}

template <typename T>
ComplexTensor<T> ifft2(const ComplexTensor<T>& x) {
  return transform(x, true);
}

template <typename T>
Tensor<T> fftshift(const Tensor<T>& x) {
  return roll(x, x.h() / 2, x.w() / 2);
}

template <typename T>
Tensor<T> ifftshift(const Tensor<T>& x) {
  return roll(x, (x.h() + 1) / 2, (x.w() + 1) / 2);
}

template <typename T>
ComplexTensor<T> fft2c(const ComplexTensor<T>& x) {
  ComplexTensor<T> k = fft2(ComplexTensor<T>(ifftshift(x.re), ifftshift(x.im)));
  return ComplexTensor<T>(fftshift(k.re), fftshift(k.im));
}

template <typename T>
ComplexTensor<T> ifft2c(const ComplexTensor<T>& x) {
  ComplexTensor<T> k = ifft2(ComplexTensor<T>(ifftshift(x.re), ifftshift(x.im)));
  return ComplexTensor<T>(fftshift(k.re), fftshift(k.im));
}

#define DONET_INSTANTIATE(T)                                       \
  template ComplexTensor<T> fft2(const ComplexTensor<T>&);         \
  template ComplexTensor<T> ifft2(const ComplexTensor<T>&);        \
  template ComplexTensor<T> fft2c(const ComplexTensor<T>&);        \
  template ComplexTensor<T> ifft2c(const ComplexTensor<T>&);       \
  template Tensor<T> fftshift(const Tensor<T>&);                   \
  template Tensor<T> ifftshift(const Tensor<T>&);

DONET_INSTANTIATE(float)
DONET_INSTANTIATE(double)

}  // namespace donet
