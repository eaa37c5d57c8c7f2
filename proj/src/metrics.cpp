#include "donet/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace donet {

namespace {

constexpr std::size_t kWin = 11;

std::array<double, kWin> gaussian_window() {
  std::array<double, kWin> g{};
  double sum = 0.0;
  for (std::size_t i = 0; i < kWin; ++i) {
    const double d = static_cast<double>(i) - 5.0;
    g[i] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
    sum += g[i];
  }
  for (auto& v : g) v /= sum;
  return g;
}

// Separable valid-mode filtering of an h x w plane.
std::vector<double> filter_valid(const std::vector<double>& img, std::size_t h, std::size_t w,
                                 const std::array<double, kWin>& g) {
  const std::size_t oh = h - kWin + 1;
  const std::size_t ow = w - kWin + 1;
  std::vector<double> rows(h * ow);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      double s = 0.0;
      for (std::size_t k = 0; k < kWin; ++k) s += g[k] * img[y * w + x + k];
      rows[y * ow + x] = s;
    }
  }
  std::vector<double> out(oh * ow);
  for (std::size_t y = 0; y < oh; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      double s = 0.0;
      for (std::size_t k = 0; k < kWin; ++k) s += g[k] * rows[(y + k) * ow + x];
      out[y * ow + x] = s;
    }
  }
  return out;
}

}  // namespace

template <typename T>
Tensor<T> coil_combine(const ComplexTensor<T>& x) {
  const Shape s = x.shape();
  if (s.c < 1) throw ShapeError("coil_combine needs at least one coil");
  Tensor<T> out(Shape{s.n, 1, s.h, s.w});
  const std::size_t P = s.plane();
  for (std::size_t n = 0; n < s.n; ++n) {
    T* o = out.plane(n, 0);
    for (std::size_t i = 0; i < P; ++i) {
      double acc = 0.0;
      for (std::size_t c = 0; c < s.c; ++c) {
        const double re = x.re.plane(n, c)[i];
        const double im = x.im.plane(n, c)[i];
        acc += re * re + im * im;
      }
      o[i] = static_cast<T>(std::sqrt(acc));
    }
  }
  return out;
}

template <typename T>
double psnr(const Tensor<T>& test, const Tensor<T>& ref) {
  if (test.shape() != ref.shape()) {
    throw ShapeError("psnr: " + to_string(test.shape()) + " vs " + to_string(ref.shape()));
  }
  auto a = test.data();
  auto b = ref.data();
  double peak = -INFINITY;
  double se = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    peak = std::max(peak, static_cast<double>(b[i]));
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    se += d * d;
  }
  const double mse = se / static_cast<double>(a.size());
  if (mse < 1e-12 * peak * peak) return kPsnrSentinel;
  return 10.0 * std::log10(peak * peak / mse);
}

template <typename T>
SsimComponents ssim_components(const Tensor<T>& test, const Tensor<T>& ref) {
  if (test.shape() != ref.shape()) {
    throw ShapeError("ssim: " + to_string(test.shape()) + " vs " + to_string(ref.shape()));
  }
  const Shape s = ref.shape();
  if (s.n * s.c != 1) throw ShapeError("ssim expects a single image, got " + to_string(s));
  if (s.h < kWin || s.w < kWin) throw ConfigError("ssim needs images of at least 11x11");

  std::vector<double> x(test.data().begin(), test.data().end());
  std::vector<double> y(ref.data().begin(), ref.data().end());
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  double range = *hi - *lo;
  if (!(range > 0.0)) range = 1.0;
  const double c1 = (0.01 * range) * (0.01 * range);
  const double c2 = (0.03 * range) * (0.03 * range);
  const double c3 = c2 / 2.0;

  std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const auto g = gaussian_window();
  const auto mx = filter_valid(x, s.h, s.w, g);
  const auto my = filter_valid(y, s.h, s.w, g);
  const auto mxx = filter_valid(xx, s.h, s.w, g);
  const auto myy = filter_valid(yy, s.h, s.w, g);
  const auto mxy = filter_valid(xy, s.h, s.w, g);

  SsimComponents out;
  for (std::size_t i = 0; i < mx.size(); ++i) {
    const double vx = std::max(0.0, mxx[i] - mx[i] * mx[i]);
    const double vy = std::max(0.0, myy[i] - my[i] * my[i]);
    const double cov = mxy[i] - mx[i] * my[i];
    const double lum = (2.0 * mx[i] * my[i] + c1) / (mx[i] * mx[i] + my[i] * my[i] + c1);
    const double cs = (2.0 * cov + c2) / (vx + vy + c2);
    const double sx = std::sqrt(vx);
    const double sy = std::sqrt(vy);
    out.ssim += lum * cs;
    out.luminance += lum;
    out.contrast += (2.0 * sx * sy + c2) / (vx + vy + c2);
    out.structure += (cov + c3) / (sx * sy + c3);
  }
  const double m = static_cast<double>(mx.size());
  out.ssim /= m;
  out.luminance /= m;
  out.contrast /= m;
  out.structure /= m;
  return out;
}

#define DONET_INSTANTIATE(T)                                                    \
  template Tensor<T> coil_combine(const ComplexTensor<T>&);                     \
  template double psnr(const Tensor<T>&, const Tensor<T>&);                     \
  template SsimComponents ssim_components(const Tensor<T>&, const Tensor<T>&);

DONET_INSTANTIATE(float)
DONET_INSTANTIATE(double)

}  // namespace donet
