#include "donet/octconv.hpp"

#include <cmath>

#include "donet/ops.hpp"

namespace donet {

OctSplit split_for(std::size_t channels, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
  auto low = static_cast<std::size_t>(std::floor(alpha * static_cast<double>(channels) + 0.5 + 1e-9));
  if (low > channels) low = channels;
  return {channels - low, low};
}

const char* path_name(OctPath p) {
  switch (p) {
    case OctPath::HH: return "H->H";
    case OctPath::HL: return "H->L";
    case OctPath::LH: return "L->H";
    case OctPath::LL: return "L->L";
  }
  return "?";
}

template <typename T>
OctFeature<T>::OctFeature(std::size_t n, OctSplit split, std::size_t h, std::size_t w, double a)
    : r_h(Shape{n, split.high, h, w}),
      i_h(Shape{n, split.high, h, w}),
      r_l(Shape{n, split.low, h / 2, w / 2}),
      i_l(Shape{n, split.low, h / 2, w / 2}),
      alpha(a) {}

template <typename T>
OctFeature<T>& OctFeature<T>::operator+=(const OctFeature& o) {
  r_h += o.r_h;
  i_h += o.i_h;
  r_l += o.r_l;
  i_l += o.i_l;
  return *this;
}

template <typename T>
Shape DualOctKernel<T>::bank_shape(OctSplit in, OctSplit out, std::size_t kernel, OctPath p) {
  switch (p) {
    case OctPath::HH: return {out.high, in.high, kernel, kernel};
    case OctPath::HL: return {out.low, in.high, kernel, kernel};
    case OctPath::LH: return {out.high, in.low, kernel, kernel};
    case OctPath::LL: return {out.low, in.low, kernel, kernel};
  }
  return {};
}

template <typename T>
DualOctKernel<T>::DualOctKernel(OctSplit in_split, OctSplit out_split, std::size_t kernel)
    : in(in_split), out(out_split), kernel_size(kernel) {
  for (std::size_t p = 0; p < 4; ++p) {
    const Shape s = bank_shape(in, out, kernel, static_cast<OctPath>(p));
    re[p] = Tensor<T>(s);
    im[p] = Tensor<T>(s);
  }
}

template <typename T>
OctFeature<T> split_frequency(const ComplexTensor<T>& x, double alpha) {
  const Shape s = x.shape();
  const OctSplit split = split_for(s.c, alpha);
  OctFeature<T> f;
  f.alpha = alpha;
  if (split.low == 0) {
    // Nothing to pool, so odd sizes are fine.
    f.r_l = Tensor<T>(Shape{s.n, 0, s.h / 2, s.w / 2});
    f.i_l = f.r_l;
  } else {
    if (s.h % 2 != 0 || s.w % 2 != 0) {
      throw ShapeError("split_frequency: spatial dims must be even, got " + to_string(s));
    }
    f.r_l = avg_pool2(slice_channels(x.re, 0, split.low));
    f.i_l = avg_pool2(slice_channels(x.im, 0, split.low));
  }
  f.r_h = slice_channels(x.re, split.low, split.high);
  f.i_h = slice_channels(x.im, split.low, split.high);
  return f;
}

template <typename T>
ComplexTensor<T> split_frequency_backward(const OctFeature<T>& grad) {
  if (grad.r_l.c() == 0) return ComplexTensor<T>(grad.r_h, grad.i_h);
  return ComplexTensor<T>(concat_channels(avg_pool2_adjoint(grad.r_l), grad.r_h),
                          concat_channels(avg_pool2_adjoint(grad.i_l), grad.i_h));
}

template <typename T>
ComplexTensor<T> complex_conv2d(const ComplexTensor<T>& x, const Tensor<T>& kr, const Tensor<T>& ki) {
  if (!(kr.shape() == ki.shape())) throw ShapeError("complex_conv2d: real/imaginary kernels differ in shape");
  Tensor<T> re = conv2d(x.re, kr);
  re -= conv2d(x.im, ki);
  Tensor<T> im = conv2d(x.re, ki);
  im += conv2d(x.im, kr);
  return ComplexTensor<T>(std::move(re), std::move(im));
}

template <typename T>
ComplexConvGrads<T> complex_conv2d_backward(const ComplexTensor<T>& g, const ComplexTensor<T>& x,
                                            const Tensor<T>& kr, const Tensor<T>& ki) {
  if (!(kr.shape() == ki.shape())) throw ShapeError("complex_conv2d_backward: kernel shapes differ");
  ComplexConvGrads<T> out;
  // Transpose of [[Kr, -Ki], [Ki, Kr]].
  Tensor<T> gxr = conv2d_grad_input(g.re, kr);
  gxr += conv2d_grad_input(g.im, ki);
  Tensor<T> gxi = conv2d_grad_input(g.im, kr);
  gxi -= conv2d_grad_input(g.re, ki);
  out.input = ComplexTensor<T>(std::move(gxr), std::move(gxi));
  out.kr = conv2d_grad_kernel(g.re, x.re, kr.shape());
  out.kr += conv2d_grad_kernel(g.im, x.im, kr.shape());
  out.ki = conv2d_grad_kernel(g.im, x.re, ki.shape());
  out.ki -= conv2d_grad_kernel(g.re, x.im, ki.shape());
  return out;
}

namespace {

template <typename T>
ComplexTensor<T> high_of(const OctFeature<T>& f) {
  return ComplexTensor<T>(f.r_h, f.i_h);
}
template <typename T>
ComplexTensor<T> low_of(const OctFeature<T>& f) {
  return ComplexTensor<T>(f.r_l, f.i_l);
}
template <typename T>
ComplexTensor<T> pooled(const ComplexTensor<T>& x) {
  return ComplexTensor<T>(avg_pool2(x.re), avg_pool2(x.im));
}

bool active(const Shape& bank) { return bank.n > 0 && bank.c > 0; }

}  // namespace

template <typename T>
OctFeature<T> dual_octconv_forward(const OctFeature<T>& x, const DualOctKernel<T>& k) {
  if (!(x.split() == k.in)) {
    throw ShapeError("dual_octconv_forward: input split (" + std::to_string(x.split().high) + "," +
                     std::to_string(x.split().low) + ") does not match kernel (" + std::to_string(k.in.high) +
                     "," + std::to_string(k.in.low) + ")");
  }
  const std::size_t n = x.batch();
  const std::size_t h = x.height();
  const std::size_t w = x.width();
  OctFeature<T> y(n, k.out, h, w, x.alpha);
  const ComplexTensor<T> xh = high_of(x);
  const ComplexTensor<T> xl = low_of(x);

  if (active(k.real(OctPath::HH).shape())) {
    auto c = complex_conv2d(xh, k.real(OctPath::HH), k.imag(OctPath::HH));
    y.r_h += c.re;
    y.i_h += c.im;
  }
  if (active(k.real(OctPath::LH).shape())) {
    auto c = complex_conv2d(xl, k.real(OctPath::LH), k.imag(OctPath::LH));
    y.r_h += upsample_nearest2(c.re);
    y.i_h += upsample_nearest2(c.im);
  }
  if (active(k.real(OctPath::LL).shape())) {
    auto c = complex_conv2d(xl, k.real(OctPath::LL), k.imag(OctPath::LL));
    y.r_l += c.re;
    y.i_l += c.im;
  }
  if (active(k.real(OctPath::HL).shape())) {
    auto c = complex_conv2d(pooled(xh), k.real(OctPath::HL), k.imag(OctPath::HL));
    y.r_l += c.re;
    y.i_l += c.im;
  }
  return y;
}

template <typename T>
DualOctGrads<T> dual_octconv_backward(const OctFeature<T>& g, const OctFeature<T>& x, const DualOctKernel<T>& k) {
  if (!(x.split() == k.in) || !(g.split() == k.out) || g.batch() != x.batch() || g.height() != x.height() ||
      g.width() != x.width()) {
    throw ShapeError("dual_octconv_backward: gradient/input shapes inconsistent with kernel");
  }
  DualOctGrads<T> out;
  out.input = OctFeature<T>(x.batch(), k.in, x.height(), x.width(), x.alpha);
  out.kernel = DualOctKernel<T>(k.in, k.out, k.kernel_size);
  const ComplexTensor<T> xh = high_of(x);
  const ComplexTensor<T> xl = low_of(x);
  const ComplexTensor<T> gh = high_of(g);
  const ComplexTensor<T> gl = low_of(g);

  auto store = [&](OctPath p, ComplexConvGrads<T>& cg) {
    out.kernel.real(p) = std::move(cg.kr);
    out.kernel.imag(p) = std::move(cg.ki);
  };

  if (active(k.real(OctPath::HH).shape())) {
    auto cg = complex_conv2d_backward(gh, xh, k.real(OctPath::HH), k.imag(OctPath::HH));
    out.input.r_h += cg.input.re;
    out.input.i_h += cg.input.im;
    store(OctPath::HH, cg);
  }
  if (active(k.real(OctPath::LH).shape())) {
    const ComplexTensor<T> g_low(upsample_nearest2_adjoint(gh.re), upsample_nearest2_adjoint(gh.im));
    auto cg = complex_conv2d_backward(g_low, xl, k.real(OctPath::LH), k.imag(OctPath::LH));
    out.input.r_l += cg.input.re;
    out.input.i_l += cg.input.im;
    store(OctPath::LH, cg);
  }
  if (active(k.real(OctPath::LL).shape())) {
    auto cg = complex_conv2d_backward(gl, xl, k.real(OctPath::LL), k.imag(OctPath::LL));
    out.input.r_l += cg.input.re;
    out.input.i_l += cg.input.im;
    store(OctPath::LL, cg);
  }
  if (active(k.real(OctPath::HL).shape())) {
    auto cg = complex_conv2d_backward(gl, pooled(xh), k.real(OctPath::HL), k.imag(OctPath::HL));
    out.input.r_h += avg_pool2_adjoint(cg.input.re);
    out.input.i_h += avg_pool2_adjoint(cg.input.im);
    store(OctPath::HL, cg);
  }
  return out;
}

template <typename T>
Tensor<T> merge_frequency(const OctFeature<T>& x) {
  const OctSplit s = x.split();
  if (s.low == 0) return concat_channels(x.r_h, x.i_h);
  Tensor<T> low = upsample_nearest2(concat_channels(x.r_l, x.i_l));
  if (s.high == 0) return low;
  if (s.low != s.high) {
    throw ShapeError("merge_frequency: low branch has " + std::to_string(s.low) + " channels, high has " +
                     std::to_string(s.high));
  }
  low += concat_channels(x.r_h, x.i_h);
  return low;
}

template <typename T>
OctFeature<T> merge_frequency_backward(const Tensor<T>& g, OctSplit split, double alpha) {
  if (split.low > 0 && split.high > 0 && split.low != split.high) {
    throw ShapeError("merge_frequency_backward: unequal branch widths");
  }
  const std::size_t width = split.high > 0 ? split.high : split.low;
  if (g.c() != 2 * width) throw ShapeError("merge_frequency_backward: gradient channel count mismatch");
  OctFeature<T> out(g.n(), split, g.h(), g.w(), alpha);
  if (split.high > 0) {
    out.r_h = slice_channels(g, 0, width);
    out.i_h = slice_channels(g, width, width);
  }
  if (split.low > 0) {
    Tensor<T> gl = upsample_nearest2_adjoint(g);
    out.r_l = slice_channels(gl, 0, width);
    out.i_l = slice_channels(gl, width, width);
  }
  return out;
}

FlopsReport count_flops(OctSplit in, OctSplit out, std::size_t h, std::size_t w, std::size_t kernel,
                        double alpha) {
  FlopsReport r;
  r.alpha = alpha;
  const std::uint64_t k2 = static_cast<std::uint64_t>(kernel) * kernel;
  const std::uint64_t full = static_cast<std::uint64_t>(h) * w;
  const std::uint64_t half = static_cast<std::uint64_t>(h / 2) * (w / 2);
  const struct {
    OctPath path;
    std::uint64_t o, i, pixels;
  } paths[] = {
      {OctPath::HH, out.high, in.high, full},
      {OctPath::HL, out.low, in.high, half},
      {OctPath::LH, out.high, in.low, half},
      {OctPath::LL, out.low, in.low, half},
  };
  for (const auto& p : paths) {
    const std::uint64_t bank = p.o * p.i * k2 * p.pixels;
    r.per_path[std::string("re:") + path_name(p.path)] = bank;
    r.per_path[std::string("im:") + path_name(p.path)] = bank;
    r.total_mul_adds += 2 * bank;
  }
  return r;
}

FlopsReport count_flops(std::size_t c_in, std::size_t c_out, double alpha, std::size_t h, std::size_t w,
                        std::size_t kernel) {
  return count_flops(split_for(c_in, alpha), split_for(c_out, alpha), h, w, kernel, alpha);
}

#define DONET_INSTANTIATE(T)                                                                          \
  template struct OctFeature<T>;                                                                      \
  template struct DualOctKernel<T>;                                                                   \
  template OctFeature<T> split_frequency(const ComplexTensor<T>&, double);                            \
  template ComplexTensor<T> split_frequency_backward(const OctFeature<T>&);                           \
  template ComplexTensor<T> complex_conv2d(const ComplexTensor<T>&, const Tensor<T>&, const Tensor<T>&); \
  template ComplexConvGrads<T> complex_conv2d_backward(const ComplexTensor<T>&, const ComplexTensor<T>&, \
                                                       const Tensor<T>&, const Tensor<T>&);          \
  template OctFeature<T> dual_octconv_forward(const OctFeature<T>&, const DualOctKernel<T>&);         \
  template DualOctGrads<T> dual_octconv_backward(const OctFeature<T>&, const OctFeature<T>&,          \
                                                 const DualOctKernel<T>&);                            \
  template Tensor<T> merge_frequency(const OctFeature<T>&);                                           \
  template OctFeature<T> merge_frequency_backward(const Tensor<T>&, OctSplit, double);

DONET_INSTANTIATE(float)
DONET_INSTANTIATE(double)

}  // namespace donet
