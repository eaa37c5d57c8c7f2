#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>

#include "donet/tensor.hpp"

namespace donet {

// Channel partition of one complex feature: `low` channels live at half
// resolution, `high` at full resolution.
struct OctSplit {
  std::size_t high = 0;
  std::size_t low = 0;

  std::size_t total() const { return high + low; }
  friend bool operator==(const OctSplit&, const OctSplit&) = default;
};

// low = round_half_up(alpha * c), high = c - low.
OctSplit split_for(std::size_t channels, double alpha);

// The four frequency/component groups of a complex feature map. High tensors
// are (n, high, h, w); low tensors are (n, low, h/2, w/2). Empty groups keep
// their spatial extent with zero channels.
template <typename T>
struct OctFeature {
  Tensor<T> r_h;
  Tensor<T> i_h;
  Tensor<T> r_l;
  Tensor<T> i_l;
  double alpha = 0.0;

  OctFeature() = default;
  OctFeature(std::size_t n, OctSplit split, std::size_t h, std::size_t w, double alpha);

  OctSplit split() const { return {r_h.c(), r_l.c()}; }
  std::size_t batch() const { return r_h.n(); }
  std::size_t height() const { return r_h.h(); }
  std::size_t width() const { return r_h.w(); }

  OctFeature& operator+=(const OctFeature& o);
};

enum class OctPath : std::size_t { HH = 0, HL = 1, LH = 2, LL = 3 };

const char* path_name(OctPath p);

// Eight real kernel banks: {real, imaginary} x {H->H, H->L, L->H, L->L}.
// Bank for path from->to has shape (out.to, in.from, k, k).
template <typename T>
struct DualOctKernel {
  OctSplit in;
  OctSplit out;
  std::size_t kernel_size = 3;
  std::array<Tensor<T>, 4> re;
  std::array<Tensor<T>, 4> im;

  DualOctKernel() = default;
  DualOctKernel(OctSplit in_split, OctSplit out_split, std::size_t kernel);

  Tensor<T>& real(OctPath p) { return re[static_cast<std::size_t>(p)]; }
  Tensor<T>& imag(OctPath p) { return im[static_cast<std::size_t>(p)]; }
  const Tensor<T>& real(OctPath p) const { return re[static_cast<std::size_t>(p)]; }
  const Tensor<T>& imag(OctPath p) const { return im[static_cast<std::size_t>(p)]; }

  static Shape bank_shape(OctSplit in, OctSplit out, std::size_t kernel, OctPath p);
};

// First round_half_up(alpha*c) channels are pooled into the low groups.
template <typename T>
OctFeature<T> split_frequency(const ComplexTensor<T>& x, double alpha);
template <typename T>
ComplexTensor<T> split_frequency_backward(const OctFeature<T>& grad);

// re = conv(x.re, kr) - conv(x.im, ki);  im = conv(x.re, ki) + conv(x.im, kr)
template <typename T>
ComplexTensor<T> complex_conv2d(const ComplexTensor<T>& x, const Tensor<T>& kr, const Tensor<T>& ki);

template <typename T>
struct ComplexConvGrads {
  ComplexTensor<T> input;
  Tensor<T> kr;
  Tensor<T> ki;
};

template <typename T>
ComplexConvGrads<T> complex_conv2d_backward(const ComplexTensor<T>& grad_out, const ComplexTensor<T>& x,
                                            const Tensor<T>& kr, const Tensor<T>& ki);

// Octave routing combined with complex arithmetic:
//   Y^H = K^{H->H} * X^H + u(K^{L->H} * X^L)
//   Y^L = K^{L->L} * X^L + K^{H->L} * p(X^H)
// where each `*` is complex_conv2d, u nearest x2 upsampling, p 2x2 average pooling.
template <typename T>
OctFeature<T> dual_octconv_forward(const OctFeature<T>& x, const DualOctKernel<T>& k);

template <typename T>
struct DualOctGrads {
  OctFeature<T> input;
  DualOctKernel<T> kernel;
};

template <typename T>
DualOctGrads<T> dual_octconv_backward(const OctFeature<T>& grad_out, const OctFeature<T>& x,
                                      const DualOctKernel<T>& k);

// u(c(r_l, i_l)) + c(r_h, i_h). An empty branch contributes nothing; when both
// are present they must carry equal channel counts. Output channels: real half
// then imaginary half.
template <typename T>
Tensor<T> merge_frequency(const OctFeature<T>& x);
template <typename T>
OctFeature<T> merge_frequency_backward(const Tensor<T>& grad_out, OctSplit split, double alpha);

struct FlopsReport {
  std::uint64_t total_mul_adds = 0;
  std::map<std::string, std::uint64_t> per_path;
  double alpha = 0.0;
};

// Multiply-adds of one Dual-OctConv layer at full resolution h x w. Each of the
// eight banks costs out*in*k*k*h_path*w_path, counted at the resolution the
// convolution runs at (half resolution for H->L, L->H and L->L).
FlopsReport count_flops(OctSplit in, OctSplit out, std::size_t h, std::size_t w, std::size_t kernel,
                        double alpha);
FlopsReport count_flops(std::size_t c_in, std::size_t c_out, double alpha, std::size_t h, std::size_t w,
                        std::size_t kernel);

}  // namespace donet
