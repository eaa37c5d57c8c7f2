#include "donet/layers.hpp"

#include <cmath>

#include "donet/ops.hpp"

namespace donet {

template <typename T>
void zero_grads(std::span<const ParamRef<T>> params) {
  for (const auto& p : params) {
    if (p.grad) p.grad->fill(T(0));
  }
}

// ---------------------------------------------------------------------------
// BatchNorm

template <typename T>
BatchNorm<T>::BatchNorm(std::string name, std::size_t channels)
    : gamma(Shape{1, channels, 1, 1}, T(1)),
      beta(Shape{1, channels, 1, 1}),
      running_mean(Shape{1, channels, 1, 1}),
      running_var(Shape{1, channels, 1, 1}, T(1)),
      gamma_grad(Shape{1, channels, 1, 1}),
      beta_grad(Shape{1, channels, 1, 1}),
      name_(std::move(name)) {}

template <typename T>
Tensor<T> BatchNorm<T>::forward(const Tensor<T>& x, BnMode mode) {
  mode_ = mode;
  if (mode == BnMode::Bypass) return x;
  if (x.c() != gamma.c()) throw ShapeError("BatchNorm " + name_ + ": channel mismatch");
  const std::size_t C = x.c();
  const std::size_t P = x.h() * x.w();
  const std::size_t count = x.n() * P;
  Tensor<T> y(x.shape());
  inv_std_.assign(C, T(0));
  if (mode == BnMode::Train) xhat_ = Tensor<T>(x.shape());
  for (std::size_t c = 0; c < C; ++c) {
    T mean;
    T var;
    if (mode == BnMode::Train) {
      double s = 0;
      for (std::size_t n = 0; n < x.n(); ++n) {
        const T* p = x.plane(n, c);
        for (std::size_t i = 0; i < P; ++i) s += p[i];
      }
      const double m = s / static_cast<double>(count);
      double v = 0;
      for (std::size_t n = 0; n < x.n(); ++n) {
        const T* p = x.plane(n, c);
        for (std::size_t i = 0; i < P; ++i) v += (p[i] - m) * (p[i] - m);
      }
      mean = static_cast<T>(m);
      var = static_cast<T>(v / static_cast<double>(count));
      const double unbiased = count > 1 ? v / static_cast<double>(count - 1) : v;
      auto rm = running_mean.data();
      auto rv = running_var.data();
      rm[c] = static_cast<T>((1.0 - kMomentum) * rm[c] + kMomentum * m);
      rv[c] = static_cast<T>((1.0 - kMomentum) * rv[c] + kMomentum * unbiased);
    } else {
      mean = running_mean.data()[c];
      var = running_var.data()[c];
    }
    const T inv = T(1) / std::sqrt(var + static_cast<T>(kEps));
    inv_std_[c] = inv;
    const T g = gamma.data()[c];
    const T b = beta.data()[c];
    for (std::size_t n = 0; n < x.n(); ++n) {
      const T* p = x.plane(n, c);
      T* q = y.plane(n, c);
      T* xh = mode == BnMode::Train ? xhat_.plane(n, c) : nullptr;
      for (std::size_t i = 0; i < P; ++i) {
        const T v = (p[i] - mean) * inv;
        if (xh) xh[i] = v;
        q[i] = g * v + b;
      }
    }
  }
  return y;
}

template <typename T>
Tensor<T> BatchNorm<T>::backward(const Tensor<T>& g) {
  if (mode_ == BnMode::Bypass) return g;
  const std::size_t C = g.c();
  const std::size_t P = g.h() * g.w();
  const T count = static_cast<T>(g.n() * P);
  Tensor<T> dx(g.shape());
  for (std::size_t c = 0; c < C; ++c) {
    const T gam = gamma.data()[c];
    const T inv = inv_std_[c];
    if (mode_ == BnMode::Eval) {
      for (std::size_t n = 0; n < g.n(); ++n) {
        const T* gp = g.plane(n, c);
        T* d = dx.plane(n, c);
        for (std::size_t i = 0; i < P; ++i) d[i] = gp[i] * gam * inv;
      }
      continue;  // eval mode propagates input gradients only
    }
    T sum_g = 0;
    T sum_gx = 0;
    for (std::size_t n = 0; n < g.n(); ++n) {
      const T* gp = g.plane(n, c);
      const T* xh = xhat_.plane(n, c);
      for (std::size_t i = 0; i < P; ++i) {
        sum_g += gp[i];
        sum_gx += gp[i] * xh[i];
      }
    }
    gamma_grad.data()[c] += sum_gx;
    beta_grad.data()[c] += sum_g;
    for (std::size_t n = 0; n < g.n(); ++n) {
      const T* gp = g.plane(n, c);
      const T* xh = xhat_.plane(n, c);
      T* d = dx.plane(n, c);
      for (std::size_t i = 0; i < P; ++i) {
        d[i] = gam * inv * (gp[i] - sum_g / count - xh[i] * sum_gx / count);
      }
    }
  }
  return dx;
}

template <typename T>
void BatchNorm<T>::collect(std::vector<ParamRef<T>>& out) {
  out.push_back({name_ + ".gamma", &gamma, &gamma_grad});
  out.push_back({name_ + ".beta", &beta, &beta_grad});
  out.push_back({name_ + ".running_mean", &running_mean, nullptr});
  out.push_back({name_ + ".running_var", &running_var, nullptr});
}

// ---------------------------------------------------------------------------
// OctConvLayer

template <typename T>
OctConvLayer<T>::OctConvLayer(std::string name, OctSplit in, OctSplit out, std::size_t kernel)
    : weight(in, out, kernel), grad(in, out, kernel), name_(std::move(name)) {}

template <typename T>
OctFeature<T> OctConvLayer<T>::forward(const OctFeature<T>& x) {
  input_ = x;
  return dual_octconv_forward(x, weight);
}

template <typename T>
OctFeature<T> OctConvLayer<T>::backward(const OctFeature<T>& g) {
  DualOctGrads<T> r = dual_octconv_backward(g, input_, weight);
  for (std::size_t p = 0; p < 4; ++p) {
    grad.re[p] += r.kernel.re[p];
    grad.im[p] += r.kernel.im[p];
  }
  return std::move(r.input);
}

template <typename T>
void OctConvLayer<T>::collect(std::vector<ParamRef<T>>& out) {
  static const char* tags[4] = {"HH", "HL", "LH", "LL"};
  for (std::size_t p = 0; p < 4; ++p) {
    out.push_back({name_ + ".re_" + tags[p], &weight.re[p], &grad.re[p]});
    out.push_back({name_ + ".im_" + tags[p], &weight.im[p], &grad.im[p]});
  }
}

// ---------------------------------------------------------------------------
// DenseFuseUnit

namespace {

template <typename T>
const Tensor<T>& group_of(const OctFeature<T>& f, std::size_t g) {
  switch (g) {
    case 0: return f.r_h;
    case 1: return f.i_h;
    case 2: return f.r_l;
    default: return f.i_l;
  }
}

template <typename T>
Tensor<T>& group_of(OctFeature<T>& f, std::size_t g) {
  switch (g) {
    case 0: return f.r_h;
    case 1: return f.i_h;
    case 2: return f.r_l;
    default: return f.i_l;
  }
}

std::size_t band_width(const OctSplit& s, std::size_t band) { return band == 0 ? s.high : s.low; }

}  // namespace

template <typename T>
DenseFuseUnit<T>::DenseFuseUnit(std::string name, std::vector<OctSplit> history_splits)
    : name_(std::move(name)), history_(std::move(history_splits)) {
  if (history_.empty()) throw ShapeError("DenseFuseUnit: empty history");
  out_ = history_.front();
  static const char* gtags[4] = {"rH", "iH", "rL", "iL"};
  for (std::size_t b = 0; b < 2; ++b) {
    const std::size_t wout = band_width(out_, b);
    const std::size_t win = fused_width(b);
    conv1[b] = Tensor<T>(Shape{wout, win, 1, 1});
    conv3[b] = Tensor<T>(Shape{wout, wout, kFuseKernel, kFuseKernel});
    conv1_grad[b] = Tensor<T>(conv1[b].shape());
    conv3_grad[b] = Tensor<T>(conv3[b].shape());
  }
  for (std::size_t g = 0; g < 4; ++g) {
    const std::size_t b = g / 2;
    bn1[g] = BatchNorm<T>(name_ + ".bn1_" + gtags[g], fused_width(b));
    bn2[g] = BatchNorm<T>(name_ + ".bn2_" + gtags[g], band_width(out_, b));
  }
}

template <typename T>
std::size_t DenseFuseUnit<T>::fused_width(std::size_t band) const {
  std::size_t total = 0;
  for (const auto& s : history_) total += band_width(s, band);
  return total;
}

template <typename T>
OctFeature<T> DenseFuseUnit<T>::forward(std::span<const OctFeature<T>* const> history, BnMode mode) {
  if (history.size() != history_.size()) {
    throw ShapeError("dense_fuse " + name_ + ": expected history of " + std::to_string(history_.size()) +
                     " entries, got " + std::to_string(history.size()));
  }
  const OctFeature<T>& newest = *history.front();
  for (std::size_t j = 0; j < history.size(); ++j) {
    const auto& f = *history[j];
    if (!(f.split() == history_[j]) || f.batch() != newest.batch() || f.height() != newest.height() ||
        f.width() != newest.width()) {
      throw ShapeError("dense_fuse " + name_ + ": inconsistent history entry " + std::to_string(j));
    }
  }
  OctFeature<T> out(newest.batch(), out_, newest.height(), newest.width(), newest.alpha);
  for (std::size_t g = 0; g < 4; ++g) {
    const std::size_t b = g / 2;
    if (band_width(out_, b) == 0) continue;
    Tensor<T> cat = group_of(*history[0], g);
    for (std::size_t j = 1; j < history.size(); ++j) cat = concat_channels(cat, group_of(*history[j], g));
    GroupCache& gc = cache_[g];
    gc.a1 = bn1[g].forward(cat, mode);
    gc.r1 = relu(gc.a1);
    gc.a2 = bn2[g].forward(conv2d(gc.r1, conv1[b]), mode);
    gc.r2 = relu(gc.a2);
    group_of(out, g) = conv2d(gc.r2, conv3[b]);
  }
  return out;
}

template <typename T>
std::vector<OctFeature<T>> DenseFuseUnit<T>::backward(const OctFeature<T>& grad_out) {
  std::vector<OctFeature<T>> grads;
  grads.reserve(history_.size());
  for (const auto& s : history_) {
    grads.emplace_back(grad_out.batch(), s, grad_out.height(), grad_out.width(), grad_out.alpha);
  }
  for (std::size_t g = 0; g < 4; ++g) {
    const std::size_t b = g / 2;
    if (band_width(out_, b) == 0) continue;
    GroupCache& gc = cache_[g];
    const Tensor<T>& go = group_of(grad_out, g);
    conv3_grad[b] += conv2d_grad_kernel(go, gc.r2, conv3[b].shape());
    Tensor<T> g_a2 = relu_backward(conv2d_grad_input(go, conv3[b]), gc.a2);
    Tensor<T> g_c1 = bn2[g].backward(g_a2);
    conv1_grad[b] += conv2d_grad_kernel(g_c1, gc.r1, conv1[b].shape());
    Tensor<T> g_a1 = relu_backward(conv2d_grad_input(g_c1, conv1[b]), gc.a1);
    Tensor<T> g_cat = bn1[g].backward(g_a1);
    std::size_t offset = 0;
    for (std::size_t j = 0; j < history_.size(); ++j) {
      const std::size_t wj = band_width(history_[j], b);
      group_of(grads[j], g) = slice_channels(g_cat, offset, wj);
      offset += wj;
    }
  }
  return grads;
}

template <typename T>
void DenseFuseUnit<T>::collect(std::vector<ParamRef<T>>& out) {
  static const char* btags[2] = {"H", "L"};
  for (std::size_t b = 0; b < 2; ++b) {
    out.push_back({name_ + ".conv1_" + btags[b], &conv1[b], &conv1_grad[b]});
    out.push_back({name_ + ".conv3_" + btags[b], &conv3[b], &conv3_grad[b]});
  }
  for (std::size_t g = 0; g < 4; ++g) {
    bn1[g].collect(out);
    bn2[g].collect(out);
  }
}

template <typename T>
OctFeature<T> relu(const OctFeature<T>& x) {
  OctFeature<T> y;
  y.alpha = x.alpha;
  y.r_h = relu(x.r_h);
  y.i_h = relu(x.i_h);
  y.r_l = relu(x.r_l);
  y.i_l = relu(x.i_l);
  return y;
}

template <typename T>
OctFeature<T> relu_backward(const OctFeature<T>& g, const OctFeature<T>& x) {
  OctFeature<T> y;
  y.alpha = x.alpha;
  y.r_h = relu_backward(g.r_h, x.r_h);
  y.i_h = relu_backward(g.i_h, x.i_h);
  y.r_l = relu_backward(g.r_l, x.r_l);
  y.i_l = relu_backward(g.i_l, x.i_l);
  return y;
}

#define DONET_INSTANTIATE(T)                                                    \
  template void zero_grads(std::span<const ParamRef<T>>);                       \
  template class BatchNorm<T>;                                                  \
  template class OctConvLayer<T>;                                               \
  template class DenseFuseUnit<T>;                                              \
  template OctFeature<T> relu(const OctFeature<T>&);                            \
  template OctFeature<T> relu_backward(const OctFeature<T>&, const OctFeature<T>&);

DONET_INSTANTIATE(float)
DONET_INSTANTIATE(double)

}  // namespace donet
