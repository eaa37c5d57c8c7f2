#include "donet/ops.hpp"

#include <Eigen/Core>
#include <algorithm>

#include "donet/parallel.hpp"

namespace donet {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapMat = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMapMat = Eigen::Map<const RowMat<T>>;

void check_kernel(const Shape& k) {
  if (k.h % 2 == 0 || k.w % 2 == 0) {
    throw ShapeError("conv2d: SAME padding needs odd kernel sizes, got " + to_string(k));
  }
}

// Unfolds one sample (in, h, w) into (in*kh*kw, h*w) patches with zero padding.
template <typename T>
void im2col(const T* src, std::size_t in, std::size_t h, std::size_t w, std::size_t kh, std::size_t kw,
            T* col) {
  const long ph = static_cast<long>(kh / 2);
  const long pw = static_cast<long>(kw / 2);
  const long H = static_cast<long>(h);
  const long W = static_cast<long>(w);
  for (std::size_t ci = 0; ci < in; ++ci) {
    const T* plane = src + ci * h * w;
    for (std::size_t dy = 0; dy < kh; ++dy) {
      for (std::size_t dx = 0; dx < kw; ++dx) {
        T* row = col + ((ci * kh + dy) * kw + dx) * h * w;
        const long oy = static_cast<long>(dy) - ph;
        const long ox = static_cast<long>(dx) - pw;
        for (long y = 0; y < H; ++y) {
          const long sy = y + oy;
          T* dst = row + y * W;
          if (sy < 0 || sy >= H) {
            std::fill(dst, dst + W, T(0));
            continue;
          }
          const T* s = plane + sy * W;
          for (long x = 0; x < W; ++x) {
            const long sx = x + ox;
            dst[x] = (sx >= 0 && sx < W) ? s[sx] : T(0);
          }
        }
      }
    }
  }
}

// Adjoint of im2col: scatter-add patches back into (in, h, w).
template <typename T>
void col2im(const T* col, std::size_t in, std::size_t h, std::size_t w, std::size_t kh, std::size_t kw, T* dst) {
  const long ph = static_cast<long>(kh / 2);
  const long pw = static_cast<long>(kw / 2);
  const long H = static_cast<long>(h);
  const long W = static_cast<long>(w);
  std::fill(dst, dst + in * h * w, T(0));
  for (std::size_t ci = 0; ci < in; ++ci) {
    T* plane = dst + ci * h * w;
    for (std::size_t dy = 0; dy < kh; ++dy) {
      for (std::size_t dx = 0; dx < kw; ++dx) {
        const T* row = col + ((ci * kh + dy) * kw + dx) * h * w;
        const long oy = static_cast<long>(dy) - ph;
        const long ox = static_cast<long>(dx) - pw;
        for (long y = 0; y < H; ++y) {
          const long sy = y + oy;
          if (sy < 0 || sy >= H) continue;
          const T* s = row + y * W;
          T* d = plane + sy * W;
          for (long x = 0; x < W; ++x) {
            const long sx = x + ox;
            if (sx >= 0 && sx < W) d[sx] += s[x];
          }
        }
      }
    }
  }
}

}  // namespace

template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& k) {
  const Shape& ks = k.shape();
  check_kernel(ks);
  if (x.c() != ks.c) {
    throw ShapeError("conv2d: input has " + std::to_string(x.c()) + " channels, kernel expects " +
                     std::to_string(ks.c));
  }
  const std::size_t hw = x.h() * x.w();
  Tensor<T> out(Shape{x.n(), ks.n, x.h(), x.w()});
  if (ks.n == 0 || ks.c == 0 || hw == 0 || x.n() == 0) return out;
  const std::size_t rows = ks.c * ks.h * ks.w;
  const bool pointwise = ks.h == 1 && ks.w == 1;
  ConstMapMat<T> kmat(k.data().data(), static_cast<long>(ks.n), static_cast<long>(rows));
  parallel_for(x.n(), [&](std::size_t ni) {
    std::vector<T> col;
    const T* cp = x.plane(ni, 0);
    if (!pointwise) {
      col.resize(rows * hw);
      im2col(x.plane(ni, 0), ks.c, x.h(), x.w(), ks.h, ks.w, col.data());
      cp = col.data();
    }
    ConstMapMat<T> cm(cp, static_cast<long>(rows), static_cast<long>(hw));
    MapMat<T> om(out.plane(ni, 0), static_cast<long>(ks.n), static_cast<long>(hw));
    om.noalias() = kmat * cm;
  });
  return out;
}

template <typename T>
Tensor<T> conv2d_grad_input(const Tensor<T>& grad_out, const Tensor<T>& k) {
  const Shape& ks = k.shape();
  check_kernel(ks);
  if (grad_out.c() != ks.n) throw ShapeError("conv2d_grad_input: gradient channels do not match kernel");
  const std::size_t hw = grad_out.h() * grad_out.w();
  Tensor<T> gin(Shape{grad_out.n(), ks.c, grad_out.h(), grad_out.w()});
  if (ks.n == 0 || ks.c == 0 || hw == 0 || grad_out.n() == 0) return gin;
  const std::size_t rows = ks.c * ks.h * ks.w;
  const bool pointwise = ks.h == 1 && ks.w == 1;
  ConstMapMat<T> kmat(k.data().data(), static_cast<long>(ks.n), static_cast<long>(rows));
  parallel_for(grad_out.n(), [&](std::size_t ni) {
    ConstMapMat<T> gm(grad_out.plane(ni, 0), static_cast<long>(ks.n), static_cast<long>(hw));
    if (pointwise) {
      MapMat<T> dm(gin.plane(ni, 0), static_cast<long>(rows), static_cast<long>(hw));
      dm.noalias() = kmat.transpose() * gm;
      return;
    }
    std::vector<T> col(rows * hw);
    MapMat<T> cm(col.data(), static_cast<long>(rows), static_cast<long>(hw));
    cm.noalias() = kmat.transpose() * gm;
    col2im(col.data(), ks.c, grad_out.h(), grad_out.w(), ks.h, ks.w, gin.plane(ni, 0));
  });
  return gin;
}

template <typename T>
Tensor<T> conv2d_grad_kernel(const Tensor<T>& grad_out, const Tensor<T>& x, const Shape& ks) {
  check_kernel(ks);
  if (grad_out.c() != ks.n || x.c() != ks.c || grad_out.n() != x.n() || grad_out.h() != x.h() ||
      grad_out.w() != x.w()) {
    throw ShapeError("conv2d_grad_kernel: shape mismatch");
  }
  Tensor<T> gk(ks);
  const std::size_t hw = x.h() * x.w();
  if (ks.n == 0 || ks.c == 0 || hw == 0 || x.n() == 0) return gk;
  const std::size_t rows = ks.c * ks.h * ks.w;
  const bool pointwise = ks.h == 1 && ks.w == 1;
  std::vector<std::vector<T>> partial(x.n());
  parallel_for(x.n(), [&](std::size_t ni) {
    std::vector<T> col;
    const T* cp = x.plane(ni, 0);
    if (!pointwise) {
      col.resize(rows * hw);
      im2col(x.plane(ni, 0), ks.c, x.h(), x.w(), ks.h, ks.w, col.data());
      cp = col.data();
    }
    ConstMapMat<T> cm(cp, static_cast<long>(rows), static_cast<long>(hw));
    ConstMapMat<T> gm(grad_out.plane(ni, 0), static_cast<long>(ks.n), static_cast<long>(hw));
    partial[ni].resize(ks.numel());
    MapMat<T> pm(partial[ni].data(), static_cast<long>(ks.n), static_cast<long>(rows));
    pm.noalias() = gm * cm.transpose();
  });
  auto dst = gk.data();
  for (const auto& p : partial) {
    for (std::size_t i = 0; i < p.size(); ++i) dst[i] += p[i];
  }
  return gk;
}

template <typename T>
Tensor<T> avg_pool2(const Tensor<T>& x) {
  if (x.h() % 2 != 0 || x.w() % 2 != 0) {
    throw ShapeError("avg_pool2: spatial dims must be even, got " + to_string(x.shape()));
  }
  const std::size_t oh = x.h() / 2;
  const std::size_t ow = x.w() / 2;
  Tensor<T> out(Shape{x.n(), x.c(), oh, ow});
  for (std::size_t ni = 0; ni < x.n(); ++ni) {
    for (std::size_t ci = 0; ci < x.c(); ++ci) {
      const T* s = x.plane(ni, ci);
      T* d = out.plane(ni, ci);
      for (std::size_t y = 0; y < oh; ++y) {
        const T* r0 = s + (2 * y) * x.w();
        const T* r1 = r0 + x.w();
        for (std::size_t xx = 0; xx < ow; ++xx) {
          d[y * ow + xx] = (r0[2 * xx] + r0[2 * xx + 1] + r1[2 * xx] + r1[2 * xx + 1]) / T(4);
        }
      }
    }
  }
  return out;
}

template <typename T>
Tensor<T> upsample_nearest2(const Tensor<T>& x) {
  const std::size_t oh = x.h() * 2;
  const std::size_t ow = x.w() * 2;
  Tensor<T> out(Shape{x.n(), x.c(), oh, ow});
  for (std::size_t ni = 0; ni < x.n(); ++ni) {
    for (std::size_t ci = 0; ci < x.c(); ++ci) {
      const T* s = x.plane(ni, ci);
      T* d = out.plane(ni, ci);
      for (std::size_t y = 0; y < oh; ++y) {
        const T* sr = s + (y / 2) * x.w();
        T* dr = d + y * ow;
        for (std::size_t xx = 0; xx < ow; ++xx) dr[xx] = sr[xx / 2];
      }
    }
  }
  return out;
}

template <typename T>
Tensor<T> avg_pool2_adjoint(const Tensor<T>& grad_out) {
  Tensor<T> g = upsample_nearest2(grad_out);
  g *= T(0.25);
  return g;
}

template <typename T>
Tensor<T> upsample_nearest2_adjoint(const Tensor<T>& grad_out) {
  if (grad_out.h() % 2 != 0 || grad_out.w() % 2 != 0) {
    throw ShapeError("upsample_nearest2_adjoint: spatial dims must be even");
  }
  const std::size_t oh = grad_out.h() / 2;
  const std::size_t ow = grad_out.w() / 2;
  Tensor<T> out(Shape{grad_out.n(), grad_out.c(), oh, ow});
  for (std::size_t ni = 0; ni < grad_out.n(); ++ni) {
    for (std::size_t ci = 0; ci < grad_out.c(); ++ci) {
      const T* s = grad_out.plane(ni, ci);
      T* d = out.plane(ni, ci);
      for (std::size_t y = 0; y < oh; ++y) {
        const T* r0 = s + (2 * y) * grad_out.w();
        const T* r1 = r0 + grad_out.w();
        for (std::size_t xx = 0; xx < ow; ++xx) {
          d[y * ow + xx] = r0[2 * xx] + r0[2 * xx + 1] + r1[2 * xx] + r1[2 * xx + 1];
        }
      }
    }
  }
  return out;
}

template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.c() == 0 && a.n() == 0) return b;
  if (b.c() == 0 && b.n() == 0) return a;
  if (a.n() != b.n() || a.h() != b.h() || a.w() != b.w()) {
    throw ShapeError("concat_channels: " + to_string(a.shape()) + " vs " + to_string(b.shape()));
  }
  Tensor<T> out(Shape{a.n(), a.c() + b.c(), a.h(), a.w()});
  const std::size_t pa = a.c() * a.h() * a.w();
  const std::size_t pb = b.c() * b.h() * b.w();
  for (std::size_t ni = 0; ni < a.n(); ++ni) {
    T* d = out.data().data() + ni * (pa + pb);
    std::copy_n(a.data().data() + ni * pa, pa, d);
    std::copy_n(b.data().data() + ni * pb, pb, d + pa);
  }
  return out;
}

template <typename T>
Tensor<T> slice_channels(const Tensor<T>& x, std::size_t begin, std::size_t count) {
  if (begin + count > x.c()) {
    throw ShapeError("slice_channels: [" + std::to_string(begin) + "," + std::to_string(begin + count) +
                     ") out of " + std::to_string(x.c()));
  }
  Tensor<T> out(Shape{x.n(), count, x.h(), x.w()});
  const std::size_t p = x.h() * x.w();
  for (std::size_t ni = 0; ni < x.n(); ++ni) {
    if (count > 0) std::copy_n(x.plane(ni, begin), count * p, out.plane(ni, 0));
  }
  return out;
}

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  Tensor<T> out(x.shape());
  auto s = x.data();
  auto d = out.data();
  for (std::size_t i = 0; i < s.size(); ++i) d[i] = s[i] > T(0) ? s[i] : T(0);
  return out;
}

template <typename T>
Tensor<T> relu_backward(const Tensor<T>& grad_out, const Tensor<T>& x) {
  if (!(grad_out.shape() == x.shape())) throw ShapeError("relu_backward: shape mismatch");
  Tensor<T> out(x.shape());
  auto g = grad_out.data();
  auto s = x.data();
  auto d = out.data();
  for (std::size_t i = 0; i < s.size(); ++i) d[i] = s[i] > T(0) ? g[i] : T(0);
  return out;
}

#define DONET_INSTANTIATE(T)                                                          \
  template Tensor<T> conv2d(const Tensor<T>&, const Tensor<T>&);                      \
  template Tensor<T> conv2d_grad_input(const Tensor<T>&, const Tensor<T>&);           \
  template Tensor<T> conv2d_grad_kernel(const Tensor<T>&, const Tensor<T>&, const Shape&); \
  template Tensor<T> avg_pool2(const Tensor<T>&);                                     \
  template Tensor<T> avg_pool2_adjoint(const Tensor<T>&);                             \
  template Tensor<T> upsample_nearest2(const Tensor<T>&);                             \
  template Tensor<T> upsample_nearest2_adjoint(const Tensor<T>&);                     \
  template Tensor<T> concat_channels(const Tensor<T>&, const Tensor<T>&);             \
  template Tensor<T> slice_channels(const Tensor<T>&, std::size_t, std::size_t);      \
  template Tensor<T> relu(const Tensor<T>&);                                          \
  template Tensor<T> relu_backward(const Tensor<T>&, const Tensor<T>&);

DONET_INSTANTIATE(float)
DONET_INSTANTIATE(double)

}  // namespace donet
