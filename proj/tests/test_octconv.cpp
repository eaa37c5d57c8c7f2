#include <gtest/gtest.h>

#include <complex>

#include "donet/gradcheck.hpp"
#include "donet/octconv.hpp"
#include "donet/ops.hpp"
#include "test_util.hpp"

using namespace donet;
using donet::testing::dot;
using donet::testing::random_complex;
using donet::testing::random_tensor;

namespace {

using cd = std::complex<double>;

// Plain complex tensors as nested vectors: [n][c][y][x].
using CGrid = std::vector<std::vector<std::vector<std::vector<cd>>>>;

CGrid to_grid(const Tensor<double>& re, const Tensor<double>& im) {
  const Shape s = re.shape();
  CGrid g(s.n, std::vector<std::vector<std::vector<cd>>>(s.c, std::vector<std::vector<cd>>(s.h, std::vector<cd>(s.w))));
  for (std::size_t n = 0; n < s.n; ++n)
    for (std::size_t c = 0; c < s.c; ++c)
      for (std::size_t y = 0; y < s.h; ++y)
        for (std::size_t x = 0; x < s.w; ++x) g[n][c][y][x] = {re(n, c, y, x), im(n, c, y, x)};
  return g;
}

// out[n][o] = sum_i K[o][i] (*) X[n][i], complex SAME cross-correlation.
CGrid complex_corr(const CGrid& x, const Tensor<double>& kr, const Tensor<double>& ki) {
  const std::size_t n = x.size();
  const std::size_t h = n ? x[0].empty() ? 0 : x[0][0].size() : 0;
  const std::size_t w = h ? x[0][0][0].size() : 0;
  const Shape ks = kr.shape();
  CGrid out(n, std::vector<std::vector<std::vector<cd>>>(ks.n, std::vector<std::vector<cd>>(h, std::vector<cd>(w))));
  const long r = static_cast<long>(ks.h / 2);
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t o = 0; o < ks.n; ++o)
      for (long y = 0; y < static_cast<long>(h); ++y)
        for (long xx = 0; xx < static_cast<long>(w); ++xx) {
          cd acc = 0.0;
          for (std::size_t i = 0; i < ks.c; ++i)
            for (long u = -r; u <= r; ++u)
              for (long v = -r; v <= r; ++v) {
                const long yy = y + u, xv = xx + v;
                if (yy < 0 || xv < 0 || yy >= static_cast<long>(h) || xv >= static_cast<long>(w)) continue;
                const cd k(kr(o, i, u + r, v + r), ki(o, i, u + r, v + r));
                acc += k * x[b][i][yy][xv];
              }
          out[b][o][y][xx] = acc;
        }
  return out;
}

CGrid pool(const CGrid& x) {
  CGrid out = x;
  for (auto& n : out)
    for (auto& c : n) {
      std::vector<std::vector<cd>> p(c.size() / 2, std::vector<cd>(c[0].size() / 2));
      for (std::size_t y = 0; y < p.size(); ++y)
        for (std::size_t xx = 0; xx < p[0].size(); ++xx)
          p[y][xx] = (c[2 * y][2 * xx] + c[2 * y][2 * xx + 1] + c[2 * y + 1][2 * xx] + c[2 * y + 1][2 * xx + 1]) / 4.0;
      c = p;
    }
  return out;
}

CGrid upsample(const CGrid& x) {
  CGrid out = x;
  for (auto& n : out)
    for (auto& c : n) {
      std::vector<std::vector<cd>> u(c.size() * 2, std::vector<cd>(c[0].size() * 2));
      for (std::size_t y = 0; y < u.size(); ++y)
        for (std::size_t xx = 0; xx < u[0].size(); ++xx) u[y][xx] = c[y / 2][xx / 2];
      c = u;
    }
  return out;
}

double grid_diff(const CGrid& g, const Tensor<double>& re, const Tensor<double>& im) {
  double d = 0.0;
  for (std::size_t n = 0; n < g.size(); ++n)
    for (std::size_t c = 0; c < g[n].size(); ++c)
      for (std::size_t y = 0; y < g[n][c].size(); ++y)
        for (std::size_t x = 0; x < g[n][c][y].size(); ++x)
          d = std::max(d, std::abs(g[n][c][y][x] - cd(re(n, c, y, x), im(n, c, y, x))));
  return d;
}

CGrid add(CGrid a, const CGrid& b) {
  for (std::size_t n = 0; n < a.size(); ++n)
    for (std::size_t c = 0; c < a[n].size(); ++c)
      for (std::size_t y = 0; y < a[n][c].size(); ++y)
        for (std::size_t x = 0; x < a[n][c][y].size(); ++x) a[n][c][y][x] += b[n][c][y][x];
  return a;
}

template <typename T>
OctFeature<T> random_feature(std::size_t n, OctSplit s, std::size_t h, std::size_t w, double alpha, std::uint64_t seed) {
  OctFeature<T> f(n, s, h, w, alpha);
  f.r_h = random_tensor<T>(f.r_h.shape(), seed);
  f.i_h = random_tensor<T>(f.i_h.shape(), seed + 1);
  f.r_l = random_tensor<T>(f.r_l.shape(), seed + 2);
  f.i_l = random_tensor<T>(f.i_l.shape(), seed + 3);
  return f;
}

template <typename T>
DualOctKernel<T> random_kernel(OctSplit in, OctSplit out, std::size_t k, std::uint64_t seed) {
  DualOctKernel<T> d(in, out, k);
  for (std::size_t p = 0; p < 4; ++p) {
    d.re[p] = random_tensor<T>(d.re[p].shape(), seed + 2 * p, -0.5, 0.5);
    d.im[p] = random_tensor<T>(d.im[p].shape(), seed + 2 * p + 1, -0.5, 0.5);
  }
  return d;
}

double feature_dot(const OctFeature<double>& a, const OctFeature<double>& b) {
  return dot(a.r_h, b.r_h) + dot(a.i_h, b.i_h) + dot(a.r_l, b.r_l) + dot(a.i_l, b.i_l);
}

}  // namespace

TEST(SplitFor, RoundsHalfUp) {
  EXPECT_EQ(split_for(64, 0.125), (OctSplit{56, 8}));
  EXPECT_EQ(split_for(4, 0.125), (OctSplit{3, 1}));  // 0.5 rounds up
  EXPECT_EQ(split_for(2, 0.125), (OctSplit{2, 0}));
  EXPECT_EQ(split_for(4, 0.25), (OctSplit{3, 1}));
  EXPECT_EQ(split_for(12, 0.125), (OctSplit{10, 2}));  // 1.5 rounds up
  EXPECT_EQ(split_for(16, 0.0), (OctSplit{16, 0}));
  EXPECT_EQ(split_for(16, 1.0), (OctSplit{0, 16}));
  EXPECT_THROW(split_for(16, -0.1), ConfigError);
  EXPECT_THROW(split_for(16, 1.5), ConfigError);
}

TEST(SplitFrequency, PoolsTheLeadingChannels) {
  const auto x = random_complex<double>(Shape{2, 4, 6, 8}, 1);
  const auto f = split_frequency(x, 0.5);
  EXPECT_EQ(f.split(), (OctSplit{2, 2}));
  EXPECT_EQ(f.r_l.shape(), (Shape{2, 2, 3, 4}));
  EXPECT_DOUBLE_EQ(f.r_l(1, 1, 2, 3), 0.25 * (x.re(1, 1, 4, 6) + x.re(1, 1, 4, 7) + x.re(1, 1, 5, 6) + x.re(1, 1, 5, 7)));
  EXPECT_DOUBLE_EQ(f.i_h(0, 1, 5, 7), x.im(0, 3, 5, 7));
  const auto g = random_feature<double>(2, f.split(), 6, 8, 0.5, 5);
  EXPECT_NEAR(feature_dot(f, g), donet::testing::dot(x, split_frequency_backward(g)), 1e-12);
}

TEST(ComplexConv, MatchesComplexArithmeticOracle) {
  const auto x = random_complex<double>(Shape{2, 3, 6, 5}, 11);
  const auto kr = random_tensor<double>(Shape{2, 3, 3, 3}, 12);
  const auto ki = random_tensor<double>(Shape{2, 3, 3, 3}, 13);
  const auto y = complex_conv2d(x, kr, ki);
  EXPECT_LT(grid_diff(complex_corr(to_grid(x.re, x.im), kr, ki), y.re, y.im), 1e-12);
}

TEST(ComplexConv, BackwardPassesFiniteDifferences) {
  auto x = random_complex<double>(Shape{2, 2, 5, 4}, 21);
  auto kr = random_tensor<double>(Shape{3, 2, 3, 3}, 22);
  auto ki = random_tensor<double>(Shape{3, 2, 3, 3}, 23);
  const auto g = random_complex<double>(Shape{2, 3, 5, 4}, 24);
  const auto grads = complex_conv2d_backward(g, x, kr, ki);
  std::vector<GradCheckParam<double>> params{{"x.re", x.re.data(), grads.input.re.data()},
                                             {"x.im", x.im.data(), grads.input.im.data()},
                                             {"kr", kr.data(), grads.kr.data()},
                                             {"ki", ki.data(), grads.ki.data()}};
  const auto rep = finite_diff_grad<double>([&] { return dot(complex_conv2d(x, kr, ki), g); }, params, 1e-6);
  EXPECT_LT(rep.max_rel_error, 1e-6);
}

TEST(DualOctConv, MatchesOctaveRoutingOracle) {
  const OctSplit in{3, 2};
  const OctSplit out{2, 3};
  const auto x = random_feature<double>(2, in, 8, 6, 0.4, 31);
  const auto k = random_kernel<double>(in, out, 3, 40);
  const auto y = dual_octconv_forward(x, k);
  const CGrid xh = to_grid(x.r_h, x.i_h);
  const CGrid xl = to_grid(x.r_l, x.i_l);
  const CGrid yh = add(complex_corr(xh, k.real(OctPath::HH), k.imag(OctPath::HH)),
                       upsample(complex_corr(xl, k.real(OctPath::LH), k.imag(OctPath::LH))));
  const CGrid yl = add(complex_corr(xl, k.real(OctPath::LL), k.imag(OctPath::LL)),
                       complex_corr(pool(xh), k.real(OctPath::HL), k.imag(OctPath::HL)));
  EXPECT_LT(grid_diff(yh, y.r_h, y.i_h), 1e-12);
  EXPECT_LT(grid_diff(yl, y.r_l, y.i_l), 1e-12);
}

TEST(DualOctConv, AlphaZeroIsComplexConvolution) {
  for (std::uint64_t t = 0; t < 10; ++t) {
    const auto x = random_complex<double>(Shape{2, 3, 6, 6}, 100 + t);
    DualOctKernel<double> k = random_kernel<double>({3, 0}, {4, 0}, 3, 200 + 10 * t);
    const auto y = dual_octconv_forward(split_frequency(x, 0.0), k);
    const auto ref = complex_conv2d(x, k.real(OctPath::HH), k.imag(OctPath::HH));
    EXPECT_LT(max_abs_diff(y.r_h, ref.re), 1e-12);
    EXPECT_LT(max_abs_diff(y.i_h, ref.im), 1e-12);
    EXPECT_EQ(y.r_l.c(), 0u);
  }
}

TEST(DualOctConv, AlphaZeroAcceptsOddSizes) {
  const auto x = random_complex<double>(Shape{1, 2, 5, 7}, 150);
  DualOctKernel<double> k = random_kernel<double>({2, 0}, {3, 0}, 3, 151);
  const auto f = split_frequency(x, 0.0);
  const auto y = dual_octconv_forward(f, k);
  const auto ref = complex_conv2d(x, k.real(OctPath::HH), k.imag(OctPath::HH));
  EXPECT_LT(max_abs_diff(y.r_h, ref.re), 1e-12);
  const auto back = split_frequency_backward(f);
  EXPECT_EQ(back.re.vec(), x.re.vec());
  EXPECT_EQ(back.im.vec(), x.im.vec());
  EXPECT_THROW(split_frequency(x, 0.5), ShapeError);
}

TEST(DualOctConv, AllEightBanksPassFiniteDifferences) {
  const OctSplit in{2, 2};
  const OctSplit out{3, 1};
  auto x = random_feature<double>(2, in, 6, 4, 0.5, 51);
  auto k = random_kernel<double>(in, out, 3, 60);
  const auto g = random_feature<double>(2, out, 6, 4, 0.5, 70);
  const auto grads = dual_octconv_backward(g, x, k);
  std::vector<GradCheckParam<double>> params;
  for (std::size_t p = 0; p < 4; ++p) {
    const std::string name = path_name(static_cast<OctPath>(p));
    params.push_back({"re:" + name, k.re[p].data(), grads.kernel.re[p].data()});
    params.push_back({"im:" + name, k.im[p].data(), grads.kernel.im[p].data()});
  }
  params.push_back({"x.r_h", x.r_h.data(), grads.input.r_h.data()});
  params.push_back({"x.i_h", x.i_h.data(), grads.input.i_h.data()});
  params.push_back({"x.r_l", x.r_l.data(), grads.input.r_l.data()});
  params.push_back({"x.i_l", x.i_l.data(), grads.input.i_l.data()});
  const auto rep = finite_diff_grad<double>([&] { return feature_dot(dual_octconv_forward(x, k), g); }, params, 1e-6);
  EXPECT_EQ(rep.per_parameter_errors.size(), 12u);
  for (const auto& [name, err] : rep.per_parameter_errors) EXPECT_LE(err, 1e-4) << name;
}

TEST(Merge, AlphaZeroStacksRealThenImaginary) {
  const auto x = random_feature<double>(1, {2, 0}, 4, 4, 0.0, 81);
  const auto m = merge_frequency(x);
  EXPECT_EQ(m.shape(), (Shape{1, 4, 4, 4}));
  EXPECT_EQ(slice_channels(m, 0, 2).vec(), x.r_h.vec());
  EXPECT_EQ(slice_channels(m, 2, 2).vec(), x.i_h.vec());
}

TEST(Merge, SumsUpsampledLowAndHigh) {
  const auto x = random_feature<double>(1, {2, 2}, 4, 6, 0.5, 91);
  const auto m = merge_frequency(x);
  EXPECT_DOUBLE_EQ(m(0, 1, 3, 5), x.r_h(0, 1, 3, 5) + x.r_l(0, 1, 1, 2));
  EXPECT_DOUBLE_EQ(m(0, 3, 2, 0), x.i_h(0, 1, 2, 0) + x.i_l(0, 1, 1, 0));
  const auto g = random_tensor<double>(m.shape(), 92);
  EXPECT_NEAR(dot(m, g), feature_dot(x, merge_frequency_backward(g, x.split(), 0.5)), 1e-12);
  EXPECT_THROW(merge_frequency(random_feature<double>(1, {3, 1}, 4, 4, 0.25, 93)), ShapeError);
}

TEST(CountFlops, ClosedFormAtAlphaZero) {
  const auto r = count_flops(64, 64, 0.0, 32, 32, 3);
  EXPECT_EQ(r.total_mul_adds, 75'497'472u);
  EXPECT_EQ(r.total_mul_adds, 2ull * 64 * 64 * 9 * 32 * 32);
  EXPECT_EQ(r.per_path.at("re:H->H"), 64ull * 64 * 9 * 32 * 32);
  EXPECT_EQ(r.per_path.at("im:L->L"), 0u);
}

TEST(CountFlops, StrictlyDecreasesWithAlpha) {
  std::uint64_t prev = UINT64_MAX;
  for (double a : {0.0, 0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875}) {
    const auto r = count_flops(64, 64, a, 32, 32, 3);
    std::uint64_t sum = 0;
    for (const auto& [name, v] : r.per_path) sum += v;
    EXPECT_EQ(sum, r.total_mul_adds);
    EXPECT_LT(r.total_mul_adds, prev) << "alpha " << a;
    prev = r.total_mul_adds;
  }
}

TEST(CountFlops, EnumeratesRoutedPaths) {
  // in {3,1}, out {2,2} on 8x8 with 3x3: HH 2*3, HL 2*3/4, LH 2*1/4, LL 2*1/4 per pixel-bank.
  const auto r = count_flops(OctSplit{3, 1}, OctSplit{2, 2}, 8, 8, 3, 0.25);
  const std::uint64_t k2 = 9;
  EXPECT_EQ(r.total_mul_adds, 2 * k2 * (2 * 3 * 64 + 2 * 3 * 16 + 2 * 1 * 16 + 2 * 1 * 16));
}
