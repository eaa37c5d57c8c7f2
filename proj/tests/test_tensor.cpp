#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "donet/fft.hpp"
#include "donet/gradcheck.hpp"
#include "donet/ops.hpp"
#include "donet/parallel.hpp"
#include "test_util.hpp"

using namespace donet;
using donet::testing::dot;
using donet::testing::naive_conv2d;
using donet::testing::naive_dft2;
using donet::testing::random_complex;
using donet::testing::random_tensor;

TEST(Tensor, DataLengthMustMatchShape) {
  EXPECT_THROW(Tensor<float>(Shape{1, 2, 3, 4}, std::vector<float>(23)), ShapeError);
  EXPECT_NO_THROW(Tensor<float>(Shape{1, 2, 3, 4}, std::vector<float>(24)));
}

TEST(Tensor, CheckedModeRejectsNonFinite) {
  set_checked_mode(true);
  std::vector<double> v(4, 1.0);
  v[2] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(Tensor<double>(Shape{1, 1, 2, 2}, v), NumericsError);
  v[2] = std::numeric_limits<double>::infinity();
  EXPECT_THROW(Tensor<double>(Shape{1, 1, 2, 2}, v), NumericsError);
  set_checked_mode(false);
  EXPECT_NO_THROW(Tensor<double>(Shape{1, 1, 2, 2}, v));
}

TEST(Tensor, ElementwiseArithmetic) {
  Tensor<double> a(Shape{1, 1, 1, 3}, {1, 2, 3});
  Tensor<double> b(Shape{1, 1, 1, 3}, {4, 5, 6});
  EXPECT_EQ((a + b).vec(), (std::vector<double>{5, 7, 9}));
  EXPECT_EQ((b - a).vec(), (std::vector<double>{3, 3, 3}));
  EXPECT_EQ((a * 2.0).vec(), (std::vector<double>{2, 4, 6}));
  EXPECT_THROW(a += Tensor<double>(Shape{1, 1, 3, 1}), ShapeError);
}

TEST(Conv2d, MatchesDirectLoops) {
  for (std::size_t k : {1u, 3u, 5u}) {
    const auto x = random_tensor<double>(Shape{2, 3, 7, 6}, 1 + k);
    const auto w = random_tensor<double>(Shape{4, 3, k, k}, 100 + k);
    EXPECT_LT(max_abs_diff(conv2d(x, w), naive_conv2d(x, w)), 1e-12) << "k=" << k;
  }
}

TEST(Conv2d, DeltaKernelIsIdentity) {
  const auto x = random_tensor<float>(Shape{1, 2, 5, 5}, 3);
  Tensor<float> k(Shape{2, 2, 3, 3});
  k(0, 0, 1, 1) = 1.0f;
  k(1, 1, 1, 1) = 1.0f;
  EXPECT_EQ(conv2d(x, k).vec(), x.vec());
}

TEST(Conv2d, RejectsMismatchedChannelsAndEvenKernels) {
  const auto x = random_tensor<float>(Shape{1, 2, 5, 5}, 3);
  EXPECT_THROW(conv2d(x, Tensor<float>(Shape{1, 3, 3, 3})), ShapeError);
  EXPECT_THROW(conv2d(x, Tensor<float>(Shape{1, 2, 2, 2})), ShapeError);
}

TEST(Conv2d, GradientsAreAdjoints) {
  const auto x = random_tensor<double>(Shape{2, 3, 6, 5}, 11);
  const auto k = random_tensor<double>(Shape{4, 3, 3, 3}, 12);
  const auto g = random_tensor<double>(Shape{2, 4, 6, 5}, 13);
  // <conv(x, k), g> = <x, conv^T(g, k)> = <k, dK(g, x)>
  const double lhs = dot(conv2d(x, k), g);
  EXPECT_NEAR(lhs, dot(x, conv2d_grad_input(g, k)), 1e-10);
  EXPECT_NEAR(lhs, dot(k, conv2d_grad_kernel(g, x, k.shape())), 1e-10);
}

TEST(Conv2d, GradientsPassFiniteDifferences) {
  auto x = random_tensor<double>(Shape{2, 2, 5, 4}, 21);
  auto k = random_tensor<double>(Shape{3, 2, 3, 3}, 22);
  const auto g = random_tensor<double>(Shape{2, 3, 5, 4}, 23);
  const auto gx = conv2d_grad_input(g, k);
  const auto gk = conv2d_grad_kernel(g, x, k.shape());
  std::vector<GradCheckParam<double>> params{{"x", x.data(), gx.data()}, {"k", k.data(), gk.data()}};
  const auto rep = finite_diff_grad<double>([&] { return dot(conv2d(x, k), g); }, params, 1e-6);
  EXPECT_LT(rep.max_rel_error, 1e-6);
}

TEST(Conv2d, ThreadCountDoesNotChangeResults) {
  const auto x = random_tensor<float>(Shape{4, 3, 8, 8}, 31);
  const auto k = random_tensor<float>(Shape{5, 3, 3, 3}, 32);
  const auto g = random_tensor<float>(Shape{4, 5, 8, 8}, 33);
  set_num_threads(1);
  const auto a = conv2d_grad_kernel(g, x, k.shape());
  const auto ya = conv2d(x, k);
  set_num_threads(3);
  const auto b = conv2d_grad_kernel(g, x, k.shape());
  const auto yb = conv2d(x, k);
  set_num_threads(1);
  EXPECT_EQ(a.vec(), b.vec());
  EXPECT_EQ(ya.vec(), yb.vec());
}

TEST(Pooling, AverageAndAdjoint) {
  Tensor<double> x(Shape{1, 1, 2, 4}, {1, 2, 3, 4, 5, 6, 7, 8});
  EXPECT_EQ(avg_pool2(x).vec(), (std::vector<double>{3.5, 5.5}));
  EXPECT_THROW(avg_pool2(Tensor<double>(Shape{1, 1, 3, 4})), ShapeError);
  const auto a = random_tensor<double>(Shape{2, 3, 6, 8}, 41);
  const auto b = random_tensor<double>(Shape{2, 3, 3, 4}, 42);
  EXPECT_NEAR(dot(avg_pool2(a), b), dot(a, avg_pool2_adjoint(b)), 1e-12);
}

TEST(Upsample, NearestAndAdjoint) {
  Tensor<double> x(Shape{1, 1, 1, 2}, {1, 2});
  EXPECT_EQ(upsample_nearest2(x).vec(), (std::vector<double>{1, 1, 2, 2, 1, 1, 2, 2}));
  const auto a = random_tensor<double>(Shape{2, 3, 3, 4}, 43);
  const auto b = random_tensor<double>(Shape{2, 3, 6, 8}, 44);
  EXPECT_NEAR(dot(upsample_nearest2(a), b), dot(a, upsample_nearest2_adjoint(b)), 1e-12);
}

TEST(Channels, ConcatAndSliceRoundTrip) {
  const auto a = random_tensor<float>(Shape{2, 3, 4, 4}, 51);
  const auto b = random_tensor<float>(Shape{2, 2, 4, 4}, 52);
  const auto c = concat_channels(a, b);
  EXPECT_EQ(c.shape(), (Shape{2, 5, 4, 4}));
  EXPECT_EQ(slice_channels(c, 0, 3).vec(), a.vec());
  EXPECT_EQ(slice_channels(c, 3, 2).vec(), b.vec());
  EXPECT_THROW(concat_channels(a, Tensor<float>(Shape{1, 2, 4, 4})), ShapeError);
  EXPECT_THROW(slice_channels(c, 4, 2), ShapeError);
}

TEST(Fft, DeltaHasFlatSpectrum) {
  ComplexTensor<double> x(Shape{1, 1, 4, 4});
  x.re(0, 0, 0, 0) = 1.0;
  const auto y = fft2(x);
  for (double v : y.re.data()) EXPECT_NEAR(v, 0.25, 1e-15);
  for (double v : y.im.data()) EXPECT_NEAR(v, 0.0, 1e-15);
}

TEST(Fft, MatchesDirectDftForPowerOfTwoAndOtherSizes) {
  for (auto [h, w] : {std::pair<std::size_t, std::size_t>{8, 16}, {6, 10}, {5, 12}}) {
    const auto x = random_complex<double>(Shape{1, 1, h, w}, h * 100 + w);
    std::vector<std::complex<double>> v(h * w);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = {x.re.data()[i], x.im.data()[i]};
    const auto ref = naive_dft2(v, h, w, false);
    const auto got = fft2(x);
    double err = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      err = std::max(err, std::abs(ref[i] - std::complex<double>(got.re.data()[i], got.im.data()[i])));
    }
    EXPECT_LT(err, 1e-12) << h << "x" << w;
  }
}

TEST(Fft, InverseAndParseval) {
  const auto x = random_complex<double>(Shape{2, 3, 8, 12}, 61);
  EXPECT_LT(max_abs_diff(ifft2(fft2(x)), x), 1e-13);
  EXPECT_LT(max_abs_diff(ifft2c(fft2c(x)), x), 1e-13);
  EXPECT_NEAR(l2_norm(fft2(x)), l2_norm(x), 1e-12);
  EXPECT_NEAR(l2_norm(fft2c(x)), l2_norm(x), 1e-12);
}

TEST(Fft, CentredTransformPutsDcInTheMiddle) {
  ComplexTensor<double> x(Shape{1, 1, 8, 6});
  x.re.fill(1.0);
  const auto y = fft2c(x);
  EXPECT_NEAR(y.re(0, 0, 4, 3), std::sqrt(48.0), 1e-12);
  EXPECT_NEAR(l2_norm(y), y.re(0, 0, 4, 3), 1e-12);
}

TEST(Fft, ShiftsAreInverse) {
  const auto x = random_tensor<double>(Shape{1, 2, 5, 7}, 71);
  EXPECT_EQ(ifftshift(fftshift(x)).vec(), x.vec());
  Tensor<double> d(Shape{1, 1, 4, 4});
  d(0, 0, 0, 0) = 1.0;
  EXPECT_EQ(fftshift(d)(0, 0, 2, 2), 1.0);
}

TEST(GradCheck, QuadraticOracle) {
  std::vector<double> p{0.5, -1.5, 2.0};
  std::vector<double> g{1.0, -3.0, 4.0};  // d/dp sum p^2
  std::vector<GradCheckParam<double>> params{{"p", p, g}};
  const auto rep = finite_diff_grad<double>(
      [&] { return p[0] * p[0] + p[1] * p[1] + p[2] * p[2]; }, params, 1e-5);
  EXPECT_LT(rep.max_rel_error, 1e-8);
  g[1] = -2.0;
  EXPECT_GT(finite_diff_grad<double>([&] { return p[0] * p[0] + p[1] * p[1] + p[2] * p[2]; }, params, 1e-5)
                .max_rel_error,
            0.1);
}

TEST(GradCheck, NonFiniteObjectiveThrows) {
  std::vector<double> p{1.0};
  std::vector<double> g{0.0};
  std::vector<GradCheckParam<double>> params{{"p", p, g}};
  EXPECT_THROW(finite_diff_grad<double>([] { return std::numeric_limits<double>::quiet_NaN(); }, params),
               NumericsError);
}
