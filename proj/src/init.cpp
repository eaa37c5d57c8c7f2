#include "donet/init.hpp"

#include <cmath>
#include <numbers>

#include "donet/random.hpp"

namespace donet {

template <typename T>
std::pair<Tensor<T>, Tensor<T>> init_complex_kernel(Shape shape, std::size_t fan_in, std::uint64_t seed) {
  if (fan_in < 1) throw ConfigError("fan_in must be at least 1");
  const double sigma = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Rng rng(seed);
  Tensor<T> kr(shape);
  Tensor<T> ki(shape);
  auto r = kr.data();
  auto i = ki.data();
  for (std::size_t k = 0; k < r.size(); ++k) {
    const double rho = sigma * std::sqrt(-2.0 * std::log(1.0 - rng.uniform()));
    const double theta = std::numbers::pi * (1.0 - 2.0 * rng.uniform());  // (-pi, pi]
    r[k] = static_cast<T>(rho * std::cos(theta));
    i[k] = static_cast<T>(rho * std::sin(theta));
  }
  return {std::move(kr), std::move(ki)};
}

template <typename T>
Tensor<T> init_kaiming_uniform(Shape shape, std::uint64_t seed) {
  const std::size_t fan_in = shape.c * shape.h * shape.w;
  if (fan_in == 0) return Tensor<T>(shape);
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  Rng rng(seed);
  Tensor<T> out(shape);
  for (auto& v : out.data()) v = static_cast<T>(rng.uniform(-bound, bound));
  return out;
}

template <typename T>
void initialize(DONet<T>& model, std::uint64_t seed) {
  Rng seeds(seed);
  for (auto& block : model.blocks()) {
    for (auto& layer : block.layers()) {
      DualOctKernel<T>& w = layer.weight;
      const std::size_t fan_in = w.in.total() * w.kernel_size * w.kernel_size;
      for (std::size_t p = 0; p < 4; ++p) {
        const std::uint64_t s = seeds.next();
        if (w.re[p].empty()) continue;
        auto [kr, ki] = init_complex_kernel<T>(w.re[p].shape(), fan_in, s);
        w.re[p] = std::move(kr);
        w.im[p] = std::move(ki);
      }
    }
    for (auto& unit : block.fuse_units()) {
      for (std::size_t b = 0; b < 2; ++b) {
        const std::uint64_t s1 = seeds.next();
        const std::uint64_t s3 = seeds.next();
        unit.conv1[b] = init_kaiming_uniform<T>(unit.conv1[b].shape(), s1);
        unit.conv3[b] = init_kaiming_uniform<T>(unit.conv3[b].shape(), s3);
      }
      for (auto* bank : {unit.bn1, unit.bn2}) {
        for (std::size_t g = 0; g < 4; ++g) {
          bank[g].gamma.fill(T(1));
          bank[g].beta.fill(T(0));
          bank[g].running_mean.fill(T(0));
          bank[g].running_var.fill(T(1));
        }
      }
    }
    // A silent last convolution makes every block start as the zero map, so
    // the untrained cascade returns the zero-filled reconstruction.
    if (!block.fuse_units().empty()) {
      auto& last = block.fuse_units().back();
      for (auto& k : last.conv3) k.fill(T(0));
    }
  }
}

#define DONET_INSTANTIATE(T)                                                                   \
  template std::pair<Tensor<T>, Tensor<T>> init_complex_kernel(Shape, std::size_t, std::uint64_t); \
  template Tensor<T> init_kaiming_uniform(Shape, std::uint64_t);                               \
  template void initialize(DONet<T>&, std::uint64_t);

DONET_INSTANTIATE(float)
DONET_INSTANTIATE(double)

}  // namespace donet
