#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "donet/tensor.hpp"

namespace donet {

enum class MaskPattern { Uniform1d, Cartesian1d, Random2d, Radial2d };

std::string to_string(MaskPattern p);
MaskPattern parse_mask_pattern(const std::string& s);  // throws ConfigError

// Binary k-space sampling mask in centred layout (DC at (h/2, w/2)). 1-D
// patterns select whole phase-encode columns.
struct SamplingMask {
  std::size_t h = 0;
  std::size_t w = 0;
  std::vector<std::uint8_t> bits;
  MaskPattern pattern = MaskPattern::Uniform1d;
  int acceleration = 1;
  double center_fraction = 0.0;
  std::uint64_t seed = 0;

  bool at(std::size_t y, std::size_t x) const { return bits[y * w + x] != 0; }
  std::size_t sampled() const;
  double sampled_fraction() const;

  // (1, 1, h, w) tensor of 0/1.
  template <typename T>
  Tensor<T> as_tensor() const {
    Tensor<T> t(Shape{1, 1, h, w});
    auto d = t.data();
    for (std::size_t i = 0; i < bits.size(); ++i) d[i] = bits[i] ? T(1) : T(0);
    return t;
  }

  static SamplingMask full(std::size_t h, std::size_t w);
  static SamplingMask empty(std::size_t h, std::size_t w);
};

// Multi-coil undersampled k-space for a batch: y is (n, coils, h, w), zero
// outside the mask, and one mask is shared by every coil and sample.
template <typename T>
struct KSpaceMeasurement {
  ComplexTensor<T> y;
  SamplingMask mask;
};

}  // namespace donet
