#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "json.hpp"
#include "donet/kspace.hpp"
#include "donet/phantom.hpp"

namespace donet {

struct SimulationSpec {
  PhantomKind phantom = PhantomKind::SheppLogan;
  std::size_t h = 32;
  std::size_t w = 32;
  std::size_t coils = 4;
  std::size_t samples = 20;
  MaskPattern pattern = MaskPattern::Uniform1d;
  int acceleration = 3;
  double center_fraction = 0.0;
  std::uint64_t seed = 0;
  bool phase_ramp = true;
};

// Measurements and multi-coil ground truth for a set of samples. kspace.y and
// target are (samples, coils, h, w); one mask is shared by all samples.
template <typename T>
struct Dataset {
  KSpaceMeasurement<T> kspace;
  ComplexTensor<T> target;
  nlohmann::json info;

  std::size_t size() const { return target.shape().n; }
  std::size_t coils() const { return target.shape().c; }
  KSpaceMeasurement<T> measurement(std::span<const std::size_t> indices) const;
  ComplexTensor<T> targets(std::span<const std::size_t> indices) const;
};

// Sample i uses phantom seed (seed + i) and coil seed (seed + i); the mask uses `seed`.
Dataset<float> simulate_dataset(const SimulationSpec& spec);

// Directory layout:
//   manifest.json  shapes, dtype "f32", coils, pattern, acceleration, seed and,
//                  per file, {"path", "shape", "offset", "bytes", "complex"}
//   kspace.bin     (samples, coils, h, w) complex, interleaved re/im
//   mask.bin       (h, w) 0/1
//   target.bin     (samples, coils, h, w) complex, interleaved re/im
// All arrays little-endian row-major f32. Externally produced directories in the
// same format can be read with read_dataset.
void write_dataset(const std::filesystem::path& dir, const Dataset<float>& data);
template <typename T>
Dataset<T> read_dataset(const std::filesystem::path& dir);

template <typename To, typename From>
Dataset<To> cast_dataset(const Dataset<From>& d) {
  return {{cast<To>(d.kspace.y), d.kspace.mask}, cast<To>(d.target), d.info};
}

}  // namespace donet
