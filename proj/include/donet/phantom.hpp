#pragma once

#include <cstdint>
#include <string>

#include "donet/tensor.hpp"

namespace donet {

enum class PhantomKind { SheppLogan, Blobs, Checker };

std::string to_string(PhantomKind k);
PhantomKind parse_phantom_kind(const std::string& s);

// Ground-truth image (1, 1, h, w) with magnitude in [0, 1].
struct Phantom {
  ComplexTensor<double> image;
  PhantomKind kind = PhantomKind::SheppLogan;
  std::uint64_t seed = 0;
};

// Deterministic in (kind, h, w, seed, phase_ramp). Shepp-Logan uses the
// 10-ellipse modified parameterisation; seed 0 is the canonical phantom and
// other seeds jitter ellipse geometry and intensity. Checker uses a 4x4 grid of
// alternating 0/1 blocks. With `phase_ramp` a seeded smooth linear phase is applied.
Phantom make_phantom(PhantomKind kind, std::size_t h, std::size_t w, std::uint64_t seed, bool phase_ramp = false);

// Coil maps (1, coils, h, w): Gaussian lobes centred at equally spaced angles
// on the field-of-view border, normalised so sum_i |S_i|^2 == 1 per pixel.
struct CoilSensitivities {
  ComplexTensor<double> maps;
};

CoilSensitivities make_coils(std::size_t h, std::size_t w, std::size_t coils, std::uint64_t seed);

}  // namespace donet
