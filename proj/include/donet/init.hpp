#pragma once

#include <cstdint>
#include <utility>

#include "donet/cascade.hpp"

namespace donet {

// Complex kernel with Rayleigh magnitude (sigma = 1/sqrt(fan_in)) and uniform
// phase on (-pi, pi]: K_r = rho cos(theta), K_i = rho sin(theta).
template <typename T>
std::pair<Tensor<T>, Tensor<T>> init_complex_kernel(Shape shape, std::size_t fan_in, std::uint64_t seed);

// Kaiming-uniform real kernel, bound sqrt(6 / fan_in) with fan_in = c*h*w.
template <typename T>
Tensor<T> init_kaiming_uniform(Shape shape, std::uint64_t seed);

// Dual-OctConv banks get complex init, fuse convolutions Kaiming, BN (1, 0).
// Every tensor draws from its own seed derived from `seed` in parameter order.
// With dense connections the final 3x3 fuse convolution of each block starts
// at zero.
template <typename T>
void initialize(DONet<T>& model, std::uint64_t seed);

}  // namespace donet
