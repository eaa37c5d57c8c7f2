#include "donet/mask.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "donet/random.hpp"

namespace donet {

std::string to_string(MaskPattern p) {
  switch (p) {
    case MaskPattern::Uniform1d: return "uniform1d";
    case MaskPattern::Cartesian1d: return "cartesian1d";
    case MaskPattern::Random2d: return "random2d";
    case MaskPattern::Radial2d: return "radial2d";
  }
  return "?";
}

MaskPattern parse_mask_pattern(const std::string& s) {
  if (s == "uniform1d") return MaskPattern::Uniform1d;
  if (s == "cartesian1d") return MaskPattern::Cartesian1d;
  if (s == "random2d") return MaskPattern::Random2d;
  if (s == "radial2d") return MaskPattern::Radial2d;
  throw ConfigError("unknown mask pattern '" + s + "' (expected uniform1d, cartesian1d, random2d or radial2d)");
}

std::size_t SamplingMask::sampled() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

double SamplingMask::sampled_fraction() const {
  return bits.empty() ? 0.0 : static_cast<double>(sampled()) / static_cast<double>(bits.size());
}

SamplingMask SamplingMask::full(std::size_t h, std::size_t w) {
  SamplingMask m;
  m.h = h;
  m.w = w;
  m.bits.assign(h * w, 1);
  m.acceleration = 1;
  return m;
}

SamplingMask SamplingMask::empty(std::size_t h, std::size_t w) {
  SamplingMask m;
  m.h = h;
  m.w = w;
  m.bits.assign(h * w, 0);
  m.acceleration = 0;
  return m;
}

namespace {

std::vector<std::uint8_t> centre_band(std::size_t w, double center_fraction) {
  std::vector<std::uint8_t> cols(w, 0);
  const auto n = static_cast<std::size_t>(std::lround(center_fraction * static_cast<double>(w)));
  const std::size_t start = w / 2 - std::min(n / 2, w / 2);
  for (std::size_t j = start; j < std::min(w, start + n); ++j) cols[j] = 1;
  return cols;
}

void fill_columns(SamplingMask& m, const std::vector<std::uint8_t>& cols) {
  for (std::size_t y = 0; y < m.h; ++y) {
    for (std::size_t x = 0; x < m.w; ++x) m.bits[y * m.w + x] = cols[x];
  }
}

std::vector<std::uint8_t> cartesian_columns(std::size_t w, int R, double cf, Rng& rng) {
  std::vector<std::uint8_t> cols = centre_band(w, cf);
  const auto target = static_cast<std::size_t>(std::lround(static_cast<double>(w) / R));
  std::size_t have = static_cast<std::size_t>(std::count(cols.begin(), cols.end(), std::uint8_t{1}));
  const double sigma = static_cast<double>(w) / 6.0;
  std::vector<double> weight(w);
  for (std::size_t j = 0; j < w; ++j) {
    const double d = static_cast<double>(j) - static_cast<double>(w / 2);
    weight[j] = cols[j] ? 0.0 : std::exp(-d * d / (2 * sigma * sigma));
  }
  while (have < target) {
    double total = 0.0;
    for (double v : weight) total += v;
    if (total <= 0.0) break;
    double u = rng.uniform() * total;
    std::size_t pick = w;
    for (std::size_t j = 0; j < w; ++j) {
      if (weight[j] <= 0.0) continue;
      pick = j;
      if (u < weight[j]) break;
      u -= weight[j];
    }
    cols[pick] = 1;
    weight[pick] = 0.0;
    ++have;
  }
  return cols;
}

void random_points(SamplingMask& m, int R, Rng& rng) {
  const std::size_t h = m.h;
  const std::size_t w = m.w;
  const double sigma = 0.3 * static_cast<double>(std::max(h, w));
  std::vector<double> density(h * w);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const double dy = static_cast<double>(y) - static_cast<double>(h / 2);
      const double dx = static_cast<double>(x) - static_cast<double>(w / 2);
      density[y * w + x] = std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma));
    }
  }
  const double target = static_cast<double>(h * w) / R;
  auto expected = [&](double s) {
    double e = 0.0;
    for (double d : density) e += std::min(1.0, s * d);
    return e;
  };
  double lo = 0.0;
  double hi = 1.0;
  while (expected(hi) < target) hi *= 2.0;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (expected(mid) < target ? lo : hi) = mid;
  }
  for (std::size_t i = 0; i < h * w; ++i) m.bits[i] = rng.uniform() < std::min(1.0, hi * density[i]) ? 1 : 0;
}

void radial_spokes(SamplingMask& m, int R) {
  const std::size_t h = m.h;
  const std::size_t w = m.w;
  const std::size_t extent = std::max(h, w);
  const std::size_t spokes = (h * w + static_cast<std::size_t>(R) * extent - 1) / (static_cast<std::size_t>(R) * extent);
  const double cy = static_cast<double>(h / 2);
  const double cx = static_cast<double>(w / 2);
  // One pixel per step along the dominant axis of each spoke.
  for (std::size_t s = 0; s < spokes; ++s) {
    const double theta = std::numbers::pi * static_cast<double>(s) / static_cast<double>(spokes);
    const double sn = std::sin(theta);
    const double cs = std::cos(theta);
    const bool along_x = std::abs(cs) >= std::abs(sn);
    const std::size_t steps = along_x ? w : h;
    for (std::size_t i = 0; i < steps; ++i) {
      long y, x;
      if (along_x) {
        x = static_cast<long>(i);
        y = std::lround(cy + (static_cast<double>(x) - cx) * sn / cs);
      } else {
        y = static_cast<long>(i);
        x = std::lround(cx + (static_cast<double>(y) - cy) * cs / sn);
      }
      if (y >= 0 && x >= 0 && y < static_cast<long>(h) && x < static_cast<long>(w)) {
        m.bits[static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x)] = 1;
      }
    }
  }
}

}  // namespace

SamplingMask make_mask(MaskPattern pattern, int R, std::size_t h, std::size_t w, double center_fraction,
                       std::uint64_t seed) {
  if (R < 2) throw ConfigError("acceleration must be at least 2, got " + std::to_string(R));
  if (!(center_fraction >= 0.0 && center_fraction <= 0.2)) {
    throw ConfigError("center_fraction must lie in [0, 0.2]");
  }
  if (h == 0 || w == 0) throw ConfigError("mask dimensions must be positive");
  const bool one_d = pattern == MaskPattern::Uniform1d || pattern == MaskPattern::Cartesian1d;
  if (one_d && static_cast<std::size_t>(R) > w) {
    throw ConfigError("acceleration " + std::to_string(R) + " exceeds the " + std::to_string(w) +
                      " phase-encode columns");
  }
  if (!one_d && static_cast<std::size_t>(R) > h * w) throw ConfigError("acceleration exceeds the pixel count");

  SamplingMask m;
  m.h = h;
  m.w = w;
  m.bits.assign(h * w, 0);
  m.pattern = pattern;
  m.acceleration = R;
  m.center_fraction = center_fraction;
  m.seed = seed;
  Rng rng(seed);
  switch (pattern) {
    case MaskPattern::Uniform1d: {
      std::vector<std::uint8_t> cols = centre_band(w, center_fraction);
      for (std::size_t j = 0; j < w; j += static_cast<std::size_t>(R)) cols[j] = 1;
      fill_columns(m, cols);
      break;
    }
    case MaskPattern::Cartesian1d:
      fill_columns(m, cartesian_columns(w, R, center_fraction, rng));
      break;
    case MaskPattern::Random2d:
      random_points(m, R, rng);
      break;
    case MaskPattern::Radial2d:
      radial_spokes(m, R);
      break;
  }
  return m;
}

}  // namespace donet
