#include "donet/phantom.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "donet/random.hpp"

namespace donet {

std::string to_string(PhantomKind k) {
  switch (k) {
    case PhantomKind::SheppLogan: return "shepp_logan";
    case PhantomKind::Blobs: return "blobs";
    case PhantomKind::Checker: return "checker";
  }
  return "?";
}

PhantomKind parse_phantom_kind(const std::string& s) {
  if (s == "shepp_logan") return PhantomKind::SheppLogan;
  if (s == "blobs") return PhantomKind::Blobs;
  if (s == "checker") return PhantomKind::Checker;
  throw ConfigError("unknown phantom kind '" + s + "' (expected shepp_logan, blobs or checker)");
}

namespace {

struct Ellipse {
  double intensity, a, b, x0, y0, phi_deg;
};

// Modified Shepp-Logan (higher-contrast intensities).
constexpr std::array<Ellipse, 10> kSheppLogan = {{
    {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},
    {-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0},
    {-0.2, 0.1100, 0.3100, 0.22, 0.0, -18.0},
    {-0.2, 0.1600, 0.4100, -0.22, 0.0, 18.0},
    {0.1, 0.2100, 0.2500, 0.0, 0.35, 0.0},
    {0.1, 0.0460, 0.0460, 0.0, 0.1, 0.0},
    {0.1, 0.0460, 0.0460, 0.0, -0.1, 0.0},
    {0.1, 0.0460, 0.0230, -0.08, -0.605, 0.0},
    {0.1, 0.0230, 0.0230, 0.0, -0.606, 0.0},
    {0.1, 0.0230, 0.0460, 0.06, -0.605, 0.0},
}};

// Pixel centre in [-1, 1] coordinates, y pointing up.
double coord_x(std::size_t x, std::size_t w) { return (static_cast<double>(x) + 0.5) / (0.5 * w) - 1.0; }
double coord_y(std::size_t y, std::size_t h) { return 1.0 - (static_cast<double>(y) + 0.5) / (0.5 * h); }

std::vector<double> shepp_logan(std::size_t h, std::size_t w, std::uint64_t seed) {
  std::array<Ellipse, 10> ells = kSheppLogan;
  if (seed != 0) {
    Rng rng(seed);
    const double scale = rng.uniform(0.9, 1.05);
    for (std::size_t i = 0; i < ells.size(); ++i) {
      auto& e = ells[i];
      e.a *= scale;
      e.b *= scale;
      e.x0 *= scale;
      e.y0 *= scale;
      if (i >= 2) {
        e.x0 += rng.uniform(-0.04, 0.04);
        e.y0 += rng.uniform(-0.04, 0.04);
        e.a *= rng.uniform(0.85, 1.15);
        e.b *= rng.uniform(0.85, 1.15);
        e.phi_deg += rng.uniform(-10.0, 10.0);
        e.intensity *= rng.uniform(0.6, 1.4);
      }
    }
  }
  std::vector<double> img(h * w, 0.0);
  for (std::size_t y = 0; y < h; ++y) {
    const double py = coord_y(y, h);
    for (std::size_t x = 0; x < w; ++x) {
      const double px = coord_x(x, w);
      double v = 0.0;
      for (const auto& e : ells) {
        const double phi = e.phi_deg * std::numbers::pi / 180.0;
        const double dx = px - e.x0;
        const double dy = py - e.y0;
        const double u = dx * std::cos(phi) + dy * std::sin(phi);
        const double t = -dx * std::sin(phi) + dy * std::cos(phi);
        if ((u * u) / (e.a * e.a) + (t * t) / (e.b * e.b) <= 1.0) v += e.intensity;
      }
      img[y * w + x] = std::max(v, 0.0);
    }
  }
  return img;
}

std::vector<double> blobs(std::size_t h, std::size_t w, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> img(h * w, 0.0);
  const int count = 3 + static_cast<int>(rng.below(4));
  for (int b = 0; b < count; ++b) {
    const double cx = rng.uniform(-0.6, 0.6);
    const double cy = rng.uniform(-0.6, 0.6);
    const double sigma = rng.uniform(0.08, 0.3);
    const double amp = rng.uniform(0.3, 1.0);
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        const double dx = coord_x(x, w) - cx;
        const double dy = coord_y(y, h) - cy;
        img[y * w + x] += amp * std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma));
      }
    }
  }
  return img;
}

std::vector<double> checker(std::size_t h, std::size_t w) {
  const std::size_t block = std::max<std::size_t>(1, std::min(h, w) / 4);
  std::vector<double> img(h * w);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) img[y * w + x] = static_cast<double>(((y / block) + (x / block)) % 2);
  }
  return img;
}

}  // namespace

Phantom make_phantom(PhantomKind kind, std::size_t h, std::size_t w, std::uint64_t seed, bool phase_ramp) {
  if (h < 16 || w < 16 || h % 2 != 0 || w % 2 != 0) {
    throw ConfigError("phantom dimensions must be even and at least 16, got " + std::to_string(h) + "x" +
                      std::to_string(w));
  }
  std::vector<double> mag;
  switch (kind) {
    case PhantomKind::SheppLogan: mag = shepp_logan(h, w, seed); break;
    case PhantomKind::Blobs: mag = blobs(h, w, seed); break;
    case PhantomKind::Checker: mag = checker(h, w); break;
  }
  const double peak = *std::max_element(mag.begin(), mag.end());
  if (peak > 0) {
    for (auto& v : mag) v = std::min(v / peak, 1.0);
  }
  std::vector<double> re(h * w);
  std::vector<double> im(h * w, 0.0);
  double ax = 0.0;
  double ay = 0.0;
  if (phase_ramp) {
    Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
    ax = rng.uniform(-0.5, 0.5) * std::numbers::pi;
    ay = rng.uniform(-0.5, 0.5) * std::numbers::pi;
  }
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const double phase = ax * coord_x(x, w) + ay * coord_y(y, h);
      const double m = mag[y * w + x];
      re[y * w + x] = phase_ramp ? m * std::cos(phase) : m;
      im[y * w + x] = phase_ramp ? m * std::sin(phase) : 0.0;
    }
  }
  Phantom p;
  p.kind = kind;
  p.seed = seed;
  p.image = ComplexTensor<double>(Tensor<double>(Shape{1, 1, h, w}, std::move(re)),
                                  Tensor<double>(Shape{1, 1, h, w}, std::move(im)));
  return p;
}

CoilSensitivities make_coils(std::size_t h, std::size_t w, std::size_t coils, std::uint64_t seed) {
  if (coils < 1) throw ConfigError("coil count must be at least 1");
  Rng rng(seed ^ 0xc2b2ae3d27d4eb4fULL);
  const double extent = static_cast<double>(std::max(h, w));
  const double radius = 0.5 * extent;
  const double sigma = 0.45 * extent;
  const double jitter = rng.uniform(-0.2, 0.2);
  Shape s{1, coils, h, w};
  Tensor<double> re(s);
  Tensor<double> im(s);
  for (std::size_t c = 0; c < coils; ++c) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(c) / static_cast<double>(coils) + jitter;
    const double cy = 0.5 * h - radius * std::sin(angle);
    const double cx = 0.5 * w + radius * std::cos(angle);
    const double phase0 = rng.uniform(-std::numbers::pi, std::numbers::pi);
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        const double dy = static_cast<double>(y) + 0.5 - cy;
        const double dx = static_cast<double>(x) + 0.5 - cx;
        const double d2 = dx * dx + dy * dy;
        const double mag = std::exp(-d2 / (2 * sigma * sigma));
        const double phase = phase0 + std::numbers::pi * std::sqrt(d2) / extent;
        re(0, c, y, x) = mag * std::cos(phase);
        im(0, c, y, x) = mag * std::sin(phase);
      }
    }
  }
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      double rss = 0.0;
      for (std::size_t c = 0; c < coils; ++c) rss += re(0, c, y, x) * re(0, c, y, x) + im(0, c, y, x) * im(0, c, y, x);
      rss = std::sqrt(rss);
      for (std::size_t c = 0; c < coils; ++c) {
        re(0, c, y, x) /= rss;
        im(0, c, y, x) /= rss;
      }
    }
  }
  return {ComplexTensor<double>(std::move(re), std::move(im))};
}

}  // namespace donet
