#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <memory>

#include "donet/evaluate.hpp"

namespace donet {

namespace {

std::array<std::uint8_t, 3> hot(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const double r = std::clamp(3.0 * t, 0.0, 1.0);
  const double g = std::clamp(3.0 * t - 1.0, 0.0, 1.0);
  const double b = std::clamp(3.0 * t - 2.0, 0.0, 1.0);
  auto q = [](double v) { return static_cast<std::uint8_t>(std::lround(255.0 * v)); };
  return {q(r), q(g), q(b)};
}

}  // namespace

void write_png_rgb(const std::filesystem::path& path, std::size_t width, std::size_t height,
                   const std::vector<std::uint8_t>& rgb) {
  if (rgb.size() != width * height * 3) throw ShapeError("png buffer does not match its dimensions");
  std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!fp) throw ConfigError("cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw ConfigError("libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw ConfigError("libpng failed writing " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (std::size_t y = 0; y < height; ++y) {
    png_write_row(png, const_cast<png_bytep>(rgb.data() + y * width * 3));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

template <typename T>
void write_error_grid(const std::filesystem::path& path, const Tensor<T>& recon, const Tensor<T>& truth) {
  if (recon.shape() != truth.shape() || recon.n() * recon.c() != 1) {
    throw ShapeError("error grid expects two single images of equal shape");
  }
  const std::size_t h = truth.h();
  const std::size_t w = truth.w();
  auto r = recon.data();
  auto t = truth.data();
  double peak = 0.0;
  for (auto v : t) peak = std::max(peak, static_cast<double>(v));
  if (peak <= 0.0) peak = 1.0;

  const std::size_t gap = 2;
  const std::size_t width = 3 * w + 2 * gap;
  std::vector<std::uint8_t> rgb(width * h * 3, 0);
  auto put = [&](std::size_t x, std::size_t y, std::array<std::uint8_t, 3> c) {
    std::copy(c.begin(), c.end(), rgb.begin() + static_cast<std::ptrdiff_t>((y * width + x) * 3));
  };
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t i = y * w + x;
      auto grey = [&](double v) {
        const auto q = static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(v / peak, 0.0, 1.0)));
        return std::array<std::uint8_t, 3>{q, q, q};
      };
      put(x, y, grey(r[i]));
      put(w + gap + x, y, grey(t[i]));
      put(2 * (w + gap) + x, y, hot(5.0 * std::abs(static_cast<double>(r[i]) - t[i]) / peak));
    }
  }
  write_png_rgb(path, width, h, rgb);
}

template void write_error_grid(const std::filesystem::path&, const Tensor<float>&, const Tensor<float>&);
template void write_error_grid(const std::filesystem::path&, const Tensor<double>&, const Tensor<double>&);

}  // namespace donet
