#include "donet/dataset.hpp"

#include <bit>
#include <cmath>
#include <fstream>

#include "donet/acquisition.hpp"
#include "donet/mask.hpp"

namespace donet {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <typename T>
Tensor<T> gather(const Tensor<T>& src, std::span<const std::size_t> idx) {
  const Shape s = src.shape();
  Tensor<T> out(Shape{idx.size(), s.c, s.h, s.w});
  const std::size_t block = s.c * s.h * s.w;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= s.n) throw ShapeError("dataset index out of range");
    std::copy_n(src.data().data() + idx[i] * block, block, out.data().data() + i * block);
  }
  return out;
}

void write_complex(const fs::path& path, const ComplexTensor<float>& x) {
  std::vector<float> buf(2 * x.shape().numel());
  auto re = x.re.data();
  auto im = x.im.data();
  for (std::size_t i = 0; i < re.size(); ++i) {
    buf[2 * i] = re[i];
    buf[2 * i + 1] = im[i];
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!f) throw ConfigError("cannot write " + path.string());
}

std::vector<float> read_floats(const fs::path& path, std::size_t count, std::uint64_t offset) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("missing dataset file " + path.string());
  f.seekg(0, std::ios::end);
  const auto size = static_cast<std::uint64_t>(f.tellg());
  if (size < offset + count * sizeof(float)) {
    throw ConfigError(path.string() + " holds " + std::to_string(size) + " bytes, expected at least " +
                      std::to_string(offset + count * sizeof(float)));
  }
  std::vector<float> buf(count);
  f.seekg(static_cast<std::streamoff>(offset));
  f.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(count * sizeof(float)));
  return buf;
}

json file_entry(const std::string& path, std::vector<std::size_t> shape, bool complex) {
  std::size_t count = 1;
  for (auto d : shape) count *= d;
  if (complex) count *= 2;
  return {{"path", path},
          {"shape", shape},
          {"offset", 0},
          {"bytes", count * sizeof(float)},
          {"complex", complex ? "interleaved" : "none"}};
}

}  // namespace

template <typename T>
KSpaceMeasurement<T> Dataset<T>::measurement(std::span<const std::size_t> idx) const {
  return {ComplexTensor<T>(gather(kspace.y.re, idx), gather(kspace.y.im, idx)), kspace.mask};
}

template <typename T>
ComplexTensor<T> Dataset<T>::targets(std::span<const std::size_t> idx) const {
  return ComplexTensor<T>(gather(target.re, idx), gather(target.im, idx));
}

Dataset<float> simulate_dataset(const SimulationSpec& spec) {
  if (spec.samples < 1) throw ConfigError("dataset needs at least one sample");
  const SamplingMask mask =
      make_mask(spec.pattern, spec.acceleration, spec.h, spec.w, spec.center_fraction, spec.seed);
  const Shape s{spec.samples, spec.coils, spec.h, spec.w};
  ComplexTensor<double> y(s);
  ComplexTensor<double> target(s);
  const std::size_t block = spec.coils * spec.h * spec.w;
  for (std::size_t i = 0; i < spec.samples; ++i) {
    const Phantom ph = make_phantom(spec.phantom, spec.h, spec.w, spec.seed + i, spec.phase_ramp);
    const CoilSensitivities sens = make_coils(spec.h, spec.w, spec.coils, spec.seed + i);
    const ComplexTensor<double> imgs = coil_images(ph.image, sens.maps);
    const KSpaceMeasurement<double> meas = acquire(imgs, mask);
    std::copy_n(imgs.re.data().data(), block, target.re.data().data() + i * block);
    std::copy_n(imgs.im.data().data(), block, target.im.data().data() + i * block);
    std::copy_n(meas.y.re.data().data(), block, y.re.data().data() + i * block);
    std::copy_n(meas.y.im.data().data(), block, y.im.data().data() + i * block);
  }
  Dataset<float> d;
  d.kspace = {cast<float>(y), mask};
  d.target = cast<float>(target);
  d.info = {{"phantom", to_string(spec.phantom)},
            {"samples", spec.samples},
            {"coils", spec.coils},
            {"height", spec.h},
            {"width", spec.w},
            {"pattern", to_string(spec.pattern)},
            {"acceleration", spec.acceleration},
            {"center_fraction", spec.center_fraction},
            {"seed", spec.seed},
            {"sampled_fraction", mask.sampled_fraction()},
            {"sampled_count", mask.sampled()}};
  return d;
}

void write_dataset(const fs::path& dir, const Dataset<float>& data) {
  fs::create_directories(dir);
  const Shape s = data.target.shape();
  json manifest = data.info;
  manifest["format"] = "donet-dataset";
  manifest["version"] = 1;
  manifest["dtype"] = "f32";
  manifest["samples"] = s.n;
  manifest["coils"] = s.c;
  manifest["height"] = s.h;
  manifest["width"] = s.w;
  manifest["pattern"] = to_string(data.kspace.mask.pattern);
  manifest["acceleration"] = data.kspace.mask.acceleration;
  manifest["center_fraction"] = data.kspace.mask.center_fraction;
  manifest["seed"] = data.kspace.mask.seed;
  manifest["files"] = {{"kspace", file_entry("kspace.bin", {s.n, s.c, s.h, s.w}, true)},
                       {"mask", file_entry("mask.bin", {s.h, s.w}, false)},
                       {"target", file_entry("target.bin", {s.n, s.c, s.h, s.w}, true)}};
  write_complex(dir / "kspace.bin", data.kspace.y);
  write_complex(dir / "target.bin", data.target);
  {
    std::vector<float> m(data.kspace.mask.bits.begin(), data.kspace.mask.bits.end());
    std::ofstream f(dir / "mask.bin", std::ios::binary | std::ios::trunc);
    f.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(float)));
  }
  std::ofstream mf(dir / "manifest.json", std::ios::trunc);
  mf << manifest.dump(2) << '\n';
}

template <typename T>
Dataset<T> read_dataset(const fs::path& dir) {
  static_assert(std::endian::native == std::endian::little);
  std::ifstream mf(dir / "manifest.json");
  if (!mf) throw ConfigError("no dataset manifest in " + dir.string());
  json manifest;
  try {
    manifest = json::parse(mf);
  } catch (const json::exception& e) {
    throw ConfigError("dataset manifest is not valid JSON: " + std::string(e.what()));
  }
  try {
    if (manifest.value("dtype", std::string("f32")) != "f32") throw ConfigError("dataset dtype must be f32");
    const auto n = manifest.at("samples").get<std::size_t>();
    const auto c = manifest.at("coils").get<std::size_t>();
    const auto h = manifest.at("height").get<std::size_t>();
    const auto w = manifest.at("width").get<std::size_t>();
    const json& files = manifest.at("files");
    auto load_complex = [&](const std::string& key) {
      const json& e = files.at(key);
      const auto shape = e.at("shape").get<std::vector<std::size_t>>();
      if (shape != std::vector<std::size_t>{n, c, h, w}) throw ConfigError(key + " shape disagrees with manifest");
      const std::size_t count = n * c * h * w;
      auto buf = read_floats(dir / e.at("path").get<std::string>(), 2 * count, e.value("offset", std::uint64_t{0}));
      std::vector<T> re(count);
      std::vector<T> im(count);
      for (std::size_t i = 0; i < count; ++i) {
        re[i] = static_cast<T>(buf[2 * i]);
        im[i] = static_cast<T>(buf[2 * i + 1]);
      }
      return ComplexTensor<T>(Tensor<T>(Shape{n, c, h, w}, std::move(re)), Tensor<T>(Shape{n, c, h, w}, std::move(im)));
    };
    Dataset<T> d;
    d.kspace.y = load_complex("kspace");
    d.target = load_complex("target");
    const json& me = files.at("mask");
    const auto mbuf = read_floats(dir / me.at("path").get<std::string>(), h * w, me.value("offset", std::uint64_t{0}));
    SamplingMask mask;
    mask.h = h;
    mask.w = w;
    mask.bits.resize(h * w);
    for (std::size_t i = 0; i < h * w; ++i) {
      if (mbuf[i] != 0.0f && mbuf[i] != 1.0f) throw ConfigError("mask.bin must contain only 0 and 1");
      mask.bits[i] = mbuf[i] != 0.0f ? 1 : 0;
    }
    mask.pattern = parse_mask_pattern(manifest.value("pattern", std::string("uniform1d")));
    mask.acceleration = manifest.value("acceleration", 1);
    mask.center_fraction = manifest.value("center_fraction", 0.0);
    mask.seed = manifest.value("seed", std::uint64_t{0});
    d.kspace.mask = std::move(mask);
    const std::size_t P = h * w;
    for (std::size_t s = 0; s < n * c; ++s) {
      for (std::size_t i = 0; i < P; ++i) {
        if (!d.kspace.mask.bits[i] && (d.kspace.y.re.data()[s * P + i] != T(0) || d.kspace.y.im.data()[s * P + i] != T(0))) {
          throw ConfigError("kspace.bin has nonzero samples outside the mask");
        }
      }
    }
    d.info = manifest;
    d.info.erase("files");
    return d;
  } catch (const json::exception& e) {
    throw ConfigError("malformed dataset manifest: " + std::string(e.what()));
  }
}

template struct Dataset<float>;
template struct Dataset<double>;
template Dataset<float> read_dataset(const fs::path&);
template Dataset<double> read_dataset(const fs::path&);

}  // namespace donet
