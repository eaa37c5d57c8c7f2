#include "donet/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>

#include "donet/errors.hpp"

namespace donet {

static_assert(std::endian::native == std::endian::little, "checkpoint IO assumes a little-endian host");

namespace fs = std::filesystem;
using nlohmann::json;

template <typename T>
void save_checkpoint(const fs::path& dir, const json& meta,
                     const std::vector<std::pair<std::string, const Tensor<T>*>>& tensors) {
  fs::create_directories(dir);
  json manifest;
  manifest["format"] = "donet-checkpoint";
  manifest["version"] = 1;
  manifest["payload"] = "payload.bin";
  manifest["meta"] = meta;
  manifest["tensors"] = json::array();
  std::ofstream payload(dir / "payload.bin", std::ios::binary | std::ios::trunc);
  if (!payload) throw ConfigError("cannot write " + (dir / "payload.bin").string());
  std::uint64_t offset = 0;
  for (const auto& [name, t] : tensors) {
    const Shape& s = t->shape();
    const std::uint64_t bytes = t->size() * sizeof(T);
    manifest["tensors"].push_back({{"name", name},
                                   {"shape", {s.n, s.c, s.h, s.w}},
                                   {"dtype", dtype_name<T>()},
                                   {"offset", offset},
                                   {"bytes", bytes}});
    payload.write(reinterpret_cast<const char*>(t->data().data()), static_cast<std::streamsize>(bytes));
    offset += bytes;
  }
  if (!payload) throw ConfigError("short write to " + (dir / "payload.bin").string());
  std::ofstream mf(dir / "manifest.json", std::ios::trunc);
  mf << manifest.dump(2) << '\n';
}

json read_checkpoint_meta(const fs::path& dir) {
  std::ifstream mf(dir / "manifest.json");
  if (!mf) throw ConfigError("missing checkpoint manifest in " + dir.string());
  json manifest = json::parse(mf, nullptr, true);
  if (manifest.value("format", "") != "donet-checkpoint") throw ConfigError("not a donet checkpoint: " + dir.string());
  return manifest.value("meta", json::object());
}

template <typename T>
json load_checkpoint(const fs::path& dir, const std::vector<std::pair<std::string, Tensor<T>*>>& tensors,
                     bool allow_missing) {
  std::ifstream mf(dir / "manifest.json");
  if (!mf) throw ConfigError("missing checkpoint manifest in " + dir.string());
  const json manifest = json::parse(mf);
  if (manifest.value("format", "") != "donet-checkpoint") throw ConfigError("not a donet checkpoint: " + dir.string());
  std::map<std::string, const json*> index;
  for (const auto& e : manifest.at("tensors")) index[e.at("name").get<std::string>()] = &e;

  std::ifstream payload(dir / manifest.value("payload", std::string("payload.bin")), std::ios::binary);
  if (!payload) throw ConfigError("missing checkpoint payload in " + dir.string());
  for (const auto& [name, t] : tensors) {
    auto it = index.find(name);
    if (it == index.end()) {
      if (allow_missing) continue;
      throw ConfigError("checkpoint lacks tensor " + name);
    }
    const json& e = *it->second;
    const auto dims = e.at("shape").get<std::vector<std::size_t>>();
    const Shape s{dims.at(0), dims.at(1), dims.at(2), dims.at(3)};
    if (!(s == t->shape())) {
      throw ShapeError("checkpoint tensor " + name + " has shape " + to_string(s) + ", model expects " +
                       to_string(t->shape()));
    }
    const std::string dtype = e.at("dtype").get<std::string>();
    const auto offset = e.at("offset").get<std::uint64_t>();
    payload.seekg(static_cast<std::streamoff>(offset));
    if (dtype == dtype_name<T>()) {
      payload.read(reinterpret_cast<char*>(t->data().data()), static_cast<std::streamsize>(t->size() * sizeof(T)));
    } else if (dtype == "f32") {
      std::vector<float> buf(t->size());
      payload.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
      for (std::size_t i = 0; i < buf.size(); ++i) t->data()[i] = static_cast<T>(buf[i]);
    } else if (dtype == "f64") {
      std::vector<double> buf(t->size());
      payload.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(double)));
      for (std::size_t i = 0; i < buf.size(); ++i) t->data()[i] = static_cast<T>(buf[i]);
    } else {
      throw ConfigError("checkpoint tensor " + name + " has unknown dtype " + dtype);
    }
    if (!payload) throw ConfigError("checkpoint payload truncated at " + name);
  }
  return manifest.value("meta", json::object());
}

template void save_checkpoint(const fs::path&, const json&,
                              const std::vector<std::pair<std::string, const Tensor<float>*>>&);
template void save_checkpoint(const fs::path&, const json&,
                              const std::vector<std::pair<std::string, const Tensor<double>*>>&);
template json load_checkpoint(const fs::path&, const std::vector<std::pair<std::string, Tensor<float>*>>&, bool);
template json load_checkpoint(const fs::path&, const std::vector<std::pair<std::string, Tensor<double>*>>&, bool);

}  // namespace donet
