#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "donet/tensor.hpp"

namespace donet {

// On-disk layout of a checkpoint directory:
//   manifest.json  {"format": "donet-checkpoint", "version": 1, "payload": "payload.bin",
//                   "meta": {...}, "tensors": [{"name", "shape": [n,c,h,w], "dtype": "f32"|"f64",
//                   "offset", "bytes"}]}
//   payload.bin    raw little-endian tensor data, concatenated in manifest order
template <typename T>
void save_checkpoint(const std::filesystem::path& dir, const nlohmann::json& meta,
                     const std::vector<std::pair<std::string, const Tensor<T>*>>& tensors);

// Fills every listed tensor by name (shapes must match; other dtypes are
// converted) and returns the manifest's "meta" object. Missing names throw
// ConfigError unless `allow_missing` is set, in which case they are left untouched.
template <typename T>
nlohmann::json load_checkpoint(const std::filesystem::path& dir,
                               const std::vector<std::pair<std::string, Tensor<T>*>>& tensors,
                               bool allow_missing = false);

nlohmann::json read_checkpoint_meta(const std::filesystem::path& dir);

template <typename T>
constexpr const char* dtype_name() {
  return sizeof(T) == 4 ? "f32" : "f64";
}

}  // namespace donet
