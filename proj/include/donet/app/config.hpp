#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "donet/cascade.hpp"
#include "donet/dataset.hpp"
#include "donet/trainer.hpp"

namespace donet::app {

enum class Precision { F32, F64 };

// Flat run configuration. Every key is optional in JSON and on the command
// line; anything unknown or mistyped is rejected.
struct RunConfig {
  std::string phantom = "shepp_logan";
  std::size_t h = 32;
  std::size_t w = 32;
  std::size_t coils = 4;
  std::string pattern = "uniform1d";
  int R = 3;
  double center_fraction = 0.0;
  std::size_t samples = 20;
  double alpha = 0.125;
  std::size_t T = 10;
  std::size_t K = 4;
  std::size_t channels = 64;
  std::size_t kernel = 3;
  bool dense = true;
  double lr = 1e-3;
  double decay = 0.95;
  std::string decay_mode = "lr";
  std::size_t batch = 4;
  std::size_t iters = 500;
  double val_fraction = 0.2;
  std::uint64_t seed = 0;
  std::string precision = "f32";
  std::string out_dir = "out";

  SimulationSpec simulation() const;
  CascadeConfig cascade() const;
  TrainConfig training() const;
  Precision dtype() const;
  void validate() const;
};

enum class KeyType { Integer, Number, Boolean, String };

struct KeySpec {
  const char* name;
  KeyType type;
  const char* help;
};

// Every accepted key, in a stable order.
const std::vector<KeySpec>& config_schema();

// Strict conversion: unknown keys, wrong types and invalid values throw ConfigError.
RunConfig parse_run_config(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& c);

// Reads a JSON object from disk (ConfigError on I/O or syntax problems).
nlohmann::json read_json_file(const std::filesystem::path& path);

// Converts a command-line string to the JSON type the schema expects for `key`.
nlohmann::json coerce_value(const KeySpec& key, const std::string& text);

}  // namespace donet::app
