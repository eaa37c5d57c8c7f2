#include "donet/app/config.hpp"

#include <fstream>

#include "donet/kspace.hpp"
#include "donet/phantom.hpp"

namespace donet::app {

using nlohmann::json;

const std::vector<KeySpec>& config_schema() {
  static const std::vector<KeySpec> schema = {
      {"phantom", KeyType::String, "phantom family: shepp_logan, blobs, checker"},
      {"h", KeyType::Integer, "image height"},
      {"w", KeyType::Integer, "image width"},
      {"coils", KeyType::Integer, "receiver coils"},
      {"pattern", KeyType::String, "mask: uniform1d, cartesian1d, random2d, radial2d"},
      {"R", KeyType::Integer, "acceleration"},
      {"center_fraction", KeyType::Number, "fully sampled centre band (1-D masks)"},
      {"samples", KeyType::Integer, "simulated samples"},
      {"alpha", KeyType::Number, "low-frequency channel ratio"},
      {"T", KeyType::Integer, "cascade blocks"},
      {"K", KeyType::Integer, "Dual-OctConv layers per block"},
      {"channels", KeyType::Integer, "complex feature channels"},
      {"kernel", KeyType::Integer, "convolution kernel size"},
      {"dense", KeyType::Boolean, "dense connections inside blocks"},
      {"lr", KeyType::Number, "Adam learning rate"},
      {"decay", KeyType::Number, "per-epoch decay factor"},
      {"decay_mode", KeyType::String, "lr (learning-rate decay) or weight (decoupled weight decay)"},
      {"batch", KeyType::Integer, "mini-batch size"},
      {"iters", KeyType::Integer, "optimizer steps"},
      {"val_fraction", KeyType::Number, "held-out fraction for validation"},
      {"seed", KeyType::Integer, "random seed"},
      {"precision", KeyType::String, "f32 or f64"},
      {"out_dir", KeyType::String, "output directory"},
  };
  return schema;
}

namespace {

const KeySpec* find_key(const std::string& name) {
  for (const auto& k : config_schema()) {
    if (name == k.name) return &k;
  }
  return nullptr;
}

bool type_ok(KeyType t, const json& v) {
  switch (t) {
    case KeyType::Integer:
      return v.is_number_integer();
    case KeyType::Number:
      return v.is_number();
    case KeyType::Boolean:
      return v.is_boolean();
    case KeyType::String:
      return v.is_string();
  }
  return false;
}

const char* type_name(KeyType t) {
  switch (t) {
    case KeyType::Integer:
      return "an integer";
    case KeyType::Number:
      return "a number";
    case KeyType::Boolean:
      return "a boolean";
    case KeyType::String:
      return "a string";
  }
  return "?";
}

template <typename U>
void read_unsigned(const json& j, const char* key, U& out) {
  if (!j.contains(key)) return;
  const auto v = j.at(key).get<long long>();
  if (v < 0) throw ConfigError(std::string(key) + " must be non-negative");
  out = static_cast<U>(v);
}

template <typename U>
void read(const json& j, const char* key, U& out) {
  if (j.contains(key)) out = j.at(key).get<U>();
}

}  // namespace

SimulationSpec RunConfig::simulation() const {
  SimulationSpec s;
  s.phantom = parse_phantom_kind(phantom);
  s.h = h;
  s.w = w;
  s.coils = coils;
  s.samples = samples;
  s.pattern = parse_mask_pattern(pattern);
  s.acceleration = R;
  s.center_fraction = center_fraction;
  s.seed = seed;
  return s;
}

CascadeConfig RunConfig::cascade() const {
  CascadeConfig c;
  c.blocks = T;
  c.block.layers = K;
  c.block.channels = channels;
  c.block.alpha = alpha;
  c.block.kernel = kernel;
  c.block.dense = dense;
  c.coils = coils;
  return c;
}

TrainConfig RunConfig::training() const {
  TrainConfig t;
  t.lr = lr;
  t.decay = decay;
  t.decay_mode = parse_decay_mode(decay_mode);
  t.batch = batch;
  t.iters = iters;
  t.seed = seed;
  t.val_fraction = val_fraction;
  t.out_dir = out_dir;
  return t;
}

Precision RunConfig::dtype() const {
  if (precision == "f32") return Precision::F32;
  if (precision == "f64") return Precision::F64;
  throw ConfigError("precision must be \"f32\" or \"f64\", got \"" + precision + "\"");
}

void RunConfig::validate() const {
  parse_phantom_kind(phantom);
  parse_mask_pattern(pattern);
  if (h < 16 || w < 16 || h % 2 || w % 2) throw ConfigError("h and w must be even and at least 16");
  if (coils < 1) throw ConfigError("coils must be at least 1");
  if (samples < 1) throw ConfigError("samples must be at least 1");
  if (R < 2) throw ConfigError("R must be at least 2");
  if (!(center_fraction >= 0.0 && center_fraction <= 0.2)) throw ConfigError("center_fraction must lie in [0, 0.2]");
  if (out_dir.empty()) throw ConfigError("out_dir must not be empty");
  dtype();
  cascade().validate();
  training().validate();
}

RunConfig parse_run_config(const json& j) {
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  std::vector<std::string> problems;
  for (const auto& [key, value] : j.items()) {
    const KeySpec* spec = find_key(key);
    if (!spec) {
      problems.push_back("unknown key \"" + key + "\"");
    } else if (!type_ok(spec->type, value)) {
      problems.push_back("\"" + key + "\" must be " + type_name(spec->type));
    }
  }
  if (!problems.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ConfigError(msg);
  }
  RunConfig c;
  read(j, "phantom", c.phantom);
  read_unsigned(j, "h", c.h);
  read_unsigned(j, "w", c.w);
  read_unsigned(j, "coils", c.coils);
  read(j, "pattern", c.pattern);
  read(j, "R", c.R);
  read(j, "center_fraction", c.center_fraction);
  read_unsigned(j, "samples", c.samples);
  read(j, "alpha", c.alpha);
  read_unsigned(j, "T", c.T);
  read_unsigned(j, "K", c.K);
  read_unsigned(j, "channels", c.channels);
  read_unsigned(j, "kernel", c.kernel);
  read(j, "dense", c.dense);
  read(j, "lr", c.lr);
  read(j, "decay", c.decay);
  read(j, "decay_mode", c.decay_mode);
  read_unsigned(j, "batch", c.batch);
  read_unsigned(j, "iters", c.iters);
  read(j, "val_fraction", c.val_fraction);
  read_unsigned(j, "seed", c.seed);
  read(j, "precision", c.precision);
  read(j, "out_dir", c.out_dir);
  c.validate();
  return c;
}

json to_json(const RunConfig& c) {
  return {{"phantom", c.phantom},
          {"h", c.h},
          {"w", c.w},
          {"coils", c.coils},
          {"pattern", c.pattern},
          {"R", c.R},
          {"center_fraction", c.center_fraction},
          {"samples", c.samples},
          {"alpha", c.alpha},
          {"T", c.T},
          {"K", c.K},
          {"channels", c.channels},
          {"kernel", c.kernel},
          {"dense", c.dense},
          {"lr", c.lr},
          {"decay", c.decay},
          {"decay_mode", c.decay_mode},
          {"batch", c.batch},
          {"iters", c.iters},
          {"val_fraction", c.val_fraction},
          {"seed", c.seed},
          {"precision", c.precision},
          {"out_dir", c.out_dir}};
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file " + path.string());
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

json coerce_value(const KeySpec& key, const std::string& text) {
  try {
    std::size_t used = 0;
    switch (key.type) {
      case KeyType::Integer: {
        const long long v = std::stoll(text, &used);
        if (used != text.size()) break;
        return v;
      }
      case KeyType::Number: {
        const double v = std::stod(text, &used);
        if (used != text.size()) break;
        return v;
      }
      case KeyType::Boolean:
        if (text == "true" || text == "1") return true;
        if (text == "false" || text == "0") return false;
        break;
      case KeyType::String:
        return text;
    }
  } catch (const std::logic_error&) {
  }
  throw ConfigError("--" + std::string(key.name) + " expects " + type_name(key.type) + ", got \"" + text + "\"");
}

}  // namespace donet::app
