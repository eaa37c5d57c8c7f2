#include "donet/app/commands.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "donet/app/config.hpp"
#include "donet/checkpoint.hpp"
#include "donet/evaluate.hpp"
#include "donet/init.hpp"
#include "donet/metrics.hpp"
#include "donet/parallel.hpp"

namespace donet::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

struct Common {
  std::string config_path;
  std::map<std::string, std::string> overrides;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "JSON configuration file; command-line keys override it");
  for (const auto& key : config_schema()) {
    cmd->add_option(std::string("--") + key.name, c.overrides[key.name], key.help);
  }
}

RunConfig resolve(CLI::App* cmd, const Common& c) {
  json j = json::object();
  if (!c.config_path.empty()) {
    j = read_json_file(c.config_path);
    if (!j.is_object()) throw ConfigError(c.config_path + " must hold a JSON object");
  }
  for (const auto& key : config_schema()) {
    if (cmd->get_option(std::string("--") + key.name)->count() > 0) {
      j[key.name] = coerce_value(key, c.overrides.at(key.name));
    }
  }
  return parse_run_config(j);
}

// run_config.json holds only reproducible inputs; wall-clock data goes to run_meta.json.
void write_run_files(const RunConfig& cfg, const std::string& command) {
  fs::create_directories(cfg.out_dir);
  std::ofstream(fs::path(cfg.out_dir) / "run_config.json", std::ios::trunc) << to_json(cfg).dump(2) << '\n';
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  const json meta = {{"command", command}, {"finished_utc", stamp}, {"threads", num_threads()}};
  std::ofstream(fs::path(cfg.out_dir) / "run_meta.json", std::ios::trunc) << meta.dump(2) << '\n';
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  const Dataset<float> data = simulate_dataset(cfg.simulation());
  write_dataset(cfg.out_dir, data);
  const SamplingMask& m = data.kspace.mask;
  out << "dataset: " << cfg.out_dir << " (" << data.size() << " samples, " << data.coils() << " coils, " << m.h
      << "x" << m.w << ")\n";
  out << "mask: " << to_string(m.pattern) << " sampled " << m.sampled() << "/" << m.h * m.w
      << " fraction=" << num(m.sampled_fraction()) << " effective_R=" << num(1.0 / m.sampled_fraction()) << '\n';
  return kExitOk;
}

struct TrainFlags {
  std::string data;
  bool resume = false;
  std::size_t stop_after = 0;
  std::size_t checkpoint_every = 0;
};

template <typename T>
int train_as(const RunConfig& cfg, const TrainFlags& flags, std::ostream& out) {
  const Dataset<T> data = read_dataset<T>(flags.data);
  DONet<T> model(cfg.cascade());
  initialize(model, cfg.seed);
  TrainConfig tc = cfg.training();
  tc.resume = flags.resume;
  tc.stop_after = flags.stop_after;
  tc.checkpoint_every = flags.checkpoint_every;
  const TrainResult r = fit(model, data, tc);
  out << "trained " << r.steps << " steps (" << model.parameter_count() << " parameters)";
  if (!r.log.empty()) out << ", final train_l1=" << num(r.log.back().train_l1);
  if (r.best_val_psnr) out << ", best val_psnr=" << num(*r.best_val_psnr);
  out << "\nlog: " << (fs::path(cfg.out_dir) / "train_log.csv").string() << '\n';
  return kExitOk;
}

struct EvalFlags {
  std::string data;
  std::string checkpoint;
  std::string split = "all";
};

std::vector<std::size_t> select_split(const std::string& which, std::size_t n, const RunConfig& cfg) {
  if (which == "all") {
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    return all;
  }
  const DataSplit s = split_indices(n, cfg.val_fraction, cfg.seed);
  if (which == "train") return s.train;
  if (which == "val") {
    if (s.val.empty()) throw ConfigError("validation split is empty (val_fraction = 0)");
    return s.val;
  }
  throw ConfigError("--split must be all, train or val");
}

template <typename T>
int eval_as(const RunConfig& cfg, const EvalFlags& flags, std::ostream& out) {
  const Dataset<T> data = read_dataset<T>(flags.data);
  const fs::path ckpt = flags.checkpoint.empty() ? fs::path(cfg.out_dir) / "checkpoints" / "best" : fs::path(flags.checkpoint);
  const json meta = read_checkpoint_meta(ckpt);
  if (!meta.contains("model")) throw ConfigError(ckpt.string() + " does not describe a model");
  const CascadeConfig mc = cascade_from_json(meta.at("model"));
  if (mc.coils != data.coils()) {
    throw ConfigError("checkpoint expects " + std::to_string(mc.coils) + " coils, dataset has " +
                      std::to_string(data.coils()));
  }
  DONet<T> model(mc);
  load_model(ckpt, model);
  const auto idx = select_split(flags.split, data.size(), cfg);
  const EvalSummary s = evaluate(model, data, idx, cfg.batch);
  fs::create_directories(cfg.out_dir);
  write_report_csv(fs::path(cfg.out_dir) / "report.csv", s);

  const std::vector<std::size_t> first{idx.front()};
  const Tensor<T> recon = coil_combine(model.forward(data.measurement(first), BnMode::Eval));
  const Tensor<T> truth = coil_combine(data.targets(first));
  write_error_grid(fs::path(cfg.out_dir) / "error_grid.png", recon, truth);

  out << "samples=" << s.rows.size() << " psnr=" << num(s.psnr.mean) << "+-" << num(s.psnr.std)
      << " ssim=" << num(s.ssim.mean) << "+-" << num(s.ssim.std) << " zero_filled_psnr=" << num(s.zf_psnr.mean)
      << " zero_filled_ssim=" << num(s.zf_ssim.mean) << '\n';
  return kExitOk;
}

struct AblateFlags {
  std::string sweep;
  std::vector<double> values;
  std::string data;
};

template <typename T>
int ablate_as(const RunConfig& base, const AblateFlags& flags, std::ostream& out) {
  if (flags.sweep != "alpha" && flags.sweep != "blocks") throw ConfigError("--sweep must be alpha or blocks");
  std::vector<double> values = flags.values;
  if (values.empty()) {
    values = flags.sweep == "alpha" ? std::vector<double>{0, 0.125, 0.25, 0.5, 0.75, 0.875}
                                    : std::vector<double>{1, 2, 3, 4, 5};
  }
  std::optional<Dataset<T>> data;
  if (!flags.data.empty()) data = read_dataset<T>(flags.data);

  fs::create_directories(base.out_dir);
  std::ofstream csv(fs::path(base.out_dir) / "ablation.csv", std::ios::trunc);
  csv << "sweep,value,flops,params,psnr,ssim\n";
  for (double v : values) {
    RunConfig cfg = base;
    if (flags.sweep == "alpha") {
      cfg.alpha = v;
    } else {
      if (v < 1 || v != static_cast<double>(static_cast<std::size_t>(v))) {
        throw ConfigError("block counts must be positive integers");
      }
      cfg.T = static_cast<std::size_t>(v);
    }
    cfg.validate();
    DONet<T> model(cfg.cascade());
    initialize(model, cfg.seed);
    const std::uint64_t flops = cascade_flops(model, cfg.h, cfg.w);
    std::string psnr_s, ssim_s;
    if (data) {
      TrainConfig tc = cfg.training();
      tc.out_dir.clear();
      const TrainResult r = fit(model, *data, tc);
      const EvalSummary s = evaluate(model, *data, r.split.val.empty() ? r.split.train : r.split.val, cfg.batch);
      psnr_s = num(s.psnr.mean);
      ssim_s = num(s.ssim.mean);
    }
    csv << flags.sweep << ',' << num(v) << ',' << flops << ',' << model.parameter_count() << ',' << psnr_s << ','
        << ssim_s << '\n';
    out << flags.sweep << '=' << num(v) << " flops=" << flops << " params=" << model.parameter_count();
    if (data) out << " psnr=" << psnr_s << " ssim=" << ssim_s;
    out << '\n';
  }
  return kExitOk;
}

int cmd_flops(const RunConfig& cfg, std::ostream& out) {
  DONet<float> model(cfg.cascade());
  json layers = json::array();
  std::uint64_t per_block = 0;
  for (auto& layer : model.blocks().front().layers()) {
    const FlopsReport r =
        count_flops(layer.weight.in, layer.weight.out, cfg.h, cfg.w, layer.weight.kernel_size, cfg.alpha);
    layers.push_back({{"in", {layer.weight.in.high, layer.weight.in.low}},
                      {"out", {layer.weight.out.high, layer.weight.out.low}},
                      {"mul_adds", r.total_mul_adds},
                      {"per_path", r.per_path}});
    per_block += r.total_mul_adds;
  }
  const FlopsReport cc = count_flops(cfg.channels, cfg.channels, cfg.alpha, cfg.h, cfg.w, cfg.kernel);
  const json report = {{"alpha", cfg.alpha},
                       {"h", cfg.h},
                       {"w", cfg.w},
                       {"c_to_c_layer", cc.total_mul_adds},
                       {"block_layers", layers},
                       {"per_block", per_block},
                       {"cascade", cascade_flops(model, cfg.h, cfg.w)}};
  out << report.dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dual-OctConv parallel MRI reconstruction", "donet"};
  app.set_help_flag("--help", "show help");
  app.require_subcommand(1);
  int threads = 1;
  bool deterministic = false;
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--deterministic", deterministic, "single-threaded, reproducible execution");

  Common c_sim, c_train, c_eval, c_ablate, c_flops;
  CLI::App* sim = app.add_subcommand("simulate", "synthesise a k-space dataset");
  add_common(sim, c_sim);

  TrainFlags tf;
  CLI::App* train = app.add_subcommand("train", "train a cascade on a dataset");
  add_common(train, c_train);
  train->add_option("--data", tf.data, "dataset directory")->required();
  train->add_flag("--resume", tf.resume, "continue from out_dir/checkpoints/last");
  train->add_option("--stop-after", tf.stop_after, "stop after this many steps (resume later)");
  train->add_option("--checkpoint-every", tf.checkpoint_every, "also checkpoint every N steps");

  EvalFlags ef;
  CLI::App* eval = app.add_subcommand("eval", "score a checkpoint against the zero-filled baseline");
  add_common(eval, c_eval);
  eval->add_option("--data", ef.data, "dataset directory")->required();
  eval->add_option("--checkpoint", ef.checkpoint, "checkpoint directory (default out_dir/checkpoints/best)");
  eval->add_option("--split", ef.split, "all, train or val");

  AblateFlags af;
  CLI::App* ablate = app.add_subcommand("ablate", "sweep alpha or the number of blocks");
  add_common(ablate, c_ablate);
  ablate->add_option("--sweep", af.sweep, "alpha or blocks")->required();
  ablate->add_option("--values", af.values, "sweep values")->delimiter(',');
  ablate->add_option("--data", af.data, "dataset directory; enables training and evaluation per setting");

  CLI::App* flops = app.add_subcommand("flops", "count Dual-OctConv multiply-adds");
  add_common(flops, c_flops);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    set_num_threads(deterministic ? 1 : threads);
    CLI::App* cmd = app.get_subcommands().front();
    const std::string name = cmd->get_name();
    auto pick = [&](Common& c) { return resolve(cmd, c); };
    int code = kExitOk;
    if (name == "simulate") {
      const RunConfig cfg = pick(c_sim);
      code = cmd_simulate(cfg, out);
      write_run_files(cfg, name);
    } else if (name == "train") {
      const RunConfig cfg = pick(c_train);
      code = cfg.dtype() == Precision::F32 ? train_as<float>(cfg, tf, out) : train_as<double>(cfg, tf, out);
      write_run_files(cfg, name);
    } else if (name == "eval") {
      const RunConfig cfg = pick(c_eval);
      code = cfg.dtype() == Precision::F32 ? eval_as<float>(cfg, ef, out) : eval_as<double>(cfg, ef, out);
    } else if (name == "ablate") {
      const RunConfig cfg = pick(c_ablate);
      code = cfg.dtype() == Precision::F32 ? ablate_as<float>(cfg, af, out) : ablate_as<double>(cfg, af, out);
    } else {
      code = cmd_flops(pick(c_flops), out);
    }
    return code;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ShapeError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericsError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace donet::app
