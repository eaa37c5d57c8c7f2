#include "donet/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "donet/checkpoint.hpp"
#include "donet/evaluate.hpp"
#include "donet/random.hpp"

namespace donet {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(DecayMode m) { return m == DecayMode::LearningRate ? "lr" : "weight"; }

DecayMode parse_decay_mode(const std::string& s) {
  if (s == "lr") return DecayMode::LearningRate;
  if (s == "weight") return DecayMode::Weight;
  throw ConfigError("decay_mode must be \"lr\" or \"weight\", got \"" + s + "\"");
}

void TrainConfig::validate() const {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ConfigError("lr must be finite and >= 0");
  if (!(decay > 0.0 && decay <= 1.0)) throw ConfigError("decay must lie in (0, 1]");
  if (batch < 1) throw ConfigError("batch must be at least 1");
  if (iters < 1) throw ConfigError("iters must be at least 1");
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) throw ConfigError("val_fraction must lie in [0, 1)");
  if (resume && out_dir.empty()) throw ConfigError("resume needs an output directory");
}

DataSplit split_indices(std::size_t n, double val_fraction, std::uint64_t seed) {
  if (n == 0) throw ConfigError("dataset is empty");
  std::size_t n_val = static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(n)));
  if (val_fraction > 0.0 && n_val == 0 && n >= 2) n_val = 1;
  if (n_val >= n) n_val = n - 1;
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed ^ 0x5eed5eed5eed5eedULL);
  for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
  DataSplit s;
  s.train.assign(perm.begin(), perm.end() - static_cast<std::ptrdiff_t>(n_val));
  s.val.assign(perm.end() - static_cast<std::ptrdiff_t>(n_val), perm.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.val.begin(), s.val.end());
  return s;
}

std::vector<std::vector<std::size_t>> epoch_batches(const std::vector<std::size_t>& train, std::size_t batch,
                                                    std::uint64_t seed, std::size_t epoch) {
  std::vector<std::size_t> order = train;
  Rng rng(seed * 0x9e3779b97f4a7c15ULL + epoch + 1);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t start = 0; start < order.size(); start += batch) {
    const auto first = order.begin() + static_cast<std::ptrdiff_t>(start);
    const auto last = order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), start + batch));
    std::vector<std::size_t> b(first, last);
    std::sort(b.begin(), b.end());
    out.push_back(std::move(b));
  }
  return out;
}

double scheduled_lr(const TrainConfig& cfg, std::uint64_t step, std::size_t steps_per_epoch) {
  if (cfg.decay_mode == DecayMode::Weight) return cfg.lr;
  const auto epoch = static_cast<double>(step / steps_per_epoch);
  return cfg.lr * std::pow(cfg.decay, epoch);
}

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

template <typename T>
std::vector<std::pair<std::string, const Tensor<T>*>> state_tensors(std::vector<ParamRef<T>>& params,
                                                                    const AdamState<T>* adam) {
  std::vector<std::pair<std::string, const Tensor<T>*>> out;
  for (const auto& p : params) out.emplace_back(p.name, p.value);
  if (adam) {
    std::size_t k = 0;
    for (const auto& p : params) {
      if (!p.trainable()) continue;
      out.emplace_back("adam.m." + p.name, &adam->m[k]);
      out.emplace_back("adam.v." + p.name, &adam->v[k]);
      ++k;
    }
  }
  return out;
}

template <typename T>
std::vector<std::pair<std::string, Tensor<T>*>> mutable_tensors(std::vector<ParamRef<T>>& params,
                                                                AdamState<T>* adam) {
  std::vector<std::pair<std::string, Tensor<T>*>> out;
  for (const auto& p : params) out.emplace_back(p.name, p.value);
  if (adam) {
    std::size_t k = 0;
    for (const auto& p : params) {
      if (!p.trainable()) continue;
      out.emplace_back("adam.m." + p.name, &adam->m[k]);
      out.emplace_back("adam.v." + p.name, &adam->v[k]);
      ++k;
    }
  }
  return out;
}

json train_json(const TrainConfig& c) {
  return {{"lr", c.lr},       {"decay", c.decay}, {"decay_mode", to_string(c.decay_mode)},
          {"batch", c.batch}, {"iters", c.iters}, {"seed", c.seed},
          {"val_fraction", c.val_fraction}};
}

// Keeps the header and every row whose iteration is <= `step`.
void truncate_log(const fs::path& path, std::uint64_t step) {
  std::ifstream in(path);
  std::vector<std::string> keep;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      keep.push_back(line);
      header = false;
      continue;
    }
    if (std::stoull(line.substr(0, line.find(','))) <= step) keep.push_back(line);
  }
  in.close();
  std::ofstream out(path, std::ios::trunc);
  if (keep.empty()) keep.push_back(log_header());
  for (const auto& l : keep) out << l << '\n';
}

}  // namespace

std::string log_header() { return "iter,epoch,lr,train_l1,val_psnr,val_ssim"; }

std::string format_log_row(const LogRow& r) {
  std::string s = std::to_string(r.iter) + ',' + std::to_string(r.epoch) + ',' + num(r.lr) + ',' + num(r.train_l1) + ',';
  if (r.val_psnr) s += num(*r.val_psnr);
  s += ',';
  if (r.val_ssim) s += num(*r.val_ssim);
  return s;
}

json to_json(const CascadeConfig& c) {
  return {{"blocks", c.blocks},      {"layers", c.block.layers}, {"channels", c.block.channels},
          {"alpha", c.block.alpha},  {"kernel", c.block.kernel}, {"dense", c.block.dense},
          {"coils", c.coils}};
}

CascadeConfig cascade_from_json(const json& j) {
  try {
    CascadeConfig c;
    c.blocks = j.at("blocks").get<std::size_t>();
    c.block.layers = j.at("layers").get<std::size_t>();
    c.block.channels = j.at("channels").get<std::size_t>();
    c.block.alpha = j.at("alpha").get<double>();
    c.block.kernel = j.at("kernel").get<std::size_t>();
    c.block.dense = j.at("dense").get<bool>();
    c.coils = j.at("coils").get<std::size_t>();
    return c;
  } catch (const json::exception& e) {
    throw ConfigError("malformed model description: " + std::string(e.what()));
  }
}

template <typename T>
void save_model(const fs::path& dir, DONet<T>& model, const json& meta) {
  auto params = model.params();
  json m = meta;
  m["model"] = to_json(model.config());
  save_checkpoint<T>(dir, m, state_tensors<T>(params, nullptr));
}

template <typename T>
json load_model(const fs::path& dir, DONet<T>& model) {
  auto params = model.params();
  return load_checkpoint<T>(dir, mutable_tensors<T>(params, nullptr), true);
}

template <typename T>
TrainResult fit(DONet<T>& model, const Dataset<T>& data, const TrainConfig& cfg) {
  cfg.validate();
  if (data.size() == 0) throw ConfigError("dataset is empty");
  if (data.coils() != model.config().coils) {
    throw ConfigError("model expects " + std::to_string(model.config().coils) + " coils, dataset has " +
                      std::to_string(data.coils()));
  }
  TrainResult result;
  result.split = split_indices(data.size(), cfg.val_fraction, cfg.seed);
  const DataSplit& split = result.split;
  const std::size_t spe = (split.train.size() + cfg.batch - 1) / cfg.batch;

  auto params = model.params();
  AdamState<T> adam = AdamState<T>::for_params(params);
  const fs::path ckpt_dir = cfg.out_dir / "checkpoints";
  const fs::path log_path = cfg.out_dir / "train_log.csv";
  const bool persist = !cfg.out_dir.empty();

  std::uint64_t step = 0;
  if (cfg.resume) {
    const json meta = load_checkpoint<T>(ckpt_dir / "last", mutable_tensors<T>(params, &adam));
    step = meta.at("step").get<std::uint64_t>();
    adam.step = meta.at("adam_step").get<std::uint64_t>();
    if (meta.contains("best_val_psnr") && !meta["best_val_psnr"].is_null()) {
      result.best_val_psnr = meta["best_val_psnr"].get<double>();
    }
    truncate_log(log_path, step);
  } else if (persist) {
    fs::create_directories(cfg.out_dir);
    std::ofstream(log_path, std::ios::trunc) << log_header() << '\n';
  }
  std::ofstream log;
  if (persist) log.open(log_path, std::ios::app);

  auto meta_for = [&](std::uint64_t s) {
    json m = {{"step", s}, {"adam_step", adam.step}, {"train", train_json(cfg)}, {"model", to_json(model.config())}};
    m["best_val_psnr"] = result.best_val_psnr ? json(*result.best_val_psnr) : json(nullptr);
    return m;
  };
  auto save_last = [&](std::uint64_t s) {
    if (persist) save_checkpoint<T>(ckpt_dir / "last", meta_for(s), state_tensors<T>(params, &adam));
  };

  const double weight_decay = cfg.decay_mode == DecayMode::Weight ? cfg.decay : 0.0;
  std::size_t cached_epoch = static_cast<std::size_t>(-1);
  std::vector<std::vector<std::size_t>> batches;
  std::size_t ran = 0;
  while (step < cfg.iters) {
    const std::size_t epoch = static_cast<std::size_t>(step / spe);
    const std::size_t pos = static_cast<std::size_t>(step % spe);
    if (epoch != cached_epoch) {
      batches = epoch_batches(split.train, cfg.batch, cfg.seed, epoch);
      cached_epoch = epoch;
    }
    const auto& idx = batches[pos];
    const double lr_t = scheduled_lr(cfg, step, spe);

    model.zero_grad();
    const ComplexTensor<T> target = data.targets(idx);
    const ComplexTensor<T> pred = model.forward(data.measurement(idx), BnMode::Train);
    const T loss = l1_loss(pred, target);
    if (!std::isfinite(static_cast<double>(loss))) {
      throw NumericsError("training loss became non-finite at iteration " + std::to_string(step + 1));
    }
    model.backward(l1_loss_grad(pred, target));
    adam_step<T>(params, adam, lr_t, weight_decay);
    ++step;
    ++ran;

    LogRow row{step, epoch, lr_t, static_cast<double>(loss), std::nullopt, std::nullopt};
    const bool epoch_end = pos + 1 == spe;
    const bool last = step == cfg.iters;
    if ((epoch_end || last) && !split.val.empty()) {
      const EvalSummary ev = evaluate(model, data, split.val, cfg.batch);
      row.val_psnr = ev.psnr.mean;
      row.val_ssim = ev.ssim.mean;
      if (!result.best_val_psnr || ev.psnr.mean > *result.best_val_psnr) {
        result.best_val_psnr = ev.psnr.mean;
        if (persist) save_model(ckpt_dir / "best", model, meta_for(step));
      }
    }
    if (persist) log << format_log_row(row) << '\n' << std::flush;
    result.log.push_back(row);

    const bool interrupted = cfg.stop_after != 0 && ran == cfg.stop_after;
    if (epoch_end || last || interrupted || (cfg.checkpoint_every != 0 && step % cfg.checkpoint_every == 0)) {
      save_last(step);
    }
    if (interrupted) break;
  }
  if (persist && split.val.empty() && step == cfg.iters) save_model(ckpt_dir / "best", model, meta_for(step));
  result.steps = step;
  return result;
}

#define DONET_INSTANTIATE(T)                                                        \
  template void save_model(const fs::path&, DONet<T>&, const json&);                \
  template json load_model(const fs::path&, DONet<T>&);                             \
  template TrainResult fit(DONet<T>&, const Dataset<T>&, const TrainConfig&);

DONET_INSTANTIATE(float)
DONET_INSTANTIATE(double)

}  // namespace donet
