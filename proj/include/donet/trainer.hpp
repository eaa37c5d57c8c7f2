#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "donet/adam.hpp"
#include "donet/cascade.hpp"
#include "donet/dataset.hpp"

namespace donet {

// How the "decay" factor is applied: per-epoch multiplicative learning-rate
// decay, or decoupled weight decay with coefficient `decay` and constant lr.
enum class DecayMode { LearningRate, Weight };

std::string to_string(DecayMode m);
DecayMode parse_decay_mode(const std::string& s);

struct TrainConfig {
  double lr = 1e-3;
  double decay = 0.95;
  DecayMode decay_mode = DecayMode::LearningRate;
  std::size_t batch = 4;
  std::size_t iters = 500;
  std::uint64_t seed = 0;
  double val_fraction = 0.2;
  // Output directory for train_log.csv and checkpoints/{last,best}; empty keeps everything in memory.
  std::filesystem::path out_dir;
  // Continue from out_dir/checkpoints/last.
  bool resume = false;
  // Stop after this many steps in this invocation (simulates an interruption); 0 = no limit.
  std::size_t stop_after = 0;
  std::size_t checkpoint_every = 0;  // 0: only at epoch ends and the final step

  void validate() const;
};

struct DataSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
};

// Deterministic hold-out split; both lists are sorted.
DataSplit split_indices(std::size_t n, double val_fraction, std::uint64_t seed);

// Training batches of one epoch: a seeded shuffle of `train` cut into
// consecutive chunks of `batch` (the last may be short), each sorted.
std::vector<std::vector<std::size_t>> epoch_batches(const std::vector<std::size_t>& train, std::size_t batch,
                                                    std::uint64_t seed, std::size_t epoch);

// lr * decay^floor(step / steps_per_epoch) in learning-rate mode, lr otherwise.
double scheduled_lr(const TrainConfig& cfg, std::uint64_t step, std::size_t steps_per_epoch);

struct LogRow {
  std::uint64_t iter = 0;
  std::size_t epoch = 0;
  double lr = 0.0;
  double train_l1 = 0.0;
  std::optional<double> val_psnr;
  std::optional<double> val_ssim;
};

std::string log_header();
std::string format_log_row(const LogRow& row);

struct TrainResult {
  std::vector<LogRow> log;  // rows produced by this invocation
  std::uint64_t steps = 0;  // total optimizer steps after this invocation
  std::optional<double> best_val_psnr;
  DataSplit split;
};

nlohmann::json to_json(const CascadeConfig& c);
CascadeConfig cascade_from_json(const nlohmann::json& j);

// Mini-batch Adam on the mean l1 between the cascade output and the coil
// targets. Validation PSNR/SSIM (eval-mode BN) is logged at each epoch end and
// at the final step. A non-finite loss or gradient aborts with NumericsError,
// leaving the last good checkpoint in place.
template <typename T>
TrainResult fit(DONet<T>& model, const Dataset<T>& data, const TrainConfig& cfg);

// Parameters (and BN running statistics) of a model. `meta` is stored verbatim.
template <typename T>
void save_model(const std::filesystem::path& dir, DONet<T>& model, const nlohmann::json& meta);
template <typename T>
nlohmann::json load_model(const std::filesystem::path& dir, DONet<T>& model);

}  // namespace donet
