#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>

#include "donet/adam.hpp"
#include "donet/checkpoint.hpp"
#include "donet/dataset.hpp"
#include "donet/errors.hpp"
#include "donet/init.hpp"
#include "donet/trainer.hpp"
#include "fixtures.hpp"

using namespace donet;
using donet::testing::randomize_parameters;

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("donet_train_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Dataset<float> toy_data(std::size_t n, std::size_t size = 16) {
  SimulationSpec spec;
  spec.h = spec.w = size;
  spec.coils = 2;
  spec.samples = n;
  spec.seed = 11;
  return simulate_dataset(spec);
}

CascadeConfig toy_model(std::size_t channels = 8) {
  CascadeConfig c;
  c.blocks = 1;
  c.block.layers = 1;
  c.block.channels = channels;
  c.block.alpha = 0.25;
  c.coils = 2;
  return c;
}

std::vector<float> flat_params(DONet<float>& m) {
  std::vector<float> out;
  for (const auto& p : m.params()) out.insert(out.end(), p.value->data().begin(), p.value->data().end());
  return out;
}

struct Scalar {
  Tensor<double> value{Shape{1, 1, 1, 1}};
  Tensor<double> grad{Shape{1, 1, 1, 1}};
  std::vector<ParamRef<double>> refs() { return {{"p", &value, &grad}}; }
};

}  // namespace

TEST(Init, RayleighComponentVarianceMatchesSigmaSquared) {
  const std::size_t fan_in = 9;
  const auto [kr, ki] = init_complex_kernel<double>(Shape{100, 100, 10, 1}, fan_in, 3);
  const double sigma2 = 1.0 / fan_in;
  for (const auto* k : {&kr, &ki}) {
    double s = 0, s2 = 0;
    for (double v : k->data()) {
      s += v;
      s2 += v * v;
    }
    const double n = static_cast<double>(k->size());
    const double var = (s2 - s * s / n) / (n - 1);
    EXPECT_NEAR(var / sigma2, 1.0, 0.05);
  }
}

TEST(Init, PhaseIsUniform) {
  const auto [kr, ki] = init_complex_kernel<double>(Shape{1000, 100, 1, 1}, 4, 5);
  constexpr int kBins = 20;
  std::vector<double> counts(kBins, 0.0);
  for (std::size_t i = 0; i < kr.size(); ++i) {
    const double th = std::atan2(ki.data()[i], kr.data()[i]);
    const int b = std::min(kBins - 1, static_cast<int>((th + std::numbers::pi) / (2 * std::numbers::pi) * kBins));
    counts[b] += 1;
  }
  const double expected = static_cast<double>(kr.size()) / kBins;
  double chi2 = 0;
  for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
  EXPECT_LT(chi2, 36.19);  // chi-square, 19 dof, p = 0.01
}

TEST(Init, DeterministicPerSeed) {
  const auto a = init_complex_kernel<float>(Shape{4, 3, 3, 3}, 27, 8);
  const auto b = init_complex_kernel<float>(Shape{4, 3, 3, 3}, 27, 8);
  const auto c = init_complex_kernel<float>(Shape{4, 3, 3, 3}, 27, 9);
  EXPECT_EQ(a.first.vec(), b.first.vec());
  EXPECT_EQ(a.second.vec(), b.second.vec());
  EXPECT_NE(a.first.vec(), c.first.vec());

  DONet<float> m1(toy_model()), m2(toy_model());
  initialize(m1, 4);
  initialize(m2, 4);
  EXPECT_EQ(flat_params(m1), flat_params(m2));
}

TEST(Init, KaimingBound) {
  const auto k = init_kaiming_uniform<double>(Shape{8, 6, 3, 3}, 1);
  const double bound = std::sqrt(6.0 / 54.0);
  double mx = 0;
  for (double v : k.data()) mx = std::max(mx, std::abs(v));
  EXPECT_LE(mx, bound);
  EXPECT_GT(mx, 0.9 * bound);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  Tensor<double> p(Shape{1, 1, 2, 3}, 0.5);
  Tensor<double> g(Shape{1, 1, 2, 3}, {0.3, -2.0, 1e-3, 7.0, -0.01, 50.0});
  std::vector<ParamRef<double>> refs{{"p", &p, &g}};
  auto st = AdamState<double>::for_params(refs);
  adam_step<double>(refs, st, 0.01);
  for (std::size_t i = 0; i < 6; ++i) {
    const double moved = 0.5 - p.data()[i];
    EXPECT_NEAR(moved, 0.01 * (g.data()[i] > 0 ? 1 : -1), 1e-6);
  }
  EXPECT_EQ(st.step, 1u);
}

TEST(Adam, ZeroGradientsLeaveParametersUnchanged) {
  Tensor<double> p(Shape{1, 2, 2, 2}, 1.25), g(Shape{1, 2, 2, 2});
  std::vector<ParamRef<double>> refs{{"p", &p, &g}};
  auto st = AdamState<double>::for_params(refs);
  for (int i = 0; i < 100; ++i) adam_step<double>(refs, st, 0.1);
  for (double v : p.data()) EXPECT_EQ(v, 1.25);
}

// f(p) = p^2 from p = 1 at lr 0.1. With beta1 = 0.9 the iterate overshoots
// zero after 11 steps and rings with a shrinking envelope, so the descent is
// strict only up to the first crossing.
TEST(Adam, QuadraticDescends) {
  Scalar s;
  s.value.data()[0] = 1.0;
  auto refs = s.refs();
  auto st = AdamState<double>::for_params(refs);
  double m = 0, v = 0, ref = 1.0;  // scalar Adam written out
  std::vector<double> f{1.0};
  for (int t = 1; t <= 50; ++t) {
    s.grad.data()[0] = 2 * s.value.data()[0];
    adam_step<double>(refs, st, 0.1);
    const double g = 2 * ref;
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    ref -= 0.1 * (m / (1 - std::pow(0.9, t))) / (std::sqrt(v / (1 - std::pow(0.999, t))) + 1e-8);
    EXPECT_NEAR(s.value.data()[0], ref, 1e-12) << "step " << t;
    f.push_back(s.value.data()[0] * s.value.data()[0]);
  }
  for (int t = 1; t <= 11; ++t) EXPECT_LT(f[t], f[t - 1]) << "step " << t;
  const double env1 = *std::max_element(f.begin() + 11, f.begin() + 31);
  const double env2 = *std::max_element(f.begin() + 31, f.end());
  EXPECT_LT(env1, 0.1);
  EXPECT_LT(env2, env1);
  EXPECT_LT(f[50], 1e-3 * f[0]);
}

TEST(Adam, NonFiniteGradientRejectsStep) {
  Tensor<double> p(Shape{1, 1, 1, 3}, 2.0), g(Shape{1, 1, 1, 3}, 1.0);
  Tensor<double> q(Shape{1, 1, 1, 1}, -1.0), gq(Shape{1, 1, 1, 1}, 1.0);
  std::vector<ParamRef<double>> refs{{"p", &p, &g}, {"q", &q, &gq}};
  auto st = AdamState<double>::for_params(refs);
  gq.data()[0] = std::nan("");
  EXPECT_THROW(adam_step<double>(refs, st, 0.1), NumericsError);
  for (double v : p.data()) EXPECT_EQ(v, 2.0);
  EXPECT_EQ(q.data()[0], -1.0);
  EXPECT_EQ(st.step, 0u);
  EXPECT_EQ(st.m[0].vec(), std::vector<double>(3, 0.0));
}

TEST(Adam, DecoupledWeightDecayShrinks) {
  Tensor<double> p(Shape{1, 1, 1, 1}, 2.0), g(Shape{1, 1, 1, 1});
  std::vector<ParamRef<double>> refs{{"p", &p, &g}};
  auto st = AdamState<double>::for_params(refs);
  adam_step<double>(refs, st, 0.1, 0.5);
  EXPECT_DOUBLE_EQ(p.data()[0], 2.0 * (1 - 0.05));
}

TEST(Schedule, ExactPerEpochDecay) {
  TrainConfig cfg;
  cfg.lr = 1e-3;
  cfg.decay = 0.95;
  for (std::uint64_t step = 0; step < 40; ++step) {
    EXPECT_EQ(scheduled_lr(cfg, step, 4), 1e-3 * std::pow(0.95, static_cast<double>(step / 4)));
  }
  cfg.decay_mode = DecayMode::Weight;
  EXPECT_EQ(scheduled_lr(cfg, 39, 4), 1e-3);
}

TEST(Schedule, ConfigValidation) {
  TrainConfig cfg;
  cfg.decay = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.decay = 1.0;
  EXPECT_NO_THROW(cfg.validate());
  cfg.batch = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.batch = 1;
  cfg.lr = -1e-3;
  EXPECT_THROW(cfg.validate(), ConfigError);
  EXPECT_THROW(parse_decay_mode("both"), ConfigError);
  EXPECT_EQ(parse_decay_mode(to_string(DecayMode::Weight)), DecayMode::Weight);
}

TEST(Split, PartitionIsDisjointAndDeterministic) {
  const auto s = split_indices(20, 0.2, 7);
  EXPECT_EQ(s.val.size(), 4u);
  EXPECT_EQ(s.train.size(), 16u);
  std::set<std::size_t> all(s.train.begin(), s.train.end());
  all.insert(s.val.begin(), s.val.end());
  EXPECT_EQ(all.size(), 20u);
  EXPECT_TRUE(std::is_sorted(s.val.begin(), s.val.end()));
  EXPECT_EQ(split_indices(20, 0.2, 7).val, s.val);
  EXPECT_NE(split_indices(20, 0.2, 8).val, s.val);
  EXPECT_TRUE(split_indices(5, 0.0, 1).val.empty());
  EXPECT_EQ(split_indices(3, 0.1, 1).val.size(), 1u);
}

TEST(Split, EpochBatchesCoverTrainingSetOnce) {
  std::vector<std::size_t> train{0, 2, 3, 5, 7, 8, 9, 11, 12, 14};
  const auto e0 = epoch_batches(train, 4, 3, 0);
  const auto e1 = epoch_batches(train, 4, 3, 1);
  ASSERT_EQ(e0.size(), 3u);
  EXPECT_EQ(e0.back().size(), 2u);
  std::vector<std::size_t> seen;
  for (const auto& b : e0) {
    EXPECT_TRUE(std::is_sorted(b.begin(), b.end()));
    seen.insert(seen.end(), b.begin(), b.end());
  }
  std::sort(seen.begin(), seen.end());
  EXPECT_EQ(seen, train);
  EXPECT_NE(e0, e1);
  EXPECT_EQ(epoch_batches(train, 4, 3, 1), e1);
}

TEST(Log, RowFormat) {
  EXPECT_EQ(log_header(), "iter,epoch,lr,train_l1,val_psnr,val_ssim");
  EXPECT_EQ(format_log_row({3, 0, 0.001, 0.25, std::nullopt, std::nullopt}), "3,0,0.001,0.25,,");
  EXPECT_EQ(format_log_row({4, 1, 0.00095, 0.125, 21.5, 0.75}), "4,1,0.00095,0.125,21.5,0.75");
}

// Undersampled data and non-silent random weights: the untrained network
// corrupts the zero-filled input, so the initial loss is far above what the
// data-fidelity units alone leave behind.
TEST(Fit, SmokeTrainingHalvesLoss) {
  const auto data = toy_data(5);
  DONet<float> model(toy_model(8));
  randomize_parameters(model, 2);
  TrainConfig cfg;
  cfg.lr = 1e-2;
  cfg.decay = 1.0;
  cfg.batch = 5;
  cfg.iters = 200;
  cfg.val_fraction = 0.0;
  const auto r = fit(model, data, cfg);
  ASSERT_EQ(r.log.size(), 200u);
  EXPECT_LT(r.log.back().train_l1, 0.5 * r.log.front().train_l1);
}

TEST(Fit, ZeroLearningRateKeepsEverythingConstant) {
  const auto data = toy_data(6);
  DONet<float> model(toy_model(4));
  randomize_parameters(model, 3);
  std::vector<float> before;
  for (const auto& p : model.params())
    if (p.trainable()) before.insert(before.end(), p.value->data().begin(), p.value->data().end());
  TrainConfig cfg;
  cfg.lr = 0.0;
  cfg.batch = 5;  // the whole training split every step
  cfg.iters = 6;
  const auto r = fit(model, data, cfg);
  std::vector<float> after;
  for (const auto& p : model.params())
    if (p.trainable()) after.insert(after.end(), p.value->data().begin(), p.value->data().end());
  EXPECT_EQ(before, after);
  for (const auto& row : r.log) EXPECT_EQ(row.train_l1, r.log.front().train_l1);
}

TEST(Fit, ResumeReproducesLogBitExactly) {
  const auto data = toy_data(8);
  TrainConfig cfg;
  cfg.lr = 3e-3;
  cfg.batch = 2;
  cfg.iters = 11;
  cfg.seed = 4;

  const fs::path a = scratch("full");
  cfg.out_dir = a;
  DONet<float> ma(toy_model(4));
  initialize(ma, 6);
  fit(ma, data, cfg);

  const fs::path b = scratch("resumed");
  cfg.out_dir = b;
  cfg.stop_after = 4;  // mid-epoch
  DONet<float> mb(toy_model(4));
  initialize(mb, 6);
  EXPECT_EQ(fit(mb, data, cfg).steps, 4u);

  DONet<float> mc(toy_model(4));
  initialize(mc, 99);  // overwritten by the checkpoint
  cfg.stop_after = 0;
  cfg.resume = true;
  const auto r = fit(mc, data, cfg);
  EXPECT_EQ(r.steps, 11u);
  EXPECT_EQ(r.log.front().iter, 5u);

  EXPECT_EQ(slurp(a / "train_log.csv"), slurp(b / "train_log.csv"));
  EXPECT_EQ(flat_params(ma), flat_params(mc));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Fit, DivergenceAbortsAndKeepsLastGoodCheckpoint) {
  const auto data = toy_data(6);
  DONet<float> model(toy_model(4));
  initialize(model, 1);
  TrainConfig cfg;
  cfg.lr = 1e30;
  cfg.batch = 2;
  cfg.iters = 50;
  cfg.checkpoint_every = 1;
  cfg.out_dir = scratch("diverge");
  EXPECT_THROW(fit(model, data, cfg), NumericsError);
  const auto meta = read_checkpoint_meta(cfg.out_dir / "checkpoints" / "last");
  const auto good = meta.at("step").get<std::uint64_t>();
  EXPECT_GE(good, 1u);

  // The retained state is finite and loads into a fresh model.
  DONet<float> fresh(toy_model(4));
  load_model(cfg.out_dir / "checkpoints" / "last", fresh);
  for (float v : flat_params(fresh)) EXPECT_TRUE(std::isfinite(v));
  fs::remove_all(cfg.out_dir);
}

TEST(Fit, CoilMismatchIsConfigError) {
  const auto data = toy_data(4);
  auto c = toy_model(4);
  c.coils = 3;
  DONet<float> model(c);
  initialize(model, 0);
  TrainConfig cfg;
  cfg.iters = 1;
  EXPECT_THROW(fit(model, data, cfg), ConfigError);
}
