#pragma once

#include <algorithm>
#include <cmath>

#include "donet/cascade.hpp"
#include "donet/gradcheck.hpp"
#include "donet/init.hpp"
#include "test_util.hpp"

namespace donet::testing {

// Random measurement (n, coils, h, w) restricted to a random column mask.
template <typename T>
KSpaceMeasurement<T> random_measurement(std::size_t n, std::size_t coils, std::size_t h, std::size_t w,
                                        std::uint64_t seed) {
  Rng rng(seed);
  SamplingMask m = SamplingMask::empty(h, w);
  for (std::size_t x = 0; x < w; ++x) {
    const bool on = x == w / 2 || rng.uniform() < 0.4;
    for (std::size_t y = 0; y < h; ++y) m.bits[y * w + x] = on;
  }
  ComplexTensor<T> y = random_complex<T>(Shape{n, coils, h, w}, seed + 1);
  const Tensor<T> mt = m.template as_tensor<T>();
  for (std::size_t i = 0; i < y.re.size(); ++i) {
    const T keep = mt.data()[i % (h * w)];
    y.re.data()[i] *= keep;
    y.im.data()[i] *= keep;
  }
  return {std::move(y), std::move(m)};
}

// Gives every trainable tensor a generic nonzero value (init leaves some at zero).
template <typename T>
void randomize_parameters(DONet<T>& model, std::uint64_t seed) {
  initialize(model, seed);
  Rng rng(seed + 99);
  for (auto& p : model.params()) {
    if (!p.trainable()) continue;
    const bool bn = p.name.find(".bn") != std::string::npos;
    for (auto& v : p.value->data()) {
      if (bn) {
        v = static_cast<T>(p.name.ends_with("gamma") ? rng.uniform(0.5, 1.5) : rng.uniform(-0.2, 0.2));
      } else if (v == T(0)) {
        v = static_cast<T>(rng.uniform(-0.3, 0.3));
      }
    }
  }
}

struct ModelGradCheck {
  GradCheckReport report;
  double min_abs_residual = 0.0;
  std::size_t parameters = 0;
};

// Finite differences of l1(DONet(y), target) against backprop for every trainable tensor.
inline ModelGradCheck model_gradcheck(const CascadeConfig& cfg, std::size_t n, std::size_t h, std::size_t w,
                                      std::uint64_t seed, double eps = 1e-6) {
  DONet<double> model(cfg);
  randomize_parameters(model, seed);
  const auto meas = random_measurement<double>(n, cfg.coils, h, w, seed + 10);

  model.zero_grad();
  const auto pred = model.forward(meas, BnMode::Train);
  // Residuals of magnitude 0.05..0.5 with random sign keep every entry off the l1 kink.
  ComplexTensor<double> target = pred;
  Rng rng(seed + 20);
  for (auto* t : {&target.re, &target.im}) {
    for (auto& v : t->data()) v += (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.05, 0.5);
  }
  model.backward(l1_loss_grad(pred, target));

  ModelGradCheck out;
  out.min_abs_residual = INFINITY;
  for (std::size_t i = 0; i < pred.re.size(); ++i) {
    out.min_abs_residual = std::min(out.min_abs_residual, std::abs(pred.re.data()[i] - target.re.data()[i]));
    out.min_abs_residual = std::min(out.min_abs_residual, std::abs(pred.im.data()[i] - target.im.data()[i]));
  }
  auto params = model.params();
  std::vector<std::vector<double>> analytic;
  std::vector<GradCheckParam<double>> checks;
  for (const auto& p : params) {
    if (p.trainable()) analytic.push_back(p.grad->vec());
  }
  std::size_t k = 0;
  for (const auto& p : params) {
    if (!p.trainable()) continue;
    checks.push_back({p.name, p.value->data(), analytic[k++]});
    out.parameters += p.value->size();
  }
  out.report = finite_diff_grad<double>([&] { return l1_loss(model.forward(meas, BnMode::Train), target); }, checks,
                                        eps);
  return out;
}

}  // namespace donet::testing
