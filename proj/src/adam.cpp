#include "donet/adam.hpp"

#include <cmath>

namespace donet {

template <typename T>
AdamState<T> AdamState<T>::for_params(std::span<const ParamRef<T>> params) {
  AdamState s;
  for (const auto& p : params) {
    if (!p.trainable()) continue;
    s.m.emplace_back(p.value->shape());
    s.v.emplace_back(p.value->shape());
  }
  return s;
}

template <typename T>
void adam_step(std::span<const ParamRef<T>> params, AdamState<T>& state, double lr_t, double weight_decay) {
  if (!(lr_t >= 0.0) || !std::isfinite(lr_t)) throw ConfigError("learning rate must be finite and non-negative");
  std::size_t count = 0;
  for (const auto& p : params) {
    if (!p.trainable()) continue;
    if (count >= state.m.size() || state.m[count].shape() != p.value->shape() ||
        p.grad->shape() != p.value->shape()) {
      throw ShapeError("optimizer state does not match parameter " + p.name);
    }
    if (!p.grad->all_finite()) throw NumericsError("non-finite gradient in " + p.name);
    ++count;
  }
  if (count != state.m.size()) throw ShapeError("optimizer state has extra entries");

  const std::uint64_t t = ++state.step;
  const double b1 = AdamState<T>::kBeta1;
  const double b2 = AdamState<T>::kBeta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
  const double shrink = 1.0 - lr_t * weight_decay;
  std::size_t k = 0;
  for (const auto& p : params) {
    if (!p.trainable()) continue;
    auto x = p.value->data();
    auto g = p.grad->data();
    auto m = state.m[k].data();
    auto v = state.v[k].data();
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double gi = g[i];
      const double mi = b1 * m[i] + (1.0 - b1) * gi;
      const double vi = b2 * v[i] + (1.0 - b2) * gi * gi;
      m[i] = static_cast<T>(mi);
      v[i] = static_cast<T>(vi);
      double xi = x[i];
      if (weight_decay != 0.0) xi *= shrink;
      xi -= lr_t * (mi / c1) / (std::sqrt(vi / c2) + AdamState<T>::kEps);
      x[i] = static_cast<T>(xi);
    }
    ++k;
  }
}

template struct AdamState<float>;
template struct AdamState<double>;
template void adam_step(std::span<const ParamRef<float>>, AdamState<float>&, double, double);
template void adam_step(std::span<const ParamRef<double>>, AdamState<double>&, double, double);

}  // namespace donet
