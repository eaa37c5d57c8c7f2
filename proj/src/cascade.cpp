#include "donet/cascade.hpp"

#include <cmath>

#include "donet/fft.hpp"

namespace donet {

void CascadeConfig::validate() const {
  if (blocks < 1) throw ConfigError("cascade needs at least one block (T >= 1)");
  if (coils < 1) throw ConfigError("cascade needs at least one coil");
  block.validate();
}

namespace {

template <typename T>
void check_mask(const Shape& s, const Tensor<T>& mask) {
  if (mask.n() != 1 || mask.c() != 1 || mask.h() != s.h || mask.w() != s.w) {
    throw ShapeError("data_fidelity: mask " + to_string(mask.shape()) + " does not match " + to_string(s));
  }
}

}  // namespace

template <typename T>
ComplexTensor<T> data_fidelity(const ComplexTensor<T>& x_hat, const ComplexTensor<T>& y, const Tensor<T>& mask) {
  const Shape s = x_hat.shape();
  if (!(y.shape() == s)) {
    throw ShapeError("data_fidelity: prediction " + to_string(s) + " vs measurement " + to_string(y.shape()));
  }
  check_mask(s, mask);
  ComplexTensor<T> k = fft2c(x_hat);
  const T* m = mask.data().data();
  const std::size_t P = s.plane();
  for (std::size_t n = 0; n < s.n; ++n) {
    for (std::size_t c = 0; c < s.c; ++c) {
      T* kr = k.re.plane(n, c);
      T* ki = k.im.plane(n, c);
      const T* yr = y.re.plane(n, c);
      const T* yi = y.im.plane(n, c);
      for (std::size_t i = 0; i < P; ++i) {
        if (m[i] != T(0)) {
          kr[i] = yr[i];
          ki[i] = yi[i];
        }
      }
    }
  }
  return ifft2c(k);
}

template <typename T>
ComplexTensor<T> data_fidelity(const ComplexTensor<T>& x_hat, const KSpaceMeasurement<T>& y) {
  return data_fidelity(x_hat, y.y, y.mask.template as_tensor<T>());
}

template <typename T>
ComplexTensor<T> data_fidelity_backward(const ComplexTensor<T>& g, const Tensor<T>& mask) {
  const Shape s = g.shape();
  check_mask(s, mask);
  ComplexTensor<T> k = fft2c(g);
  const T* m = mask.data().data();
  const std::size_t P = s.plane();
  for (std::size_t n = 0; n < s.n; ++n) {
    for (std::size_t c = 0; c < s.c; ++c) {
      T* kr = k.re.plane(n, c);
      T* ki = k.im.plane(n, c);
      for (std::size_t i = 0; i < P; ++i) {
        if (m[i] != T(0)) {
          kr[i] = 0;
          ki[i] = 0;
        }
      }
    }
  }
  return ifft2c(k);
}

template <typename T>
T l1_loss(const ComplexTensor<T>& pred, const ComplexTensor<T>& target) {
  if (!(pred.shape() == target.shape())) throw ShapeError("l1_loss: shape mismatch");
  const std::size_t count = 2 * pred.shape().numel();
  if (count == 0) return T(0);
  double acc = 0;
  auto pr = pred.re.data();
  auto pi = pred.im.data();
  auto tr = target.re.data();
  auto ti = target.im.data();
  for (std::size_t i = 0; i < pr.size(); ++i) acc += std::abs(static_cast<double>(pr[i]) - tr[i]);
  for (std::size_t i = 0; i < pi.size(); ++i) acc += std::abs(static_cast<double>(pi[i]) - ti[i]);
  return static_cast<T>(acc / static_cast<double>(count));
}

template <typename T>
ComplexTensor<T> l1_loss_grad(const ComplexTensor<T>& pred, const ComplexTensor<T>& target) {
  if (!(pred.shape() == target.shape())) throw ShapeError("l1_loss_grad: shape mismatch");
  ComplexTensor<T> g(pred.shape());
  const T scale = T(1) / static_cast<T>(2 * pred.shape().numel());
  auto sign = [scale](T d) { return d > T(0) ? scale : (d < T(0) ? -scale : T(0)); };
  auto pr = pred.re.data();
  auto pi = pred.im.data();
  auto tr = target.re.data();
  auto ti = target.im.data();
  auto gr = g.re.data();
  auto gi = g.im.data();
  for (std::size_t i = 0; i < pr.size(); ++i) gr[i] = sign(pr[i] - tr[i]);
  for (std::size_t i = 0; i < pi.size(); ++i) gi[i] = sign(pi[i] - ti[i]);
  return g;
}

template <typename T>
DONet<T>::DONet(CascadeConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  blocks_.reserve(cfg_.blocks);
  for (std::size_t t = 0; t < cfg_.blocks; ++t) {
    blocks_.emplace_back("block" + std::to_string(t + 1), cfg_.block, cfg_.coils);
  }
}

template <typename T>
ComplexTensor<T> DONet<T>::forward(const KSpaceMeasurement<T>& y, BnMode mode) {
  if (y.y.shape().c != cfg_.coils) {
    throw ShapeError("DONet: measurement has " + std::to_string(y.y.shape().c) + " coils, model expects " +
                     std::to_string(cfg_.coils));
  }
  mask_ = y.mask.template as_tensor<T>();
  ComplexTensor<T> x = ifft2c(y.y);
  for (auto& b : blocks_) {
    x = data_fidelity(channels_to_complex(b.forward(x, mode)), y.y, mask_);
  }
  return x;
}

template <typename T>
void DONet<T>::backward(const ComplexTensor<T>& grad_out) {
  ComplexTensor<T> g = grad_out;
  for (std::size_t t = blocks_.size(); t-- > 0;) {
    ComplexTensor<T> g_hat = data_fidelity_backward(g, mask_);
    g = blocks_[t].backward(complex_to_channels(g_hat));
  }
}

template <typename T>
std::vector<ParamRef<T>> DONet<T>::params() {
  std::vector<ParamRef<T>> out;
  for (auto& b : blocks_) b.collect(out);
  return out;
}

template <typename T>
void DONet<T>::zero_grad() {
  auto p = params();
  zero_grads<T>(p);
}

template <typename T>
std::size_t DONet<T>::parameter_count() {
  std::size_t total = 0;
  for (const auto& p : params()) {
    if (p.trainable()) total += p.value->size();
  }
  return total;
}

#define DONET_INSTANTIATE(T)                                                                          \
  template ComplexTensor<T> data_fidelity(const ComplexTensor<T>&, const ComplexTensor<T>&, const Tensor<T>&); \
  template ComplexTensor<T> data_fidelity(const ComplexTensor<T>&, const KSpaceMeasurement<T>&);      \
  template ComplexTensor<T> data_fidelity_backward(const ComplexTensor<T>&, const Tensor<T>&);        \
  template T l1_loss(const ComplexTensor<T>&, const ComplexTensor<T>&);                               \
  template ComplexTensor<T> l1_loss_grad(const ComplexTensor<T>&, const ComplexTensor<T>&);           \
  template class DONet<T>;

DONET_INSTANTIATE(float)
DONET_INSTANTIATE(double)

}  // namespace donet
