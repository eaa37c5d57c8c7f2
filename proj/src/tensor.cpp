#include "donet/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

namespace donet {

namespace {
std::atomic<bool> g_checked{true};
}

void set_checked_mode(bool on) { g_checked = on; }
bool checked_mode() { return g_checked; }

std::string to_string(const Shape& s) {
  return "(" + std::to_string(s.n) + "," + std::to_string(s.c) + "," + std::to_string(s.h) + "," +
         std::to_string(s.w) + ")";
}

template <typename T>
Tensor<T>::Tensor(Shape shape, T fill) : shape_(shape), data_(shape.numel(), fill) {}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> data) : shape_(shape), data_(std::move(data)) {
  if (data_.size() != shape_.numel()) {
    throw ShapeError("tensor data length " + std::to_string(data_.size()) + " does not match shape " +
                     to_string(shape_));
  }
  if (checked_mode()) require_finite("tensor construction");
}

template <typename T>
void Tensor<T>::fill(T v) {
  std::fill(data_.begin(), data_.end(), v);
}

template <typename T>
Tensor<T>& Tensor<T>::operator+=(const Tensor& o) {
  if (!(shape_ == o.shape_)) throw ShapeError("add: " + to_string(shape_) + " vs " + to_string(o.shape_));
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

template <typename T>
Tensor<T>& Tensor<T>::operator-=(const Tensor& o) {
  if (!(shape_ == o.shape_)) throw ShapeError("sub: " + to_string(shape_) + " vs " + to_string(o.shape_));
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

template <typename T>
Tensor<T>& Tensor<T>::operator*=(T s) {
  for (auto& v : data_) v *= s;
  return *this;
}

template <typename T>
bool Tensor<T>::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](T v) { return std::isfinite(v); });
}

template <typename T>
void Tensor<T>::require_finite(std::string_view what) const {
  if (!all_finite()) throw NumericsError("non-finite value in " + std::string(what));
}

template <typename T>
T max_abs_diff(const Tensor<T>& a, const Tensor<T>& b) {
  if (!(a.shape() == b.shape())) throw ShapeError("max_abs_diff: shape mismatch");
  T m = 0;
  auto da = a.data();
  auto db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) m = std::max(m, std::abs(da[i] - db[i]));
  return m;
}

template <typename T>
T l2_norm(const Tensor<T>& a) {
  long double acc = 0;
  for (T v : a.data()) acc += static_cast<long double>(v) * v;
  return static_cast<T>(std::sqrt(acc));
}

template <typename T>
ComplexTensor<T>::ComplexTensor(Tensor<T> real, Tensor<T> imag) : re(std::move(real)), im(std::move(imag)) {
  if (!(re.shape() == im.shape())) {
    throw ShapeError("complex tensor parts differ: " + to_string(re.shape()) + " vs " + to_string(im.shape()));
  }
}

template <typename T>
ComplexTensor<T>& ComplexTensor<T>::operator+=(const ComplexTensor& o) {
  re += o.re;
  im += o.im;
  return *this;
}

template <typename T>
ComplexTensor<T>& ComplexTensor<T>::operator-=(const ComplexTensor& o) {
  re -= o.re;
  im -= o.im;
  return *this;
}

template <typename T>
ComplexTensor<T>& ComplexTensor<T>::operator*=(T s) {
  re *= s;
  im *= s;
  return *this;
}

template <typename T>
T max_abs_diff(const ComplexTensor<T>& a, const ComplexTensor<T>& b) {
  return std::max(max_abs_diff(a.re, b.re), max_abs_diff(a.im, b.im));
}

template <typename T>
T l2_norm(const ComplexTensor<T>& a) {
  T r = l2_norm(a.re);
  T i = l2_norm(a.im);
  return std::sqrt(r * r + i * i);
}

#define DONET_INSTANTIATE(T)                                              \
  template class Tensor<T>;                                               \
  template struct ComplexTensor<T>;                                       \
  template T max_abs_diff(const Tensor<T>&, const Tensor<T>&);            \
  template T l2_norm(const Tensor<T>&);                                   \
  template T max_abs_diff(const ComplexTensor<T>&, const ComplexTensor<T>&); \
  template T l2_norm(const ComplexTensor<T>&);

DONET_INSTANTIATE(float)
DONET_INSTANTIATE(double)

}  // namespace donet
