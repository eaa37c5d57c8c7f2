#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "donet/errors.hpp"

namespace donet {

// Dense 4-D layout (batch, channels, height, width), row-major.
struct Shape {
  std::size_t n = 0;
  std::size_t c = 0;
  std::size_t h = 0;
  std::size_t w = 0;

  std::size_t numel() const { return n * c * h * w; }
  std::size_t plane() const { return h * w; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(const Shape& s);

// Checked mode rejects non-finite values when tensors are built from raw data.
// Tests run checked; training switches it off.
void set_checked_mode(bool on);
bool checked_mode();

template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T(0));
  Tensor(Shape shape, std::vector<T> data);

  const Shape& shape() const { return shape_; }
  std::size_t n() const { return shape_.n; }
  std::size_t c() const { return shape_.c; }
  std::size_t h() const { return shape_.h; }
  std::size_t w() const { return shape_.w; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  const std::vector<T>& vec() const { return data_; }

  T* plane(std::size_t ni, std::size_t ci) { return data_.data() + (ni * shape_.c + ci) * shape_.plane(); }
  const T* plane(std::size_t ni, std::size_t ci) const {
    return data_.data() + (ni * shape_.c + ci) * shape_.plane();
  }

  T& operator()(std::size_t ni, std::size_t ci, std::size_t y, std::size_t x) {
    return data_[((ni * shape_.c + ci) * shape_.h + y) * shape_.w + x];
  }
  T operator()(std::size_t ni, std::size_t ci, std::size_t y, std::size_t x) const {
    return data_[((ni * shape_.c + ci) * shape_.h + y) * shape_.w + x];
  }

  void fill(T v);
  Tensor& operator+=(const Tensor& o);
  Tensor& operator-=(const Tensor& o);
  Tensor& operator*=(T s);

  // Throws NumericsError naming `what` if any entry is NaN/Inf.
  void require_finite(std::string_view what) const;
  bool all_finite() const;

 private:
  Shape shape_{};
  std::vector<T> data_;
};

template <typename T>
Tensor<T> operator+(Tensor<T> a, const Tensor<T>& b) {
  a += b;
  return a;
}
template <typename T>
Tensor<T> operator-(Tensor<T> a, const Tensor<T>& b) {
  a -= b;
  return a;
}
template <typename T>
Tensor<T> operator*(Tensor<T> a, T s) {
  a *= s;
  return a;
}

template <typename T>
T max_abs_diff(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
T l2_norm(const Tensor<T>& a);

template <typename To, typename From>
Tensor<To> cast(const Tensor<From>& x) {
  std::vector<To> out(x.size());
  auto src = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<To>(src[i]);
  return Tensor<To>(x.shape(), std::move(out));
}

// X = re + i*im; both parts always share one shape.
template <typename T>
struct ComplexTensor {
  Tensor<T> re;
  Tensor<T> im;

  ComplexTensor() = default;
  explicit ComplexTensor(Shape shape) : re(shape), im(shape) {}
  ComplexTensor(Tensor<T> real, Tensor<T> imag);

  const Shape& shape() const { return re.shape(); }
  ComplexTensor& operator+=(const ComplexTensor& o);
  ComplexTensor& operator-=(const ComplexTensor& o);
  ComplexTensor& operator*=(T s);
};

template <typename T>
T max_abs_diff(const ComplexTensor<T>& a, const ComplexTensor<T>& b);
template <typename T>
T l2_norm(const ComplexTensor<T>& a);

template <typename To, typename From>
ComplexTensor<To> cast(const ComplexTensor<From>& x) {
  return ComplexTensor<To>(cast<To>(x.re), cast<To>(x.im));
}

}  // namespace donet
