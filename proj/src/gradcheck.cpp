#include "donet/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "donet/errors.hpp"

namespace donet {

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

template <typename T>
std::vector<T> numeric_gradient(const std::function<T()>& fn, std::span<T> param, T eps) {
  if (!(eps > T(0))) throw NumericsError("numeric_gradient: eps must be positive");
  std::vector<T> grad(param.size());
  for (std::size_t i = 0; i < param.size(); ++i) {
    const T orig = param[i];
    param[i] = orig + eps;
    const T plus = fn();
    param[i] = orig - eps;
    const T minus = fn();
    param[i] = orig;
    if (!std::isfinite(plus) || !std::isfinite(minus)) {
      throw NumericsError("numeric_gradient: objective returned a non-finite value");
    }
    grad[i] = (plus - minus) / (T(2) * eps);
  }
  return grad;
}

template <typename T>
GradCheckReport finite_diff_grad(const std::function<T()>& fn, std::span<GradCheckParam<T>> params, T eps) {
  GradCheckReport report;
  for (auto& p : params) {
    if (p.value.size() != p.analytic.size()) {
      throw NumericsError("finite_diff_grad: analytic gradient length differs for " + p.name);
    }
    const std::vector<T> numeric = numeric_gradient(fn, p.value, eps);
    double worst = 0.0;
    for (std::size_t i = 0; i < numeric.size(); ++i) {
      worst = std::max(worst, relative_error(p.analytic[i], numeric[i]));
    }
    report.per_parameter_errors.emplace_back(p.name, worst);
    report.max_rel_error = std::max(report.max_rel_error, worst);
  }
  return report;
}

template std::vector<float> numeric_gradient(const std::function<float()>&, std::span<float>, float);
template std::vector<double> numeric_gradient(const std::function<double()>&, std::span<double>, double);
template GradCheckReport finite_diff_grad(const std::function<float()>&, std::span<GradCheckParam<float>>, float);
template GradCheckReport finite_diff_grad(const std::function<double()>&, std::span<GradCheckParam<double>>,
                                          double);

}  // namespace donet
