#pragma once

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace donet {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::vector<std::pair<std::string, double>> per_parameter_errors;
};

// A named parameter block checked against an analytic gradient of the same length.
template <typename T>
struct GradCheckParam {
  std::string name;
  std::span<T> value;
  std::span<const T> analytic;
};

// |a - n| / max(|a|, |n|, 1e-8)
double relative_error(double analytic, double numeric);

// Central differences (fn(p+eps) - fn(p-eps)) / (2 eps) for every entry of `param`.
// `param` is restored afterwards. Throws NumericsError if fn returns a non-finite value.
template <typename T>
std::vector<T> numeric_gradient(const std::function<T()>& fn, std::span<T> param, T eps);

// Compares every scalar of every parameter block; per-parameter error is the
// block maximum and max_rel_error the overall maximum.
template <typename T>
GradCheckReport finite_diff_grad(const std::function<T()>& fn, std::span<GradCheckParam<T>> params,
                                 T eps = T(1e-4));

}  // namespace donet
