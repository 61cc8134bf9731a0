#pragma once

#include "sttraj/autodiff/tensor.hpp"

#include <functional>
#include <vector>

namespace sttraj::ad {

struct GradCheckResult {
  double max_relative_error = 0.0;
  double max_absolute_error = 0.0;
  Index worst_tensor = -1;
  Index worst_coordinate = -1;
};

/// Compares reverse-mode gradients of scalar `f` with central differences
/// (f(x+eps) - f(x-eps)) / (2 eps) for every coordinate of every tensor in
/// `inputs`. The relative error of a coordinate is
/// |analytic - numeric| / max(1, |analytic|, |numeric|), so gradients near
/// zero are judged in absolute terms.
///
/// `inputs` must be differentiable leaves; their gradients are overwritten.
GradCheckResult grad_check(const std::function<Tensor()>& f, const std::vector<Tensor>& inputs,
                           double eps = 1e-6);

/// Single-input convenience form; returns the worst relative error.
double grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x,
                  double eps = 1e-6);

}  // namespace sttraj::ad
