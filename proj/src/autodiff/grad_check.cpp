#include "sttraj/autodiff/grad_check.hpp"

#include "sttraj/autodiff/tape.hpp"
#include "sttraj/errors.hpp"

#include <algorithm>
#include <cmath>

namespace sttraj::ad {

GradCheckResult grad_check(const std::function<Tensor()>& f, const std::vector<Tensor>& inputs,
                           double eps) {
  if (!(eps >= 1e-7 && eps <= 1e-4)) throw ContractError("grad_check: eps outside [1e-7, 1e-4]");
  for (const auto& t : inputs) {
    if (!t.requires_grad() || !t.is_leaf()) {
      throw ContractError("grad_check: inputs must be differentiable leaves");
    }
  }
  zero_grads(inputs);
  std::vector<Vector> analytic;
  {
    Tape tape;
    Tape::Scope scope(tape);
    const Tensor y = f();
    tape.backward(y);
  }
  analytic.reserve(inputs.size());
  for (const auto& t : inputs) analytic.push_back(t.grad());

  GradCheckResult result;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    Tensor x = inputs[k];
    Vector& v = x.mutable_value();
    for (Index i = 0; i < v.size(); ++i) {
      const double saved = v[i];
      v[i] = saved + eps;
      const double up = f().item();
      v[i] = saved - eps;
      const double down = f().item();
      v[i] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double a = analytic[k][i];
      const double abs_err = std::abs(a - numeric);
      const double rel_err = abs_err / std::max({1.0, std::abs(a), std::abs(numeric)});
      result.max_absolute_error = std::max(result.max_absolute_error, abs_err);
      if (rel_err > result.max_relative_error || result.worst_tensor < 0) {
        result.max_relative_error = std::max(result.max_relative_error, rel_err);
        result.worst_tensor = static_cast<Index>(k);
        result.worst_coordinate = i;
      }
    }
  }
  return result;
}

double grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x, double eps) {
  return grad_check([&] { return f(x); }, std::vector<Tensor>{x}, eps).max_relative_error;
}

}  // namespace sttraj::ad
