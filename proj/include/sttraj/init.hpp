#pragma once

#include "sttraj/autodiff/tensor.hpp"
#include "sttraj/rng.hpp"

#include <cmath>

namespace sttraj {

/// Trainable tensor drawn uniformly from +-sqrt(1 / fan_in).
inline ad::Tensor uniform_parameter(ad::Shape shape, ad::Index fan_in, CounterRng& rng) {
  const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
  ad::Vector v(ad::element_count(shape));
  for (auto& x : v) x = bound * (2.0 * rng.uniform() - 1.0);
  return ad::Tensor::parameter(std::move(shape), std::move(v));
}

inline ad::Tensor constant_parameter(ad::Shape shape, double value) {
  const auto n = ad::element_count(shape);
  return ad::Tensor::parameter(std::move(shape), ad::Vector::Constant(n, value));
}

}  // namespace sttraj
