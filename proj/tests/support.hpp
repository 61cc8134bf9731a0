#pragma once

#include "sttraj/autodiff/tensor.hpp"
#include "sttraj/rng.hpp"

#include <cmath>

namespace sttraj::test {

inline ad::Vector random_vector(ad::Index n, CounterRng& rng, double lo = -1.0, double hi = 1.0) {
  ad::Vector v(n);
  for (auto& x : v) x = lo + (hi - lo) * rng.uniform();
  return v;
}

inline ad::Tensor random_parameter(ad::Shape shape, CounterRng& rng, double lo = -1.0, double hi = 1.0) {
  const auto n = ad::element_count(shape);
  return ad::Tensor::parameter(std::move(shape), random_vector(n, rng, lo, hi));
}

inline ad::Tensor random_constant(ad::Shape shape, CounterRng& rng, double lo = -1.0, double hi = 1.0) {
  const auto n = ad::element_count(shape);
  return ad::Tensor::constant(std::move(shape), random_vector(n, rng, lo, hi));
}

// Standard normal via Box-Muller; independent of the library's sampler.
inline double normal(CounterRng& rng) {
  const double u1 = 1.0 - rng.uniform();
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

}  // namespace sttraj::test
