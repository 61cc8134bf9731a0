#pragma once

#include "sttraj/autodiff/tensor.hpp"
#include "sttraj/data/samples.hpp"
#include "sttraj/decoder/tcnn.hpp"
#include "sttraj/rng.hpp"

#include <vector>

namespace sttraj::loss {

struct LossConfig {
  double alpha = 0.3;
  std::vector<double> mmd_bandwidths{0.25, 0.5, 1.0, 2.0, 4.0};
  int mmd_sample_count = 4;

  /// Throws ConfigError on negative alpha, non-positive bandwidths or an empty
  /// sample budget.
  void validate() const;
};

/// Negative log-likelihood of the future under the field: summed over time
/// and pedestrians, divided by the pedestrian count. `future` is [2 x 12 x N]
/// in the same coordinate mode as the field.
ad::Tensor nll_loss(const decoder::GaussianField& field, const ad::Tensor& future);

/// Biased squared MMD between row samples x [m x d] and y [l x d] with the
/// kernel sum_s exp(-|a - b|^2 / (2 s^2)) over `bandwidths`.
ad::Tensor mmd_loss(const ad::Tensor& x, const ad::Tensor& y, const std::vector<double>& bandwidths);

struct LossTerms {
  ad::Tensor nll;
  ad::Tensor mmd;
  ad::Tensor total;  // nll + alpha * mmd
};

/// NLL plus alpha times the MMD between ground-truth node-step vectors and
/// reparameterised draws from the field (`mmd_sample_count` per node-step).
/// The draws depend only on `rng`.
LossTerms total_loss(const decoder::GaussianField& field, const ad::Tensor& future,
                     const LossConfig& config, CounterRng rng);

}  // namespace sttraj::loss
