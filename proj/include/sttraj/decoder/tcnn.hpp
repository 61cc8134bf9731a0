#pragma once

#include "sttraj/autodiff/tensor.hpp"
#include "sttraj/rng.hpp"

#include <vector>

namespace sttraj::decoder {

/// Time-extrapolator: time steps act as convolution channels and the kernel
/// slides along the feature axis.
struct TcnnParams {
  struct Layer {
    ad::Tensor kernels;  // [out x in x k]
    ad::Tensor bias;     // [out]
    ad::Tensor slope;    // PReLU applied to the layer input
  };

  int kernel_width = 3;
  ad::Tensor kernels;  // [12 x 8 x k]
  ad::Tensor bias;     // [12]
  std::vector<Layer> refine;

  /// Throws ConfigError for an even kernel width.
  static TcnnParams init(int observed, int predicted, int kernel_width, int refine_layers,
                         CounterRng& rng);
};

/// x: [8 x 5 x N] (time x feature x pedestrian) -> [12 x 5 x N].
/// h = conv(x); then h = h + conv_r(PReLU_r(h)) for each refinement layer.
ad::Tensor tcnn_forward(const ad::Tensor& x, const TcnnParams& params);

/// Predicted bivariate-Gaussian parameters, each [12 x N].
struct GaussianField {
  ad::Tensor mu_x, mu_y;
  ad::Tensor sigma_x, sigma_y;  // > 0
  ad::Tensor rho;               // in (-1, 1)

  ad::Index steps() const { return mu_x.dim(0); }
  ad::Index agents() const { return mu_x.dim(1); }
};

inline constexpr double kRawSigmaBound = 30.0;
inline constexpr double kRawRhoBound = 8.0;

/// raw: [5 x 12 x N] with channels (mu_x, mu_y, s_x, s_y, r).
/// sigma = exp(s), rho = tanh(r), with s and r clamped to the bounds above.
GaussianField to_gaussian_field(const ad::Tensor& raw);

}  // namespace sttraj::decoder
