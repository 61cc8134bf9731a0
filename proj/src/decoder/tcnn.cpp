#include "sttraj/decoder/tcnn.hpp"

#include "sttraj/autodiff/ops.hpp"
#include "sttraj/errors.hpp"
#include "sttraj/init.hpp"

namespace sttraj::decoder {

using ad::Tensor;

TcnnParams TcnnParams::init(int observed, int predicted, int kernel_width, int refine_layers,
                            CounterRng& rng) {
  if (kernel_width < 1 || kernel_width % 2 == 0) {
    throw ConfigError("tcnn: kernel width must be odd, got " + std::to_string(kernel_width));
  }
  if (refine_layers < 0) throw ConfigError("tcnn: negative refinement layer count");
  TcnnParams p;
  p.kernel_width = kernel_width;
  p.kernels = uniform_parameter({predicted, observed, kernel_width}, observed * kernel_width, rng);
  p.bias = constant_parameter({predicted}, 0.0);
  for (int i = 0; i < refine_layers; ++i) {
    p.refine.push_back({uniform_parameter({predicted, predicted, kernel_width},
                                          predicted * kernel_width, rng),
                        constant_parameter({predicted}, 0.0), constant_parameter({}, 0.25)});
  }
  return p;
}

Tensor tcnn_forward(const Tensor& x, const TcnnParams& params) {
  if (x.rank() != 3 || x.dim(0) != params.kernels.dim(1)) {
    throw DimensionError("tcnn_forward: expected " + std::to_string(params.kernels.dim(1)) +
                         " input time steps, got shape " + ad::to_string(x.shape()));
  }
  Tensor h = ad::conv_over_time(x, params.kernels, params.bias);
  for (const auto& layer : params.refine) {
    h = h + ad::conv_over_time(ad::prelu(h, layer.slope), layer.kernels, layer.bias);
  }
  return h;
}

GaussianField to_gaussian_field(const Tensor& raw) {
  if (raw.rank() != 3 || raw.dim(0) != 5) {
    throw DimensionError("to_gaussian_field: expected [5 x T x N], got " + ad::to_string(raw.shape()));
  }
  const ad::Index steps = raw.dim(1), agents = raw.dim(2);
  auto channel = [&](ad::Index c) { return ad::reshape(ad::slice(raw, 0, c, c + 1), {steps, agents}); };
  auto sigma = [&](ad::Index c) { return ad::exp(ad::clamp(channel(c), -kRawSigmaBound, kRawSigmaBound)); };
  return {channel(0), channel(1), sigma(2), sigma(3),
          ad::tanh(ad::clamp(channel(4), -kRawRhoBound, kRawRhoBound))};
}

}  // namespace sttraj::decoder
