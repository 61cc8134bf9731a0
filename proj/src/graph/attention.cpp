#include "sttraj/graph/attention.hpp"

#include "sttraj/autodiff/ops.hpp"
#include "sttraj/errors.hpp"
#include "sttraj/init.hpp"

#include <cmath>

namespace sttraj::graph {

using ad::Index;
using ad::Tensor;

AttentionParams AttentionParams::init(int d_in, int d_model, int heads, CounterRng& rng) {
  if (heads < 1 || d_model < 1 || d_model % heads != 0) {
    throw ConfigError("attention: d_model " + std::to_string(d_model) +
                      " is not divisible by head count " + std::to_string(heads));
  }
  AttentionParams p;
  p.heads = heads;
  p.d_model = d_model;
  p.lift = uniform_parameter({d_in, d_model}, d_in, rng);
  p.query = uniform_parameter({d_model, d_model}, d_model, rng);
  p.key = uniform_parameter({d_model, d_model}, d_model, rng);
  p.value = uniform_parameter({d_model, d_model}, d_model, rng);
  p.output = uniform_parameter({d_model, d_model}, d_model, rng);
  return p;
}

namespace {

/// [B x n x d_model] -> [(B*h) x n x d_k]
Tensor split_heads(const Tensor& x, Index batch, Index n, int heads, int d_k) {
  return ad::reshape(ad::permute(ad::reshape(x, {batch, n, heads, d_k}), {0, 2, 1, 3}),
                     {batch * heads, n, d_k});
}

struct Batched {
  Tensor h;
  Index batch;
  Index n;
  bool unbatched;
};

Batched as_batched(const Tensor& h, const AttentionParams& params) {
  if (h.rank() != 2 && h.rank() != 3) {
    throw DimensionError("attention: expected [n x d] or [B x n x d], got " + ad::to_string(h.shape()));
  }
  if (h.dim(-1) != params.d_model) {
    throw DimensionError("attention: feature width " + std::to_string(h.dim(-1)) +
                         " does not match d_model " + std::to_string(params.d_model));
  }
  if (h.rank() == 2) return {ad::reshape(h, {1, h.dim(0), h.dim(1)}), 1, h.dim(0), true};
  return {h, h.dim(0), h.dim(1), false};
}

/// [(B*h) x n x n] softmax weights.
Tensor head_weights(const Batched& in, const AttentionParams& params) {
  const int d_k = params.d_k();
  const Tensor q = split_heads(ad::linear(in.h, params.query), in.batch, in.n, params.heads, d_k);
  const Tensor k = split_heads(ad::linear(in.h, params.key), in.batch, in.n, params.heads, d_k);
  const Tensor scores = ad::bmm(q, ad::transpose(k)) * (1.0 / std::sqrt(static_cast<double>(d_k)));
  return ad::softmax_lastdim(scores);
}

}  // namespace

Tensor attention_weights(const Tensor& h, const AttentionParams& params) {
  const Batched in = as_batched(h, params);
  const Tensor w = head_weights(in, params);
  if (in.unbatched) return ad::reshape(w, {params.heads, in.n, in.n});
  return ad::reshape(w, {in.batch, params.heads, in.n, in.n});
}

Tensor multi_head_attention(const Tensor& h, const AttentionParams& params) {
  const Batched in = as_batched(h, params);
  const int d_k = params.d_k();
  const Tensor w = head_weights(in, params);
  const Tensor v = split_heads(ad::linear(in.h, params.value), in.batch, in.n, params.heads, d_k);
  // [(B*h) x n x d_k] -> [B x n x h*d_k]
  const Tensor heads = ad::reshape(
      ad::permute(ad::reshape(ad::bmm(w, v), {in.batch, params.heads, in.n, d_k}), {0, 2, 1, 3}),
      {in.batch, in.n, params.d_model});
  const Tensor out = ad::linear(heads, params.output);
  return in.unbatched ? ad::reshape(out, {in.n, params.d_model}) : out;
}

AdjacencyStack build_adjacency(const Tensor& features, const AttentionParams& params, Axis axis) {
  if (features.rank() != 3 || features.dim(-1) != params.lift.dim(0)) {
    throw DimensionError("build_adjacency: features " + ad::to_string(features.shape()) +
                         " do not match lift " + ad::to_string(params.lift.shape()));
  }
  const Index batch = features.dim(0), n = features.dim(1);
  const Tensor lifted = ad::linear(features, params.lift);
  const Tensor w = ad::reshape(head_weights({lifted, batch, n, false}, params),
                               {batch, params.heads, n, n});
  const Tensor m = ad::sum_axis(w, 1) * (1.0 / params.heads);
  const Tensor a = 0.5 * (m + ad::transpose(m));
  return {axis, a, m};
}

}  // namespace sttraj::graph
