#pragma once

#include "sttraj/autodiff/tensor.hpp"
#include "sttraj/rng.hpp"

namespace sttraj::graph {

enum class Axis { Spatial, Temporal };

/// Multi-head self-attention parameters for one graph axis.
///
/// `query` and `key` hold the per-head projections side by side: columns
/// [i*d_k, (i+1)*d_k) belong to head i. `value` and `output` complete the
/// full multi-head block but take no part in adjacency construction.
struct AttentionParams {
  int heads = 4;
  int d_model = 16;
  ad::Tensor lift;    // d_in x d_model, applied before attention
  ad::Tensor query;   // d_model x d_model
  ad::Tensor key;     // d_model x d_model
  ad::Tensor value;   // d_model x d_model
  ad::Tensor output;  // d_model x d_model

  int d_k() const { return d_model / heads; }

  /// Throws ConfigError unless heads * d_k == d_model.
  static AttentionParams init(int d_in, int d_model, int heads, CounterRng& rng);
};

/// Per-head softmax(Q K^T / sqrt(d_k)).
/// H is [n x d_model] -> [h x n x n], or batched [B x n x d_model] -> [B x h x n x n].
ad::Tensor attention_weights(const ad::Tensor& h, const AttentionParams& params);

/// Concat(head_1..head_h) W_O with head_i = weights_i (H W_V)_i.
/// Same batching rules as attention_weights; output matches H's shape.
ad::Tensor multi_head_attention(const ad::Tensor& h, const AttentionParams& params);

/// Symmetric, head-averaged attention adjacency for a batch of graphs.
struct AdjacencyStack {
  Axis axis = Axis::Spatial;
  ad::Tensor mats;            // [B x n x n], (M + M^T) / 2
  ad::Tensor mean_attention;  // [B x n x n], M before symmetrisation

  ad::Index count() const { return mats.dim(0); }
  ad::Index nodes() const { return mats.dim(1); }
};

/// Lifts node features [B x n x d_in] and builds one adjacency per batch entry.
AdjacencyStack build_adjacency(const ad::Tensor& features, const AttentionParams& params, Axis axis);

/// features: [T x N x d_in] -> T matrices of N x N.
inline AdjacencyStack build_spatial_adjacency(const ad::Tensor& features,
                                              const AttentionParams& params) {
  return build_adjacency(features, params, Axis::Spatial);
}

/// features: [N x T x d_in] -> N matrices of T x T.
inline AdjacencyStack build_temporal_adjacency(const ad::Tensor& features,
                                               const AttentionParams& params) {
  return build_adjacency(features, params, Axis::Temporal);
}

}  // namespace sttraj::graph
