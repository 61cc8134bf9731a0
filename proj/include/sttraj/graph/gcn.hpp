#pragma once

#include "sttraj/autodiff/tensor.hpp"
#include "sttraj/graph/attention.hpp"
#include "sttraj/rng.hpp"

#include <string>

namespace sttraj::graph {

enum class Variant { S, T, ST };

Variant parse_variant(const std::string& name);
std::string to_string(Variant v);
inline bool uses_spatial(Variant v) { return v != Variant::T; }
inline bool uses_temporal(Variant v) { return v != Variant::S; }

/// Lambda^{-1/2} (A + I) Lambda^{-1/2} for a square matrix or a batch of them,
/// where Lambda is the degree matrix of A + I. Entries are computed as
/// (A + I)_ij / sqrt(d_i d_j).
ad::Tensor normalize_adjacency(const ad::Tensor& a);

/// PReLU(normalize(A_b) X_b W) for every batch entry b.
/// x: [B x n x d_in], a: [B x n x n], weight: [d_in x d_out].
ad::Tensor graph_conv(const ad::Tensor& x, const ad::Tensor& a, const ad::Tensor& weight,
                      const ad::Tensor& slope);

struct GcnLayerParams {
  ad::Tensor spatial_weight;   // d_in x d_out
  ad::Tensor temporal_weight;  // d_in x d_out
  ad::Tensor spatial_slope;    // PReLU, scalar
  ad::Tensor temporal_slope;

  static GcnLayerParams init(int spatial_width, int temporal_width, CounterRng& rng);
};

/// x: [T x N x d] with one spatial adjacency per time step.
ad::Tensor spatial_graph_conv(const ad::Tensor& x, const AdjacencyStack& adjacency,
                              const GcnLayerParams& params);
/// x: [N x T x d] with one temporal adjacency per pedestrian.
ad::Tensor temporal_graph_conv(const ad::Tensor& x, const AdjacencyStack& adjacency,
                               const GcnLayerParams& params);

/// 1-wide convolution over the feature axis of a [C x T x N] block.
ad::Tensor pointwise_conv(const ad::Tensor& x, const ad::Tensor& weight, const ad::Tensor& bias);

/// Everything between the input feature lift and the decoder.
struct StBlockParams {
  AttentionParams spatial_attention;   // lift from the 5 input features
  AttentionParams temporal_attention;  // lift from d_model features
  GcnLayerParams gcn;                  // spatial 5 -> 5, temporal d_model -> d_model
  ad::Tensor mid_weight;               // 5 x d_model, produces the temporal-stage input
  ad::Tensor mid_bias;

  static StBlockParams init(int in_features, int d_model, int heads, CounterRng& rng);
};

/// x: [5 x T x N] lifted features -> [d_model x T x N].
///
/// ST: spatial graph conv, pointwise conv, temporal graph conv.
/// S skips the temporal graph conv and T skips the spatial one; the output
/// shape is the same for every variant.
ad::Tensor st_block_forward(const ad::Tensor& x, const StBlockParams& params, Variant variant);

}  // namespace sttraj::graph
