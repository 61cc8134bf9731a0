#include "sttraj/graph/gcn.hpp"

#include "sttraj/autodiff/ops.hpp"
#include "sttraj/errors.hpp"
#include "sttraj/init.hpp"

namespace sttraj::graph {

using ad::Index;
using ad::Tensor;

Variant parse_variant(const std::string& name) {
  if (name == "S") return Variant::S;
  if (name == "T") return Variant::T;
  if (name == "ST") return Variant::ST;
  throw ConfigError("unknown variant '" + name + "' (expected S|T|ST)");
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::S: return "S";
    case Variant::T: return "T";
    case Variant::ST: return "ST";
  }
  return "?";
}

Tensor normalize_adjacency(const Tensor& a) {
  if (a.rank() < 2 || a.dim(-1) != a.dim(-2)) {
    throw DimensionError("normalize_adjacency: expected square matrices, got " +
                         ad::to_string(a.shape()));
  }
  const Tensor a_hat = ad::add_diagonal(a, 1.0);
  const Tensor degree = ad::sum_axis(a_hat, -1);
  return a_hat / ad::sqrt(ad::outer_lastdim(degree));
}

Tensor graph_conv(const Tensor& x, const Tensor& a, const Tensor& weight, const Tensor& slope) {
  if (x.rank() != 3 || a.rank() != 3 || a.dim(0) != x.dim(0) || a.dim(1) != x.dim(1)) {
    throw DimensionError("graph_conv: features " + ad::to_string(x.shape()) +
                         " do not match adjacency " + ad::to_string(a.shape()));
  }
  if (weight.rank() != 2 || weight.dim(0) != x.dim(2)) {
    throw DimensionError("graph_conv: weight " + ad::to_string(weight.shape()) +
                         " does not match feature width " + std::to_string(x.dim(2)));
  }
  return ad::prelu(ad::linear(ad::bmm(normalize_adjacency(a), x), weight), slope);
}

GcnLayerParams GcnLayerParams::init(int spatial_width, int temporal_width, CounterRng& rng) {
  return {uniform_parameter({spatial_width, spatial_width}, spatial_width, rng),
          uniform_parameter({temporal_width, temporal_width}, temporal_width, rng),
          constant_parameter({}, 0.25), constant_parameter({}, 0.25)};
}

Tensor spatial_graph_conv(const Tensor& x, const AdjacencyStack& adjacency,
                          const GcnLayerParams& params) {
  return graph_conv(x, adjacency.mats, params.spatial_weight, params.spatial_slope);
}

Tensor temporal_graph_conv(const Tensor& x, const AdjacencyStack& adjacency,
                           const GcnLayerParams& params) {
  return graph_conv(x, adjacency.mats, params.temporal_weight, params.temporal_slope);
}

Tensor pointwise_conv(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  if (x.rank() != 3) throw DimensionError("pointwise_conv: expected [C x T x N]");
  return ad::permute(ad::linear(ad::permute(x, {1, 2, 0}), weight, bias), {2, 0, 1});
}

StBlockParams StBlockParams::init(int in_features, int d_model, int heads, CounterRng& rng) {
  StBlockParams p;
  p.spatial_attention = AttentionParams::init(in_features, d_model, heads, rng);
  p.temporal_attention = AttentionParams::init(d_model, d_model, heads, rng);
  p.gcn = GcnLayerParams::init(in_features, d_model, rng);
  p.mid_weight = uniform_parameter({in_features, d_model}, in_features, rng);
  p.mid_bias = constant_parameter({d_model}, 0.0);
  return p;
}

Tensor st_block_forward(const Tensor& x, const StBlockParams& params, Variant variant) {
  if (x.rank() != 3 || x.dim(0) != params.mid_weight.dim(0)) {
    throw DimensionError("st_block_forward: expected [" + std::to_string(params.mid_weight.dim(0)) +
                         " x T x N] input, got " + ad::to_string(x.shape()));
  }
  Tensor nodes = ad::permute(x, {1, 2, 0});  // T x N x C
  if (uses_spatial(variant)) {
    const AdjacencyStack spatial = build_spatial_adjacency(nodes, params.spatial_attention);
    nodes = spatial_graph_conv(nodes, spatial, params.gcn);
  }
  nodes = ad::linear(nodes, params.mid_weight, params.mid_bias);  // T x N x d_model
  if (uses_temporal(variant)) {
    Tensor per_ped = ad::permute(nodes, {1, 0, 2});  // N x T x d_model
    const AdjacencyStack temporal = build_temporal_adjacency(per_ped, params.temporal_attention);
    per_ped = temporal_graph_conv(per_ped, temporal, params.gcn);
    nodes = ad::permute(per_ped, {1, 0, 2});
  }
  return ad::permute(nodes, {2, 0, 1});
}

}  // namespace sttraj::graph
