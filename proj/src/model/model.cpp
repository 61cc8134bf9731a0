#include "sttraj/model/model.hpp"

#include "sttraj/autodiff/ops.hpp"
#include "sttraj/data/scene.hpp"
#include "sttraj/errors.hpp"
#include "sttraj/init.hpp"

#include <charconv>
#include <sstream>

namespace sttraj::model {

using ad::Tensor;

void ModelConfig::validate() const {
  if (d_model < 1 || heads < 1 || d_model % heads != 0) {
    throw ConfigError("d_model (" + std::to_string(d_model) + ") must be divisible by heads (" +
                      std::to_string(heads) + ")");
  }
  if (kernel_width < 1 || kernel_width % 2 == 0) throw ConfigError("kernel_width must be odd");
  if (tcnn_refine_layers < 0) throw ConfigError("tcnn_refine_layers must be non-negative");
  loss.validate();
}

namespace {

std::string join(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ';';
    out += data::format_double(values[i]);
  }
  return out;
}

double to_double(const std::string& key, const std::string& s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("config key '" + key + "': bad number '" + s + "'");
  }
  return v;
}

int to_int(const std::string& key, const std::string& s) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("config key '" + key + "': bad integer '" + s + "'");
  }
  return v;
}

}  // namespace

std::map<std::string, std::string> ModelConfig::to_key_values() const {
  return {{"d_model", std::to_string(d_model)},
          {"heads", std::to_string(heads)},
          {"tcnn_refine_layers", std::to_string(tcnn_refine_layers)},
          {"kernel_width", std::to_string(kernel_width)},
          {"variant", graph::to_string(variant)},
          {"coord_mode", coord_mode == CoordMode::Relative ? "relative" : "absolute"},
          {"alpha", data::format_double(loss.alpha)},
          {"mmd_bandwidths", join(loss.mmd_bandwidths)},
          {"mmd_sample_count", std::to_string(loss.mmd_sample_count)}};
}

ModelConfig ModelConfig::from_key_values(const std::map<std::string, std::string>& kv) {
  ModelConfig c;
  for (const auto& [key, value] : kv) {
    if (key == "d_model") c.d_model = to_int(key, value);
    else if (key == "heads") c.heads = to_int(key, value);
    else if (key == "tcnn_refine_layers") c.tcnn_refine_layers = to_int(key, value);
    else if (key == "kernel_width") c.kernel_width = to_int(key, value);
    else if (key == "variant") c.variant = graph::parse_variant(value);
    else if (key == "coord_mode") {
      if (value == "relative") c.coord_mode = CoordMode::Relative;
      else if (value == "absolute") c.coord_mode = CoordMode::Absolute;
      else throw ConfigError("unknown coord_mode '" + value + "'");
    } else if (key == "alpha") c.loss.alpha = to_double(key, value);
    else if (key == "mmd_bandwidths") {
      c.loss.mmd_bandwidths.clear();
      std::stringstream ss(value);
      std::string item;
      while (std::getline(ss, item, ';')) c.loss.mmd_bandwidths.push_back(to_double(key, item));
    } else if (key == "mmd_sample_count") c.loss.mmd_sample_count = to_int(key, value);
    else throw ConfigError("unknown model config key '" + key + "'");
  }
  c.validate();
  return c;
}

Model::Model(ModelConfig config, std::uint64_t seed) : config_(std::move(config)) {
  config_.validate();
  CounterRng rng(seed);
  lift_weight = uniform_parameter({kInputFeatures, kGaussianParams}, kInputFeatures, rng);
  lift_bias = constant_parameter({kGaussianParams}, 0.0);
  block = graph::StBlockParams::init(kGaussianParams, config_.d_model, config_.heads, rng);
  reduce_weight = uniform_parameter({config_.d_model, kGaussianParams}, config_.d_model, rng);
  reduce_bias = constant_parameter({kGaussianParams}, 0.0);
  tcnn = decoder::TcnnParams::init(data::kObservedSteps, data::kPredictedSteps, config_.kernel_width,
                                   config_.tcnn_refine_layers, rng);
  index_tensors();
}

void Model::index_tensors() {
  trainable_ = {
      {"lift.weight", lift_weight},
      {"lift.bias", lift_bias},
      {"spatial_attention.lift", block.spatial_attention.lift},
      {"spatial_attention.query", block.spatial_attention.query},
      {"spatial_attention.key", block.spatial_attention.key},
      {"temporal_attention.lift", block.temporal_attention.lift},
      {"temporal_attention.query", block.temporal_attention.query},
      {"temporal_attention.key", block.temporal_attention.key},
      {"gcn.spatial_weight", block.gcn.spatial_weight},
      {"gcn.spatial_slope", block.gcn.spatial_slope},
      {"gcn.temporal_weight", block.gcn.temporal_weight},
      {"gcn.temporal_slope", block.gcn.temporal_slope},
      {"mid.weight", block.mid_weight},
      {"mid.bias", block.mid_bias},
      {"reduce.weight", reduce_weight},
      {"reduce.bias", reduce_bias},
      {"tcnn.kernels", tcnn.kernels},
      {"tcnn.bias", tcnn.bias},
  };
  for (std::size_t i = 0; i < tcnn.refine.size(); ++i) {
    const std::string prefix = "tcnn.refine" + std::to_string(i) + ".";
    trainable_.push_back({prefix + "kernels", tcnn.refine[i].kernels});
    trainable_.push_back({prefix + "bias", tcnn.refine[i].bias});
    trainable_.push_back({prefix + "slope", tcnn.refine[i].slope});
  }
  all_ = trainable_;
  all_.push_back({"spatial_attention.value", block.spatial_attention.value});
  all_.push_back({"spatial_attention.output", block.spatial_attention.output});
  all_.push_back({"temporal_attention.value", block.temporal_attention.value});
  all_.push_back({"temporal_attention.output", block.temporal_attention.output});
}

std::vector<Tensor> Model::trainable() const {
  std::vector<Tensor> out;
  out.reserve(trainable_.size());
  for (const auto& p : trainable_) out.push_back(p.tensor);
  return out;
}

decoder::GaussianField Model::forward(const data::GraphTensor& obs) const {
  const Tensor& x = obs.values;
  if (x.rank() != 3 || x.dim(0) != kInputFeatures || x.dim(1) != data::kObservedSteps ||
      x.dim(2) < 1) {
    throw DimensionError("model: expected observed features [2 x 8 x N], got " +
                         ad::to_string(x.shape()));
  }
  const Tensor features = graph::pointwise_conv(x, lift_weight, lift_bias);             // 5 x T x N
  const Tensor graph_features = graph::st_block_forward(features, block, config_.variant);  // d x T x N
  const Tensor reduced = graph::pointwise_conv(graph_features, reduce_weight, reduce_bias);  // 5 x T x N
  const Tensor decoded = decoder::tcnn_forward(ad::permute(reduced, {1, 0, 2}), tcnn);      // 12 x 5 x N
  return decoder::to_gaussian_field(ad::permute(decoded, {1, 0, 2}));
}

}  // namespace sttraj::model
