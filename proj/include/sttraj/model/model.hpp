#pragma once

#include "sttraj/autodiff/tensor.hpp"
#include "sttraj/data/samples.hpp"
#include "sttraj/decoder/tcnn.hpp"
#include "sttraj/graph/gcn.hpp"
#include "sttraj/loss/losses.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace sttraj::model {

struct ModelConfig {
  int d_model = 16;
  int heads = 4;
  int tcnn_refine_layers = 1;
  int kernel_width = 3;
  graph::Variant variant = graph::Variant::ST;
  CoordMode coord_mode = CoordMode::Relative;
  loss::LossConfig loss;

  void validate() const;

  std::map<std::string, std::string> to_key_values() const;
  static ModelConfig from_key_values(const std::map<std::string, std::string>& kv);
};

struct NamedTensor {
  std::string name;
  ad::Tensor tensor;
};

/// Feature lift -> spatial/temporal attention graph block -> feature
/// reduction -> time-extrapolator decoder -> Gaussian field.
///
/// Tensors are handles, so a Model is move-only to keep parameter ownership
/// unambiguous.
class Model {
 public:
  static constexpr int kInputFeatures = 2;
  static constexpr int kGaussianParams = 5;

  explicit Model(ModelConfig config, std::uint64_t seed = 0);
  Model(Model&&) noexcept = default;
  Model& operator=(Model&&) noexcept = default;
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  /// obs: [2 x 8 x N] -> 12-step field over N pedestrians.
  decoder::GaussianField forward(const data::GraphTensor& obs) const;

  const ModelConfig& config() const { return config_; }

  /// Tensors updated by the optimizer, in a fixed order.
  const std::vector<NamedTensor>& parameters() const { return trainable_; }
  std::vector<ad::Tensor> trainable() const;
  /// Every persisted tensor: parameters() followed by the attention value and
  /// output projections, which are not on the prediction path.
  const std::vector<NamedTensor>& tensors() const { return all_; }

  // Components, exposed for inspection and hand-built test configurations.
  ad::Tensor lift_weight;  // 2 x 5
  ad::Tensor lift_bias;    // 5
  graph::StBlockParams block;
  ad::Tensor reduce_weight;  // d_model x 5
  ad::Tensor reduce_bias;    // 5
  decoder::TcnnParams tcnn;

 private:
  void index_tensors();

  ModelConfig config_;
  std::vector<NamedTensor> trainable_;
  std::vector<NamedTensor> all_;
};

}  // namespace sttraj::model
