#pragma once

#include "sttraj/data/scene.hpp"
#include "sttraj/model/model.hpp"

namespace sttraj::test {

// Variant-S model that predicts the last observed displacement with
// sigma = exp(-6): identity maps through the block, and the decoder copies the
// final observed step into every future step.
inline model::Model constant_velocity_oracle() {
  model::ModelConfig config;
  config.variant = graph::Variant::S;
  model::Model m(config, 0);
  m.lift_weight.mutable_value().setZero();
  m.lift_weight.mutable_matrix()(0, 0) = 1.0;
  m.lift_weight.mutable_matrix()(1, 1) = 1.0;
  m.lift_bias.mutable_value() << 0.0, 0.0, -6.0, -6.0, 0.0;

  auto& b = m.block;
  b.gcn.spatial_weight.mutable_matrix().setIdentity();
  b.gcn.spatial_slope.mutable_value().setOnes();
  b.mid_weight.mutable_value().setZero();
  b.mid_bias.mutable_value().setZero();
  for (int i = 0; i < 5; ++i) b.mid_weight.mutable_matrix()(i, i) = 1.0;

  m.reduce_weight.mutable_value().setZero();
  m.reduce_bias.mutable_value().setZero();
  for (int i = 0; i < 5; ++i) m.reduce_weight.mutable_matrix()(i, i) = 1.0;

  auto& t = m.tcnn;
  const int k = t.kernel_width;
  t.kernels.mutable_value().setZero();
  t.bias.mutable_value().setZero();
  for (int c = 0; c < 12; ++c) t.kernels.mutable_value()[(c * 8 + 7) * k + k / 2] = 1.0;
  for (auto& layer : t.refine) {
    layer.kernels.mutable_value().setZero();
    layer.bias.mutable_value().setZero();
  }
  return m;
}

// Pedestrians sharing one constant velocity, all present in every frame.
inline data::TrajectoryScene convoy_scene(const std::string& name, int frames, int peds,
                                          double vx = 0.35, double vy = -0.2) {
  data::TrajectoryScene s;
  s.name = name;
  for (int f = 0; f < frames; ++f) {
    for (int p = 0; p < peds; ++p) s.records.push_back({f * 10, p + 1, 1.5 * p + vx * f, -0.8 * p + vy * f});
  }
  data::canonicalize(s);
  return s;
}

}  // namespace sttraj::test
