#pragma once

#include "sttraj/autodiff/tensor.hpp"
#include "sttraj/data/scene.hpp"
#include "sttraj/trajectory.hpp"

#include <utility>
#include <vector>

namespace sttraj::data {

inline constexpr int kObservedSteps = 8;
inline constexpr int kPredictedSteps = 12;

/// One window of observed and future positions for the pedestrians present in
/// every frame of the window.
struct SequenceSample {
  Positions obs;  // 8 x N
  Positions fut;  // 12 x N
  std::vector<std::int64_t> ped_ids;
  std::size_t first_frame_index = 0;  // index into the scene's unique frames

  Eigen::Index agents() const { return obs.agents(); }
};

/// Dense node features laid out as D x T x N.
struct GraphTensor {
  ad::Tensor values;
  CoordMode mode = CoordMode::Relative;

  Eigen::Index features() const { return values.dim(0); }
  Eigen::Index steps() const { return values.dim(1); }
  Eigen::Index agents() const { return values.dim(2); }
};

/// Slides a window of t_obs + t_pred consecutive unique frames over the scene,
/// advancing `stride` frames at a time. Windows without any fully present
/// pedestrian are dropped.
std::vector<SequenceSample> window_sequences(const TrajectoryScene& scene,
                                             int t_obs = kObservedSteps,
                                             int t_pred = kPredictedSteps, int stride = 1);

/// Observed and future graph tensors. Relative mode stores per-frame
/// displacements; the first observed displacement is zero and the first future
/// displacement is taken from the last observed position.
std::pair<GraphTensor, GraphTensor> to_graph_tensor(const SequenceSample& sample, CoordMode mode);

/// Converts a [2 x T x N] tensor to positions.
Positions to_positions(const ad::Tensor& values);

/// Cumulative sum of displacements starting from `origin` (N x 2).
Positions integrate_displacements(const Positions& displacements, const Anchor& origin);

struct SceneSplit {
  std::vector<TrajectoryScene> train;  // ordered by name
  TrajectoryScene test;
};

/// Holds out the scene called `test_name`; throws LookupError if absent.
SceneSplit leave_one_out_split(std::vector<TrajectoryScene> scenes, const std::string& test_name);

}  // namespace sttraj::data
