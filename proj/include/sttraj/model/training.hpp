#pragma once

#include "sttraj/data/samples.hpp"
#include "sttraj/data/scene.hpp"
#include "sttraj/loss/metrics.hpp"
#include "sttraj/loss/sampling.hpp"
#include "sttraj/model/checkpoint.hpp"
#include "sttraj/model/model.hpp"

#include <functional>
#include <string>
#include <vector>

namespace sttraj::model {

/// A window prepared for the model: graph tensors plus the absolute paths
/// needed for metrics.
struct TrainingSample {
  data::GraphTensor obs;  // [2 x 8 x N]
  data::GraphTensor fut;  // [2 x 12 x N]
  Positions obs_abs;
  Positions fut_abs;
  std::vector<std::int64_t> ped_ids;
  std::string scene;
  std::size_t window = 0;
};

std::vector<TrainingSample> prepare_samples(const data::TrajectoryScene& scene, CoordMode mode,
                                            int stride = 1);

struct Schedule {
  int epochs = 250;
  int batch_size = 128;
  double lr_initial = 0.01;
  double lr_after = 0.002;
  int lr_switch_epoch = 150;
  double momentum = 0.9;
  double clip_norm = 10.0;  // <= 0 disables clipping

  void validate() const;
};

/// Learning rate for a 1-based epoch: lr_initial up to and including
/// lr_switch_epoch, lr_after afterwards.
double learning_rate(const Schedule& schedule, int epoch);

struct EpochStats {
  int epoch = 0;
  double nll = 0.0;  // means over the epoch's samples
  double mmd = 0.0;
  double total = 0.0;
  double lr = 0.0;
  std::vector<int> batch_sizes;  // samples accumulated per optimizer step
};

/// Mini-batch SGD over variable-size scene graphs. A batch is realised as
/// gradient accumulation of per-sample losses scaled by 1 / batch size.
class Trainer {
 public:
  Trainer(Model& model, TrainingState& state, Schedule schedule);

  /// Runs epoch `state.epoch + 1` and advances the state.
  EpochStats run_epoch(const std::vector<TrainingSample>& samples);

  /// Mean total loss without parameter updates.
  EpochStats evaluate_loss(const std::vector<TrainingSample>& samples) const;

  /// Per trainable parameter: whether any step so far produced a nonzero
  /// gradient entry.
  const std::vector<bool>& gradient_seen() const { return gradient_seen_; }

 private:
  Model& model_;
  TrainingState& state_;
  Schedule schedule_;
  std::vector<ad::Tensor> params_;
  std::vector<bool> gradient_seen_;
};

/// Best-of-K metrics for each window, in input order. Windows are processed
/// on up to `threads` threads (0 = hardware concurrency); the result does not
/// depend on the thread count.
std::vector<loss::BestOfK> evaluate_windows(const Model& model,
                                            const std::vector<TrainingSample>& samples, int k,
                                            std::uint64_t seed, unsigned threads = 0);

loss::SceneMetrics pool_scene(const std::vector<loss::BestOfK>& windows);

}  // namespace sttraj::model
