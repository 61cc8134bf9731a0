#pragma once

#include "sttraj/app/run_config.hpp"
#include "sttraj/data/synthetic.hpp"
#include "sttraj/loss/metrics.hpp"
#include "sttraj/model/training.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace sttraj::app {

/// Scenes named by the config (or every *.txt in dataset_dir when none are
/// named), sorted by name. Missing files are reported together in one
/// ConfigError.
std::vector<data::TrajectoryScene> load_dataset(const RunConfig& config);

struct TrainOutcome {
  std::vector<model::EpochStats> log;  // epochs run by this call
  std::filesystem::path log_path;
  std::filesystem::path final_checkpoint;
  std::filesystem::path best_checkpoint;
  std::size_t train_samples = 0;
  std::size_t val_samples = 0;
  std::vector<std::string> parameter_names;
  std::vector<bool> gradient_seen;  // parallel to parameter_names

  std::vector<std::string> zero_gradient_parameters() const;
};

/// Leave-one-out training. Writes `train_log.csv` (epoch,nll,mmd,total,lr),
/// `final.ckpt` and `best.ckpt` into output_dir. The best checkpoint is chosen
/// by held-out loss when val_fraction > 0, otherwise by training loss.
/// With `resume`, training continues from that checkpoint and log rows are
/// appended.
TrainOutcome cmd_train(const RunConfig& config,
                       const std::optional<std::filesystem::path>& resume = std::nullopt,
                       std::ostream* progress = nullptr);

/// Best-of-K evaluation of the test scenes. Prints a table to `out` and writes
/// `metrics.csv` into output_dir.
loss::MetricsReport cmd_eval(const RunConfig& config, const std::filesystem::path& checkpoint,
                             std::ostream& out);

struct AblationRow {
  std::string value;
  loss::SceneMetrics metrics;  // averaged over test scenes
  double final_nll = 0.0;
  std::vector<std::string> zero_gradient_parameters;
};

/// Trains and evaluates one model per value of `axis` (alpha|variant) and
/// writes `ablation_<axis>.csv` with rows
/// `value,ade,fde,var_ade,final_nll,zero_grad_params`.
std::vector<AblationRow> cmd_ablate(const RunConfig& config, const std::string& axis,
                                    const std::vector<std::string>& values,
                                    std::ostream* progress = nullptr);

/// Writes `samples.csv` for one window of a scene. Throws LookupError if the
/// window does not exist.
std::filesystem::path cmd_sample(const RunConfig& config, const std::filesystem::path& checkpoint,
                                 const std::string& scene, std::size_t window_index);

/// Writes `<out_dir>/<kind><i>.txt` for i in [0, n_scenes).
std::vector<std::filesystem::path> cmd_synth(const std::filesystem::path& out_dir,
                                             data::SyntheticKind kind, int n_scenes,
                                             std::uint64_t seed);

}  // namespace sttraj::app
