#pragma once

#include "sttraj/graph/gcn.hpp"
#include "sttraj/model/model.hpp"
#include "sttraj/model/training.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sttraj::app {

/// Everything a command needs. Field defaults are the `paper` profile.
struct RunConfig {
  std::string profile = "paper";
  std::filesystem::path dataset_dir = ".";
  std::vector<std::string> scenes;  // empty: every *.txt in dataset_dir
  std::vector<std::string> test_scenes;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 0;

  // training protocol
  int epochs = 250;
  int batch_size = 128;
  double lr_initial = 0.01;
  double lr_after = 0.002;
  int lr_switch_epoch = 150;
  double momentum = 0.9;
  double clip_norm = 10.0;
  double val_fraction = 0.0;
  int stride = 1;

  // model and loss
  std::optional<graph::Variant> variant;  // unset means ST for training
  double alpha = 0.3;
  int d_model = 16;
  int heads = 4;
  int tcnn_refine_layers = 1;
  int kernel_width = 3;
  CoordMode coord_mode = CoordMode::Relative;
  int mmd_sample_count = 4;
  std::vector<double> mmd_bandwidths{0.25, 0.5, 1.0, 2.0, 4.0};

  // evaluation
  int eval_k = 20;
  unsigned threads = 0;

  /// Throws ConfigError when a field is out of range.
  void validate() const;

  model::ModelConfig model_config() const;
  model::Schedule schedule() const;
};

/// Profile defaults: "paper" (250 epochs, batch 128, lr 0.01 -> 0.002 after
/// epoch 150) or "desk" (20 epochs, batch 16, lr 0.01 -> 0.0005 after epoch 12).
RunConfig profile_defaults(const std::string& name);

/// Sets one field from its text form. Keys use underscores; dashes are
/// accepted as well. Throws ConfigError for unknown keys or bad values.
void apply_setting(RunConfig& config, std::string key, const std::string& value);

/// Reads flat UTF-8 `key=value` lines; '#' starts a comment.
std::map<std::string, std::string> read_key_values(const std::filesystem::path& path);

/// Profile defaults, then file settings, then `overrides` (e.g. CLI flags).
/// The profile is taken from `overrides`, then the file, then "paper".
/// When epochs is set but lr_switch_epoch is not, the switch is scaled to the
/// same fraction of the run as in the profile.
RunConfig resolve_config(const std::optional<std::filesystem::path>& config_file,
                         const std::map<std::string, std::string>& overrides);

}  // namespace sttraj::app
