// sttraj: train, evaluate, ablate and sample the trajectory model.

#include "sttraj/app/commands.hpp"
#include "sttraj/errors.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <optional>
#include <string>

namespace {

using Overrides = std::map<std::string, std::string>;

struct Common {
  std::optional<std::string> config;
  Overrides flags;
};

// Flag values land in `flags` under their config key only when given.
void add_setting(CLI::App* cmd, Common& common, const std::string& flag, const std::string& key,
                 const std::string& help) {
  cmd->add_option_function<std::string>(
      flag, [&common, key](const std::string& v) { common.flags[key] = v; }, help);
}

void add_run_options(CLI::App* cmd, Common& c) {
  cmd->add_option_function<std::string>(
      "--config", [&c](const std::string& v) { c.config = v; }, "flat key=value config file");
  add_setting(cmd, c, "--profile", "profile", "paper|desk defaults");
  add_setting(cmd, c, "--dataset-dir", "dataset_dir", "directory of <scene>.txt files");
  add_setting(cmd, c, "--test-scene", "test_scene", "held-out scene name(s), comma separated");
  add_setting(cmd, c, "--scenes", "scenes", "scene names to load (default: all *.txt)");
  add_setting(cmd, c, "--seed", "seed", "root random seed");
  add_setting(cmd, c, "--out", "output_dir", "output directory");
  add_setting(cmd, c, "--k", "eval_k", "samples per window for best-of-K / export");
  add_setting(cmd, c, "--threads", "threads", "evaluation threads (0 = all cores)");
}

void add_train_options(CLI::App* cmd, Common& c) {
  add_setting(cmd, c, "--epochs", "epochs", "training epochs");
  add_setting(cmd, c, "--batch-size", "batch_size", "samples accumulated per SGD step");
  add_setting(cmd, c, "--alpha", "alpha", "MMD weight in the hybrid loss");
  add_setting(cmd, c, "--variant", "variant", "S|T|ST graph block");
  add_setting(cmd, c, "--val-fraction", "val_fraction", "fraction of training windows held out for selection");
}

sttraj::app::RunConfig resolve(const Common& c) {
  std::optional<std::filesystem::path> file;
  if (c.config) file = *c.config;
  return sttraj::app::resolve_config(file, c.flags);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace sttraj;
  CLI::App app{"Spatio-temporal graph trajectory predictor"};
  app.require_subcommand(1);

  Common common;
  std::string checkpoint;
  std::optional<std::string> resume;
  std::string axis;
  std::vector<std::string> values;
  std::string scene;
  std::size_t window = 0;
  std::string kind = "linear";
  int n_scenes = 5;
  bool quiet = false;

  auto* train = app.add_subcommand("train", "train on all but the test scene(s)");
  add_run_options(train, common);
  add_train_options(train, common);
  train->add_option_function<std::string>(
      "--resume", [&](const std::string& v) { resume = v; }, "continue from a checkpoint");
  train->add_flag("--quiet", quiet, "no per-epoch progress");

  auto* eval = app.add_subcommand("eval", "best-of-K evaluation of a checkpoint");
  add_run_options(eval, common);
  add_setting(eval, common, "--variant", "variant", "expected variant of the checkpoint");
  eval->add_option("--checkpoint", checkpoint, "checkpoint file")->required();

  auto* ablate = app.add_subcommand("ablate", "train and evaluate one model per value");
  add_run_options(ablate, common);
  add_train_options(ablate, common);
  ablate->add_option("--axis", axis, "alpha|variant")->required()->check(CLI::IsMember({"alpha", "variant"}));
  ablate->add_option("--values", values, "values to compare (comma separated)")->delimiter(',')->required();
  ablate->add_flag("--quiet", quiet, "no per-epoch progress");

  auto* sample = app.add_subcommand("sample", "export a sample cloud for one window");
  add_run_options(sample, common);
  sample->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  sample->add_option("--scene", scene, "scene name in the dataset directory")->required();
  sample->add_option("--window", window, "window index within the scene");

  auto* synth = app.add_subcommand("synth", "write synthetic scenes");
  add_setting(synth, common, "--seed", "seed", "root random seed");
  add_setting(synth, common, "--out", "output_dir", "output directory");
  synth->add_option("--kind", kind, "linear|crossing|group");
  synth->add_option("--n-scenes", n_scenes, "number of scenes");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ablate && !common.flags.count("profile")) common.flags["profile"] = "desk";
    auto config = resolve(common);
    if (*train) {
      std::optional<std::filesystem::path> from;
      if (resume) from = *resume;
      const auto outcome = app::cmd_train(config, from, quiet ? nullptr : &std::cout);
      std::cout << "wrote " << outcome.log_path.string() << ", " << outcome.final_checkpoint.string() << ", "
                << outcome.best_checkpoint.string() << '\n';
    } else if (*eval) {
      app::cmd_eval(config, checkpoint, std::cout);
    } else if (*ablate) {
      const auto rows = app::cmd_ablate(config, axis, values, quiet ? nullptr : &std::cout);
      std::cout << "value  ade     fde     var_ade  final_nll  zero_grad_params\n";
      for (const auto& r : rows) {
        std::cout << r.value << "  " << r.metrics.ade << "  " << r.metrics.fde << "  " << r.metrics.var_ade << "  "
                  << r.final_nll << "  " << r.zero_gradient_parameters.size() << '\n';
      }
    } else if (*sample) {
      std::cout << "wrote " << app::cmd_sample(config, checkpoint, scene, window).string() << '\n';
    } else if (*synth) {
      for (const auto& p : app::cmd_synth(config.output_dir, data::parse_synthetic_kind(kind), n_scenes, config.seed)) {
        std::cout << "wrote " << p.string() << '\n';
      }
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
