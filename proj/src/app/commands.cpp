#include "sttraj/app/commands.hpp"

#include "sttraj/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>

namespace sttraj::app {

namespace fs = std::filesystem;

namespace {

fs::path scene_path(const RunConfig& config, const std::string& name) {
  return config.dataset_dir / (name + ".txt");
}

void require_files(const RunConfig& config, const std::vector<std::string>& names) {
  std::string missing;
  for (const auto& name : names) {
    if (!fs::is_regular_file(scene_path(config, name))) missing += (missing.empty() ? "" : ", ") + name;
  }
  if (!missing.empty()) {
    throw ConfigError("missing scene files in " + config.dataset_dir.string() + ": " + missing);
  }
}

std::ofstream open_output(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, mode | std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  return out;
}

std::vector<model::TrainingSample> samples_of(const std::vector<data::TrajectoryScene>& scenes,
                                              CoordMode mode, int stride) {
  std::vector<model::TrainingSample> out;
  for (const auto& scene : scenes) {
    auto s = model::prepare_samples(scene, mode, stride);
    out.insert(out.end(), std::make_move_iterator(s.begin()), std::make_move_iterator(s.end()));
  }
  return out;
}

loss::MetricsReport evaluate_scenes(const model::Model& model, const RunConfig& config,
                                    const std::vector<data::TrajectoryScene>& scenes) {
  std::map<std::string, loss::SceneMetrics> per_scene;
  for (const auto& scene : scenes) {
    const auto samples = model::prepare_samples(scene, model.config().coord_mode, config.stride);
    if (samples.empty()) throw ConfigError("test scene '" + scene.name + "' has no complete windows");
    const auto windows = model::evaluate_windows(model, samples, config.eval_k, config.seed, config.threads);
    per_scene[scene.name] = model::pool_scene(windows);
  }
  return loss::make_report(std::move(per_scene));
}

std::vector<data::TrajectoryScene> load_named(const RunConfig& config,
                                              const std::vector<std::string>& names) {
  require_files(config, names);
  std::vector<data::TrajectoryScene> out;
  for (const auto& name : names) out.push_back(data::load_scene(scene_path(config, name)));
  return out;
}

}  // namespace

std::vector<data::TrajectoryScene> load_dataset(const RunConfig& config) {
  std::vector<std::string> names = config.scenes;
  if (names.empty()) {
    if (!fs::is_directory(config.dataset_dir)) {
      throw ConfigError("dataset directory " + config.dataset_dir.string() + " does not exist");
    }
    for (const auto& entry : fs::directory_iterator(config.dataset_dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".txt") {
        names.push_back(entry.path().stem().string());
      }
    }
  }
  for (const auto& t : config.test_scenes) {
    if (std::find(names.begin(), names.end(), t) == names.end()) names.push_back(t);
  }
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  return load_named(config, names);
}

std::vector<std::string> TrainOutcome::zero_gradient_parameters() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < parameter_names.size(); ++i) {
    if (!gradient_seen[i]) out.push_back(parameter_names[i]);
  }
  return out;
}

TrainOutcome cmd_train(const RunConfig& config, const std::optional<fs::path>& resume,
                       std::ostream* progress) {
  config.validate();
  auto scenes = load_dataset(config);

  std::vector<data::TrajectoryScene> train;
  if (config.test_scenes.size() == 1) {
    train = data::leave_one_out_split(std::move(scenes), config.test_scenes.front()).train;
  } else {
    const std::set<std::string> held(config.test_scenes.begin(), config.test_scenes.end());
    for (auto& s : scenes) {
      if (!held.count(s.name)) train.push_back(std::move(s));
    }
  }

  std::optional<model::LoadedCheckpoint> loaded;
  if (resume) {
    loaded.emplace(model::load_checkpoint(*resume));
    if (config.variant && *config.variant != loaded->model.config().variant) {
      throw ConfigError("--variant " + graph::to_string(*config.variant) + " does not match checkpoint variant " +
                        graph::to_string(loaded->model.config().variant));
    }
  } else {
    model::TrainingState state;
    state.seed = config.seed;
    loaded.emplace(model::LoadedCheckpoint{model::Model(config.model_config(), config.seed), std::move(state)});
  }
  model::Model& net = loaded->model;
  model::TrainingState& state = loaded->state;

  auto all = samples_of(train, net.config().coord_mode, config.stride);
  std::vector<model::TrainingSample> val;
  if (config.val_fraction > 0.0) {
    const auto held = static_cast<std::size_t>(std::ceil(config.val_fraction * static_cast<double>(all.size())));
    val.assign(std::make_move_iterator(all.end() - static_cast<std::ptrdiff_t>(held)),
               std::make_move_iterator(all.end()));
    all.resize(all.size() - held);
  }
  if (all.empty()) throw ConfigError("no complete training windows in the training scenes");

  TrainOutcome outcome;
  outcome.train_samples = all.size();
  outcome.val_samples = val.size();
  for (const auto& p : net.parameters()) outcome.parameter_names.push_back(p.name);
  outcome.log_path = config.output_dir / "train_log.csv";
  outcome.final_checkpoint = config.output_dir / "final.ckpt";
  outcome.best_checkpoint = config.output_dir / "best.ckpt";

  const bool append = resume && fs::exists(outcome.log_path);
  auto log = open_output(outcome.log_path, append ? std::ios::app : std::ios::trunc);
  if (!append) log << "epoch,nll,mmd,total,lr\n";

  model::Trainer trainer(net, state, config.schedule());
  while (static_cast<int>(state.epoch) < config.epochs) {
    const auto stats = trainer.run_epoch(all);
    log << stats.epoch << ',' << data::format_double(stats.nll) << ',' << data::format_double(stats.mmd) << ','
        << data::format_double(stats.total) << ',' << data::format_double(stats.lr) << '\n';
    log.flush();
    const double score = val.empty() ? stats.total : trainer.evaluate_loss(val).total;
    if (score < state.best_loss || !fs::exists(outcome.best_checkpoint)) {
      state.best_loss = std::min(score, state.best_loss);
      model::save_checkpoint(outcome.best_checkpoint, net, state);
    }
    if (progress) {
      *progress << "epoch " << stats.epoch << "  nll " << stats.nll << "  mmd " << stats.mmd << "  total "
                << stats.total << "  lr " << stats.lr << '\n';
    }
    outcome.log.push_back(stats);
  }
  outcome.gradient_seen = trainer.gradient_seen();
  model::save_checkpoint(outcome.final_checkpoint, net, state);
  return outcome;
}

loss::MetricsReport cmd_eval(const RunConfig& config, const fs::path& checkpoint, std::ostream& out) {
  if (config.test_scenes.empty()) throw ConfigError("eval requires --test-scene");
  if (config.eval_k < 1) throw ConfigError("k must be at least 1");
  const auto loaded = model::load_checkpoint(checkpoint);
  const auto& mc = loaded.model.config();
  if (config.variant && *config.variant != mc.variant) {
    throw ConfigError("--variant " + graph::to_string(*config.variant) + " does not match checkpoint variant " +
                      graph::to_string(mc.variant));
  }
  const auto report = evaluate_scenes(loaded.model, config, load_named(config, config.test_scenes));
  loss::print_metrics_table(out, report);
  auto csv = open_output(config.output_dir / "metrics.csv");
  loss::write_metrics_csv(csv, report);
  return report;
}

std::vector<AblationRow> cmd_ablate(const RunConfig& config, const std::string& axis,
                                    const std::vector<std::string>& values, std::ostream* progress) {
  if (axis != "alpha" && axis != "variant") throw ConfigError("ablation axis must be alpha|variant");
  if (values.empty()) throw ConfigError("ablation requires at least one value");
  if (config.test_scenes.empty()) throw ConfigError("ablation requires --test-scene");

  std::vector<AblationRow> rows;
  for (const auto& value : values) {
    RunConfig c = config;
    apply_setting(c, axis, value);
    c.output_dir = config.output_dir / (axis + "_" + value);
    if (progress) *progress << "== " << axis << " = " << value << '\n';
    const auto outcome = cmd_train(c, std::nullopt, progress);
    const auto loaded = model::load_checkpoint(outcome.final_checkpoint);
    const auto report = evaluate_scenes(loaded.model, c, load_named(c, c.test_scenes));
    rows.push_back({value, {report.avg_ade, report.avg_fde, report.avg_var_ade}, outcome.log.back().nll,
                    outcome.zero_gradient_parameters()});
  }

  auto csv = open_output(config.output_dir / ("ablation_" + axis + ".csv"));
  csv << "value,ade,fde,var_ade,final_nll,zero_grad_params\n";
  for (const auto& r : rows) {
    csv << r.value << ',' << data::format_double(r.metrics.ade) << ',' << data::format_double(r.metrics.fde) << ','
        << data::format_double(r.metrics.var_ade) << ',' << data::format_double(r.final_nll) << ','
        << r.zero_gradient_parameters.size() << '\n';
  }
  return rows;
}

fs::path cmd_sample(const RunConfig& config, const fs::path& checkpoint, const std::string& scene,
                    std::size_t window_index) {
  if (config.eval_k < 1) throw ConfigError("k must be at least 1");
  const auto loaded = model::load_checkpoint(checkpoint);
  const auto mode = loaded.model.config().coord_mode;
  const auto scenes = load_named(config, {scene});
  const auto samples = model::prepare_samples(scenes.front(), mode, config.stride);
  if (window_index >= samples.size()) {
    throw LookupError("window " + std::to_string(window_index) + " out of range: scene '" + scene + "' has " +
                      std::to_string(samples.size()) + " windows");
  }
  const auto& s = samples[window_index];
  const auto field = loaded.model.forward(s.obs);
  const auto draws = loss::sample_trajectories(field, config.eval_k, config.seed, s.obs_abs.last(), mode);
  const fs::path path = config.output_dir / "samples.csv";
  auto out = open_output(path);
  loss::write_sample_cloud(out, draws, s.obs_abs, s.fut_abs, s.ped_ids);
  return path;
}

std::vector<fs::path> cmd_synth(const fs::path& out_dir, data::SyntheticKind kind, int n_scenes,
                                std::uint64_t seed) {
  if (n_scenes < 1) throw ConfigError("n_scenes must be at least 1");
  fs::create_directories(out_dir);
  std::vector<fs::path> paths;
  for (int i = 0; i < n_scenes; ++i) {
    const auto scene = data::make_synthetic_scene(kind, i, seed);
    const fs::path path = out_dir / (scene.name + ".txt");
    data::save_scene(path, scene);
    paths.push_back(path);
  }
  return paths;
}

}  // namespace sttraj::app
