#include "sttraj/app/run_config.hpp"

#include "sttraj/errors.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

namespace sttraj::app {

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("setting '" + key + "': cannot parse '" + text + "'");
  }
  return v;
}

std::vector<std::string> split_list(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

void RunConfig::validate() const {
  schedule().validate();
  model_config().validate();
  if (val_fraction < 0.0 || val_fraction >= 1.0) throw ConfigError("val_fraction must be in [0, 1)");
  if (stride < 1) throw ConfigError("stride must be at least 1");
  if (eval_k < 1) throw ConfigError("k must be at least 1");
}

model::ModelConfig RunConfig::model_config() const {
  model::ModelConfig c;
  c.d_model = d_model;
  c.heads = heads;
  c.tcnn_refine_layers = tcnn_refine_layers;
  c.kernel_width = kernel_width;
  c.variant = variant.value_or(graph::Variant::ST);
  c.coord_mode = coord_mode;
  c.loss.alpha = alpha;
  c.loss.mmd_bandwidths = mmd_bandwidths;
  c.loss.mmd_sample_count = mmd_sample_count;
  return c;
}

model::Schedule RunConfig::schedule() const {
  model::Schedule s;
  s.epochs = epochs;
  s.batch_size = batch_size;
  s.lr_initial = lr_initial;
  s.lr_after = lr_after;
  s.lr_switch_epoch = lr_switch_epoch;
  s.momentum = momentum;
  s.clip_norm = clip_norm;
  return s;
}

RunConfig profile_defaults(const std::string& name) {
  RunConfig c;
  c.profile = name;
  if (name == "paper") return c;
  if (name == "desk") {
    c.epochs = 20;
    c.batch_size = 16;
    c.lr_switch_epoch = 12;
    c.lr_after = 0.0005;
    return c;
  }
  throw ConfigError("unknown profile '" + name + "' (expected paper|desk)");
}

void apply_setting(RunConfig& c, std::string key, const std::string& raw) {
  std::replace(key.begin(), key.end(), '-', '_');
  const std::string value = trim(raw);
  if (key == "profile") {
    if (value != c.profile) {
      throw ConfigError("profile must be chosen before other settings are applied");
    }
  } else if (key == "dataset_dir") c.dataset_dir = value;
  else if (key == "scenes") c.scenes = split_list(value, ',');
  else if (key == "test_scene" || key == "test_scenes") c.test_scenes = split_list(value, ',');
  else if (key == "output_dir" || key == "out") c.output_dir = value;
  else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "epochs") c.epochs = parse_number<int>(key, value);
  else if (key == "batch_size") c.batch_size = parse_number<int>(key, value);
  else if (key == "lr_initial") c.lr_initial = parse_number<double>(key, value);
  else if (key == "lr_after") c.lr_after = parse_number<double>(key, value);
  else if (key == "lr_switch_epoch") c.lr_switch_epoch = parse_number<int>(key, value);
  else if (key == "momentum") c.momentum = parse_number<double>(key, value);
  else if (key == "clip_norm") c.clip_norm = parse_number<double>(key, value);
  else if (key == "val_fraction") c.val_fraction = parse_number<double>(key, value);
  else if (key == "stride") c.stride = parse_number<int>(key, value);
  else if (key == "variant") c.variant = graph::parse_variant(value);
  else if (key == "alpha") c.alpha = parse_number<double>(key, value);
  else if (key == "d_model") c.d_model = parse_number<int>(key, value);
  else if (key == "heads") c.heads = parse_number<int>(key, value);
  else if (key == "tcnn_refine_layers") c.tcnn_refine_layers = parse_number<int>(key, value);
  else if (key == "kernel_width") c.kernel_width = parse_number<int>(key, value);
  else if (key == "coord_mode") {
    if (value == "relative") c.coord_mode = CoordMode::Relative;
    else if (value == "absolute") c.coord_mode = CoordMode::Absolute;
    else throw ConfigError("coord_mode must be relative|absolute");
  } else if (key == "mmd_sample_count") c.mmd_sample_count = parse_number<int>(key, value);
  else if (key == "mmd_bandwidths") {
    c.mmd_bandwidths.clear();
    for (const auto& item : split_list(value, ',')) c.mmd_bandwidths.push_back(parse_number<double>(key, item));
  } else if (key == "eval_k" || key == "k") c.eval_k = parse_number<int>(key, value);
  else if (key == "threads") c.threads = parse_number<unsigned>(key, value);
  else throw ConfigError("unknown setting '" + key + "'");
}

std::map<std::string, std::string> read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected key=value", line_no);
    }
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

RunConfig resolve_config(const std::optional<std::filesystem::path>& config_file,
                         const std::map<std::string, std::string>& overrides) {
  std::map<std::string, std::string> file;
  if (config_file) file = read_key_values(*config_file);
  std::string profile = "paper";
  if (auto it = file.find("profile"); it != file.end()) profile = it->second;
  if (auto it = overrides.find("profile"); it != overrides.end()) profile = it->second;
  RunConfig c = profile_defaults(profile);
  for (const auto& [k, v] : file) {
    if (k != "profile") apply_setting(c, k, v);
  }
  for (const auto& [k, v] : overrides) {
    if (k != "profile") apply_setting(c, k, v);
  }
  auto mentions = [&](const std::string& key) {
    for (const auto& kv : {std::cref(file), std::cref(overrides)}) {
      for (const auto& [k, v] : kv.get()) {
        std::string name = k;
        std::replace(name.begin(), name.end(), '-', '_');
        if (name == key) return true;
      }
    }
    return false;
  };
  // Keep the profile's switch at the same fraction of the run.
  if (mentions("epochs") && !mentions("lr_switch_epoch")) {
    const RunConfig base = profile_defaults(profile);
    c.lr_switch_epoch = static_cast<int>(static_cast<long long>(c.epochs) * base.lr_switch_epoch / base.epochs);
  }
  return c;
}

}  // namespace sttraj::app
