#include "sttraj/data/synthetic.hpp"

#include "sttraj/errors.hpp"
#include "sttraj/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace sttraj::data {

SyntheticKind parse_synthetic_kind(const std::string& name) {
  if (name == "linear") return SyntheticKind::Linear;
  if (name == "crossing") return SyntheticKind::Crossing;
  if (name == "group") return SyntheticKind::Group;
  throw ConfigError("unknown synthetic kind '" + name + "' (expected linear|crossing|group)");
}

std::string to_string(SyntheticKind kind) {
  switch (kind) {
    case SyntheticKind::Linear: return "linear";
    case SyntheticKind::Crossing: return "crossing";
    case SyntheticKind::Group: return "group";
  }
  return "unknown";
}

namespace {

void add_walker(TrajectoryScene& scene, std::int64_t ped, const Eigen::Vector2d& start,
                const Eigen::Vector2d& velocity, int frames, std::int64_t frame_step, int first = 0) {
  for (int f = first; f < first + frames; ++f) {
    const Eigen::Vector2d p = start + static_cast<double>(f - first) * velocity;
    scene.records.push_back({f * frame_step, ped, p.x(), p.y()});
  }
}

}  // namespace

TrajectoryScene make_synthetic_scene(SyntheticKind kind, int index, std::uint64_t seed,
                                     const SyntheticOptions& options) {
  CounterRng rng = CounterRng(seed).split(static_cast<std::uint64_t>(kind)).split(
      static_cast<std::uint64_t>(index));
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * rng.uniform(); };
  const int frames = options.frames;

  TrajectoryScene scene;
  scene.name = to_string(kind) + std::to_string(index);

  switch (kind) {
    case SyntheticKind::Linear:
      // Walkers enter and leave at staggered frames, each visible for at
      // least one full window.
      for (int p = 0; p < options.pedestrians; ++p) {
        const double heading = uniform(0.0, 2.0 * std::numbers::pi);
        const double speed = uniform(0.3, 0.6);  // meters per frame
        const Eigen::Vector2d start(uniform(-8.0, 8.0), uniform(-8.0, 8.0));
        const int span = std::min(frames, options.min_visible + static_cast<int>(rng.uniform() * 12.0));
        const int first = static_cast<int>(rng.uniform() * (frames - span + 1));
        add_walker(scene, p + 1, start, speed * Eigen::Vector2d(std::cos(heading), std::sin(heading)),
                   span, options.frame_step, first);
      }
      break;
    case SyntheticKind::Crossing: {
      // Both walkers reach the meeting point at the middle frame.
      const Eigen::Vector2d meet(uniform(-2.0, 2.0), uniform(-2.0, 2.0));
      const double half = 0.5 * (frames - 1);
      const double angle = uniform(0.0, 2.0 * std::numbers::pi);
      for (int p = 0; p < 2; ++p) {
        const double heading = angle + p * uniform(0.4 * std::numbers::pi, 0.6 * std::numbers::pi);
        const Eigen::Vector2d v = uniform(0.3, 0.5) * Eigen::Vector2d(std::cos(heading), std::sin(heading));
        add_walker(scene, p + 1, meet - half * v, v, frames, options.frame_step);
      }
      break;
    }
    case SyntheticKind::Group: {
      const double heading = uniform(0.0, 2.0 * std::numbers::pi);
      const Eigen::Vector2d dir(std::cos(heading), std::sin(heading));
      const Eigen::Vector2d side(-dir.y(), dir.x());
      const double speed = uniform(0.3, 0.5);
      const Eigen::Vector2d start(uniform(-4.0, 4.0), uniform(-4.0, 4.0));
      for (int p = 0; p < 2; ++p) {
        add_walker(scene, p + 1, start + 0.7 * p * side, speed * dir, frames, options.frame_step);
      }
      // Oncoming walker on a parallel lane, passing the group mid-scene.
      const double along = speed * (frames - 1);
      add_walker(scene, 3, start + 2.0 * side + along * dir, -uniform(0.3, 0.5) * dir, frames,
                 options.frame_step);
      break;
    }
  }
  canonicalize(scene);
  return scene;
}

}  // namespace sttraj::data
