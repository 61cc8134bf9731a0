#pragma once

#include "sttraj/data/scene.hpp"

#include <cstdint>
#include <string>

namespace sttraj::data {

enum class SyntheticKind {
  Linear,    // independent constant-velocity walkers entering at staggered frames
  Crossing,  // two walkers whose paths intersect mid-scene
  Group,     // a side-by-side group plus one walker approaching head-on
};

SyntheticKind parse_synthetic_kind(const std::string& name);
std::string to_string(SyntheticKind kind);

struct SyntheticOptions {
  int frames = 60;
  int pedestrians = 12;  // Linear only
  int min_visible = 20;  // Linear: frames each walker stays in view
  std::int64_t frame_step = 10;
};

/// Deterministic scene named "<kind><index>" built from `seed` and `index`.
TrajectoryScene make_synthetic_scene(SyntheticKind kind, int index, std::uint64_t seed,
                                     const SyntheticOptions& options = {});

}  // namespace sttraj::data
