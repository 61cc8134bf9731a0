#pragma once

#include "sttraj/trajectory.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace sttraj::data {

struct TrackPoint {
  std::int64_t frame_id = 0;
  std::int64_t ped_id = 0;
  double x = 0.0;  // meters
  double y = 0.0;

  friend bool operator==(const TrackPoint&, const TrackPoint&) = default;
};

/// Per-frame pedestrian positions of one recording, sorted by (frame, ped).
struct TrajectoryScene {
  std::string name;
  std::vector<TrackPoint> records;
  double frame_interval = 0.4;  // seconds

  /// Unique frame ids in increasing order.
  std::vector<std::int64_t> frame_ids() const;
  std::vector<std::int64_t> ped_ids() const;

  friend bool operator==(const TrajectoryScene&, const TrajectoryScene&) = default;
};

/// Sorts records and rejects duplicate (frame, ped) pairs or non-finite
/// coordinates with IntegrityError.
void canonicalize(TrajectoryScene& scene);

/// Parses `frame_id ped_id x y` lines. Blank lines are skipped; ids may carry
/// a trailing ".0". Throws ParseError (with 1-based line) or IntegrityError.
TrajectoryScene parse_scene(std::istream& in, std::string name);
/// Scene name is the file stem.
TrajectoryScene load_scene(const std::filesystem::path& path);

/// Writes the text format with shortest round-trip float formatting.
void write_scene(std::ostream& out, const TrajectoryScene& scene);
void save_scene(const std::filesystem::path& path, const TrajectoryScene& scene);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

}  // namespace sttraj::data
