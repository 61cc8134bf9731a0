#include "sttraj/data/scene.hpp"

#include "sttraj/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>

namespace sttraj::data {

std::vector<std::int64_t> TrajectoryScene::frame_ids() const {
  std::vector<std::int64_t> ids;
  ids.reserve(records.size());
  for (const auto& r : records) ids.push_back(r.frame_id);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

std::vector<std::int64_t> TrajectoryScene::ped_ids() const {
  std::vector<std::int64_t> ids;
  for (const auto& r : records) ids.push_back(r.ped_id);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

void canonicalize(TrajectoryScene& scene) {
  auto key = [](const TrackPoint& p) { return std::pair(p.frame_id, p.ped_id); };
  std::stable_sort(scene.records.begin(), scene.records.end(),
                   [&](const TrackPoint& a, const TrackPoint& b) { return key(a) < key(b); });
  for (std::size_t i = 0; i < scene.records.size(); ++i) {
    const auto& r = scene.records[i];
    if (!std::isfinite(r.x) || !std::isfinite(r.y)) {
      throw IntegrityError(scene.name + ": non-finite coordinate at frame " +
                           std::to_string(r.frame_id));
    }
    if (i > 0 && key(scene.records[i - 1]) == key(r)) {
      throw IntegrityError(scene.name + ": duplicate record for frame " +
                           std::to_string(r.frame_id) + ", pedestrian " + std::to_string(r.ped_id));
    }
  }
}

namespace {

bool parse_double(std::string_view token, double& out) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
  return ec == std::errc() && ptr == token.data() + token.size() && std::isfinite(out);
}

bool parse_id(std::string_view token, std::int64_t& out) {
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
  if (ec == std::errc() && ptr == token.data() + token.size()) return true;
  double d = 0.0;
  if (!parse_double(token, d) || d != std::floor(d) || std::abs(d) > 9.0e15) return false;
  out = static_cast<std::int64_t>(d);
  return true;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; };
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

}  // namespace

TrajectoryScene parse_scene(std::istream& in, std::string name) {
  TrajectoryScene scene;
  scene.name = std::move(name);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    auto fail = [&](const std::string& why) -> ParseError {
      return ParseError(scene.name + ":" + std::to_string(line_no) + ": " + why, line_no);
    };
    if (tokens.size() != 4) throw fail("expected 4 fields `frame_id ped_id x y`");
    TrackPoint p;
    if (!parse_id(tokens[0], p.frame_id)) throw fail("bad frame id '" + std::string(tokens[0]) + "'");
    if (!parse_id(tokens[1], p.ped_id)) throw fail("bad pedestrian id '" + std::string(tokens[1]) + "'");
    if (!parse_double(tokens[2], p.x)) throw fail("bad x coordinate '" + std::string(tokens[2]) + "'");
    if (!parse_double(tokens[3], p.y)) throw fail("bad y coordinate '" + std::string(tokens[3]) + "'");
    scene.records.push_back(p);
  }
  canonicalize(scene);
  return scene;
}

TrajectoryScene load_scene(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LookupError("cannot open scene file " + path.string());
  return parse_scene(in, path.stem().string());
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void write_scene(std::ostream& out, const TrajectoryScene& scene) {
  for (const auto& r : scene.records) {
    out << r.frame_id << '\t' << r.ped_id << '\t' << format_double(r.x) << '\t'
        << format_double(r.y) << '\n';
  }
}

void save_scene(const std::filesystem::path& path, const TrajectoryScene& scene) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write scene file " + path.string());
  write_scene(out, scene);
}

}  // namespace sttraj::data
