#include "sttraj/data/samples.hpp"

#include "sttraj/errors.hpp"

#include <algorithm>
#include <map>

namespace sttraj::data {

std::vector<SequenceSample> window_sequences(const TrajectoryScene& scene, int t_obs, int t_pred,
                                             int stride) {
  if (t_obs < 1 || t_pred < 1 || stride < 1) {
    throw ConfigError("window_sequences: lengths and stride must be positive");
  }
  const auto frames = scene.frame_ids();
  const std::size_t span = static_cast<std::size_t>(t_obs + t_pred);
  std::vector<SequenceSample> samples;
  if (frames.size() < span) return samples;

  // Per-frame lookup: frame index -> (ped -> position).
  std::vector<std::map<std::int64_t, Eigen::Vector2d>> by_frame(frames.size());
  {
    std::size_t f = 0;
    for (const auto& r : scene.records) {
      while (frames[f] != r.frame_id) ++f;  // records are sorted by frame
      by_frame[f].emplace(r.ped_id, Eigen::Vector2d(r.x, r.y));
    }
  }

  for (std::size_t start = 0; start + span <= frames.size(); start += static_cast<std::size_t>(stride)) {
    std::vector<std::int64_t> present;
    for (const auto& [ped, pos] : by_frame[start]) {
      bool all = true;
      for (std::size_t f = start + 1; f < start + span && all; ++f) all = by_frame[f].count(ped) > 0;
      if (all) present.push_back(ped);
    }
    if (present.empty()) continue;
    const auto n = static_cast<Eigen::Index>(present.size());
    SequenceSample s{Positions(t_obs, n), Positions(t_pred, n), present, start};
    for (Eigen::Index k = 0; k < n; ++k) {
      const auto ped = present[static_cast<std::size_t>(k)];
      for (int t = 0; t < t_obs; ++t) s.obs.set_point(t, k, by_frame[start + t].at(ped));
      for (int t = 0; t < t_pred; ++t) s.fut.set_point(t, k, by_frame[start + t_obs + t].at(ped));
    }
    samples.push_back(std::move(s));
  }
  return samples;
}

namespace {

ad::Tensor pack(const Positions& p) {
  const Eigen::Index steps = p.steps(), agents = p.agents();
  ad::Vector v(2 * steps * agents);
  for (Eigen::Index t = 0; t < steps; ++t) {
    for (Eigen::Index n = 0; n < agents; ++n) {
      v[(0 * steps + t) * agents + n] = p.x(t, n);
      v[(1 * steps + t) * agents + n] = p.y(t, n);
    }
  }
  return ad::Tensor::constant({2, steps, agents}, std::move(v));
}

Positions differences(const Positions& p, const Anchor& before) {
  Positions d(p.steps(), p.agents());
  for (Eigen::Index n = 0; n < p.agents(); ++n) {
    Eigen::Vector2d prev = before.row(n).transpose();
    for (Eigen::Index t = 0; t < p.steps(); ++t) {
      const Eigen::Vector2d cur = p.point(t, n);
      d.set_point(t, n, cur - prev);
      prev = cur;
    }
  }
  return d;
}

}  // namespace

std::pair<GraphTensor, GraphTensor> to_graph_tensor(const SequenceSample& sample, CoordMode mode) {
  if (mode == CoordMode::Absolute) {
    return {GraphTensor{pack(sample.obs), mode}, GraphTensor{pack(sample.fut), mode}};
  }
  Anchor first(sample.agents(), 2);
  for (Eigen::Index n = 0; n < sample.agents(); ++n) first.row(n) = sample.obs.point(0, n).transpose();
  return {GraphTensor{pack(differences(sample.obs, first)), mode},
          GraphTensor{pack(differences(sample.fut, sample.obs.last())), mode}};
}

Positions to_positions(const ad::Tensor& values) {
  if (values.rank() != 3 || values.dim(0) != 2) {
    throw DimensionError("to_positions: expected [2 x T x N], got " + ad::to_string(values.shape()));
  }
  const Eigen::Index steps = values.dim(1), agents = values.dim(2);
  Positions p(steps, agents);
  const auto& v = values.value();
  for (Eigen::Index t = 0; t < steps; ++t) {
    for (Eigen::Index n = 0; n < agents; ++n) {
      p.x(t, n) = v[(0 * steps + t) * agents + n];
      p.y(t, n) = v[(1 * steps + t) * agents + n];
    }
  }
  return p;
}

Positions integrate_displacements(const Positions& displacements, const Anchor& origin) {
  if (origin.rows() != displacements.agents()) {
    throw DimensionError("integrate_displacements: origin has wrong pedestrian count");
  }
  Positions p(displacements.steps(), displacements.agents());
  for (Eigen::Index n = 0; n < displacements.agents(); ++n) {
    Eigen::Vector2d acc = origin.row(n).transpose();
    for (Eigen::Index t = 0; t < displacements.steps(); ++t) {
      acc += displacements.point(t, n);
      p.set_point(t, n, acc);
    }
  }
  return p;
}

SceneSplit leave_one_out_split(std::vector<TrajectoryScene> scenes, const std::string& test_name) {
  auto it = std::find_if(scenes.begin(), scenes.end(),
                         [&](const TrajectoryScene& s) { return s.name == test_name; });
  if (it == scenes.end()) throw LookupError("unknown test scene '" + test_name + "'");
  SceneSplit split;
  split.test = std::move(*it);
  scenes.erase(it);
  std::sort(scenes.begin(), scenes.end(),
            [](const TrajectoryScene& a, const TrajectoryScene& b) { return a.name < b.name; });
  split.train = std::move(scenes);
  return split;
}

}  // namespace sttraj::data
