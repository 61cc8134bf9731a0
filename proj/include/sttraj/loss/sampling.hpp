#pragma once

#include "sttraj/decoder/tcnn.hpp"
#include "sttraj/trajectory.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace sttraj::loss {

/// Draws K trajectories from the field. Each node-step is sampled through the
/// Cholesky factor of its 2x2 covariance. In relative mode the draws are
/// displacements accumulated from `last_observed` (N x 2); in absolute mode they
/// are positions. Sample k depends only on (seed, k), so the first K samples
/// of a larger draw equal a draw of K.
std::vector<Positions> sample_trajectories(const decoder::GaussianField& field, int count,
                                           std::uint64_t seed, const Anchor& last_observed,
                                           CoordMode mode = CoordMode::Relative);

/// Mean of the field as a trajectory, integrated like the samples.
Positions mean_trajectory(const decoder::GaussianField& field, const Anchor& last_observed,
                          CoordMode mode = CoordMode::Relative);

struct BestOfK {
  double ade = 0.0;
  double fde = 0.0;
  double var_ade = 0.0;
  int best_index = 0;
  Eigen::MatrixXd errors;  // T x N point errors of the selected sample
};

/// Samples K trajectories and keeps the one with the lowest ADE.
BestOfK best_of_k_metrics(const decoder::GaussianField& field, const Positions& ground_truth,
                          int count, std::uint64_t seed, const Anchor& last_observed,
                          CoordMode mode = CoordMode::Relative);

/// CSV `sample_id,t,ped_id,x,y`. Sample rows use t = 8..19; the observed path
/// is written with sample_id -1 (t = 0..7) and the ground truth with -2.
void write_sample_cloud(std::ostream& out, const std::vector<Positions>& samples,
                        const Positions& observed, const Positions& ground_truth,
                        const std::vector<std::int64_t>& ped_ids);

}  // namespace sttraj::loss
