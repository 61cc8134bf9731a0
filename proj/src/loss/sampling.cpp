#include "sttraj/loss/sampling.hpp"

#include "sttraj/data/scene.hpp"
#include "sttraj/errors.hpp"
#include "sttraj/loss/metrics.hpp"
#include "sttraj/rng.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

namespace sttraj::loss {

namespace {

Positions finish_path(Positions draws, const Anchor& last_observed, CoordMode mode) {
  if (mode == CoordMode::Absolute) return draws;
  Positions out(draws.steps(), draws.agents());
  for (Eigen::Index n = 0; n < draws.agents(); ++n) {
    Eigen::Vector2d acc = last_observed.row(n).transpose();
    for (Eigen::Index t = 0; t < draws.steps(); ++t) {
      acc += draws.point(t, n);
      out.set_point(t, n, acc);
    }
  }
  return out;
}

void check_anchor(const decoder::GaussianField& field, const Anchor& last_observed) {
  if (last_observed.rows() != field.agents()) {
    throw DimensionError("sampling: anchor has " + std::to_string(last_observed.rows()) +
                         " rows for " + std::to_string(field.agents()) + " pedestrians");
  }
}

}  // namespace

std::vector<Positions> sample_trajectories(const decoder::GaussianField& field, int count,
                                           std::uint64_t seed, const Anchor& last_observed,
                                           CoordMode mode) {
  if (count < 1) throw ContractError("sample_trajectories: K must be at least 1");
  check_anchor(field, last_observed);
  const auto steps = field.steps(), agents = field.agents();
  const auto mx = field.mu_x.matrix(), my = field.mu_y.matrix();
  const auto sx = field.sigma_x.matrix(), sy = field.sigma_y.matrix();
  const auto rho = field.rho.matrix();
  const CounterRng root(seed);
  std::vector<Positions> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    CounterRng rng = root.split(static_cast<std::uint64_t>(k));
    std::normal_distribution<double> normal;
    Positions draws(steps, agents);
    for (Eigen::Index t = 0; t < steps; ++t) {
      for (Eigen::Index n = 0; n < agents; ++n) {
        const double e1 = normal(rng);
        const double e2 = normal(rng);
        const double r = rho(t, n);
        // Lower Cholesky factor of [[sx^2, r sx sy], [r sx sy, sy^2]].
        const double l21 = r * sy(t, n);
        const double l22 = sy(t, n) * std::sqrt(std::max(0.0, 1.0 - r * r));
        draws.x(t, n) = mx(t, n) + sx(t, n) * e1;
        draws.y(t, n) = my(t, n) + l21 * e1 + l22 * e2;
      }
    }
    out.push_back(finish_path(std::move(draws), last_observed, mode));
  }
  return out;
}

Positions mean_trajectory(const decoder::GaussianField& field, const Anchor& last_observed,
                          CoordMode mode) {
  check_anchor(field, last_observed);
  Positions mean(field.steps(), field.agents());
  const auto mx = field.mu_x.matrix(), my = field.mu_y.matrix();
  for (Eigen::Index t = 0; t < field.steps(); ++t) {
    for (Eigen::Index n = 0; n < field.agents(); ++n) {
      mean.x(t, n) = mx(t, n);
      mean.y(t, n) = my(t, n);
    }
  }
  return finish_path(std::move(mean), last_observed, mode);
}

BestOfK best_of_k_metrics(const decoder::GaussianField& field, const Positions& ground_truth,
                          int count, std::uint64_t seed, const Anchor& last_observed,
                          CoordMode mode) {
  const auto samples = sample_trajectories(field, count, seed, last_observed, mode);
  BestOfK best;
  double best_ade = std::numeric_limits<double>::infinity();
  for (int k = 0; k < count; ++k) {
    Eigen::MatrixXd e = point_errors(samples[static_cast<std::size_t>(k)], ground_truth);
    const double a = e.mean();
    if (a < best_ade) {
      best_ade = a;
      best.best_index = k;
      best.errors = std::move(e);
    }
  }
  best.ade = best.errors.mean();
  best.fde = best.errors.row(best.errors.rows() - 1).mean();
  best.var_ade = std::sqrt((best.errors.array() - best.ade).square().mean());
  return best;
}

void write_sample_cloud(std::ostream& out, const std::vector<Positions>& samples,
                        const Positions& observed, const Positions& ground_truth,
                        const std::vector<std::int64_t>& ped_ids) {
  using data::format_double;
  if (static_cast<Eigen::Index>(ped_ids.size()) != observed.agents()) {
    throw DimensionError("write_sample_cloud: pedestrian id count does not match the paths");
  }
  const auto obs_steps = observed.steps();
  out << "sample_id,t,ped_id,x,y\n";
  auto rows = [&](long id, const Positions& p, Eigen::Index t0) {
    for (Eigen::Index t = 0; t < p.steps(); ++t) {
      for (Eigen::Index n = 0; n < p.agents(); ++n) {
        out << id << ',' << (t0 + t) << ',' << ped_ids[static_cast<std::size_t>(n)] << ','
            << format_double(p.x(t, n)) << ',' << format_double(p.y(t, n)) << '\n';
      }
    }
  };
  rows(-1, observed, 0);
  rows(-2, ground_truth, obs_steps);
  for (std::size_t k = 0; k < samples.size(); ++k) rows(static_cast<long>(k), samples[k], obs_steps);
}

}  // namespace sttraj::loss
