#pragma once

#include "sttraj/errors.hpp"
#include "sttraj/trajectory.hpp"

#include <Eigen/Core>

#include <cmath>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace sttraj::loss {

/// Euclidean error per (t, n): a T x N matrix.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> point_errors(const PointSequence<Scalar>& pred,
                                                                  const PointSequence<Scalar>& gt) {
  if (pred.steps() != gt.steps() || pred.agents() != gt.agents()) {
    throw DimensionError("metrics: prediction is " + std::to_string(pred.steps()) + "x" +
                         std::to_string(pred.agents()) + " but ground truth is " +
                         std::to_string(gt.steps()) + "x" + std::to_string(gt.agents()));
  }
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> e(pred.steps(), pred.agents());
  for (Eigen::Index t = 0; t < pred.steps(); ++t) {
    for (Eigen::Index n = 0; n < pred.agents(); ++n) e(t, n) = (pred.point(t, n) - gt.point(t, n)).norm();
  }
  return e;
}

/// Mean error over every predicted point.
template <typename Scalar>
Scalar ade(const PointSequence<Scalar>& pred, const PointSequence<Scalar>& gt) {
  return point_errors(pred, gt).mean();
}

/// Mean error at the final step.
template <typename Scalar>
Scalar fde(const PointSequence<Scalar>& pred, const PointSequence<Scalar>& gt) {
  const auto e = point_errors(pred, gt);
  return e.row(e.rows() - 1).mean();
}

/// Root-mean-square deviation of the per-point errors around their mean (ADE).
template <typename Scalar>
Scalar var_ade(const PointSequence<Scalar>& pred, const PointSequence<Scalar>& gt) {
  using std::sqrt;
  const auto e = point_errors(pred, gt);
  return sqrt((e.array() - e.mean()).square().mean());
}

struct SceneMetrics {
  double ade = 0.0;
  double fde = 0.0;
  double var_ade = 0.0;
};

/// Pools point errors of the selected predictions of one scene.
class SceneAccumulator {
 public:
  void add(const Eigen::MatrixXd& errors);
  bool empty() const { return errors_.empty(); }
  SceneMetrics finish() const;

 private:
  std::vector<double> errors_;
  std::vector<double> final_errors_;
};

struct MetricsReport {
  std::map<std::string, SceneMetrics> per_scene;
  double avg_ade = 0.0;
  double avg_fde = 0.0;
  double avg_var_ade = 0.0;
  // Population variance of the per-scene values.
  double cross_scene_var_ade = 0.0;
  double cross_scene_var_fde = 0.0;
  double cross_scene_var_var_ade = 0.0;
};

MetricsReport make_report(std::map<std::string, SceneMetrics> per_scene);

/// `scene,ade,fde,var_ade` rows followed by AVG and Var rows.
void write_metrics_csv(std::ostream& out, const MetricsReport& report);
/// Human-readable table.
void print_metrics_table(std::ostream& out, const MetricsReport& report);

}  // namespace sttraj::loss
