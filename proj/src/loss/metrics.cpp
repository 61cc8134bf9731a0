#include "sttraj/loss/metrics.hpp"

#include "sttraj/data/scene.hpp"

#include <iomanip>
#include <numeric>
#include <ostream>

namespace sttraj::loss {

void SceneAccumulator::add(const Eigen::MatrixXd& errors) {
  for (Eigen::Index n = 0; n < errors.cols(); ++n) {
    for (Eigen::Index t = 0; t < errors.rows(); ++t) errors_.push_back(errors(t, n));
    final_errors_.push_back(errors(errors.rows() - 1, n));
  }
}

SceneMetrics SceneAccumulator::finish() const {
  SceneMetrics m;
  if (errors_.empty()) return m;
  const auto count = static_cast<double>(errors_.size());
  m.ade = std::accumulate(errors_.begin(), errors_.end(), 0.0) / count;
  m.fde = std::accumulate(final_errors_.begin(), final_errors_.end(), 0.0) /
          static_cast<double>(final_errors_.size());
  double sq = 0.0;
  for (double e : errors_) sq += (e - m.ade) * (e - m.ade);
  m.var_ade = std::sqrt(sq / count);
  return m;
}

MetricsReport make_report(std::map<std::string, SceneMetrics> per_scene) {
  MetricsReport r;
  r.per_scene = std::move(per_scene);
  if (r.per_scene.empty()) return r;
  const auto count = static_cast<double>(r.per_scene.size());
  for (const auto& [name, m] : r.per_scene) {
    r.avg_ade += m.ade;
    r.avg_fde += m.fde;
    r.avg_var_ade += m.var_ade;
  }
  r.avg_ade /= count;
  r.avg_fde /= count;
  r.avg_var_ade /= count;
  for (const auto& [name, m] : r.per_scene) {
    r.cross_scene_var_ade += (m.ade - r.avg_ade) * (m.ade - r.avg_ade);
    r.cross_scene_var_fde += (m.fde - r.avg_fde) * (m.fde - r.avg_fde);
    r.cross_scene_var_var_ade += (m.var_ade - r.avg_var_ade) * (m.var_ade - r.avg_var_ade);
  }
  r.cross_scene_var_ade /= count;
  r.cross_scene_var_fde /= count;
  r.cross_scene_var_var_ade /= count;
  return r;
}

void write_metrics_csv(std::ostream& out, const MetricsReport& report) {
  using data::format_double;
  out << "scene,ade,fde,var_ade\n";
  for (const auto& [name, m] : report.per_scene) {
    out << name << ',' << format_double(m.ade) << ',' << format_double(m.fde) << ','
        << format_double(m.var_ade) << '\n';
  }
  out << "AVG," << format_double(report.avg_ade) << ',' << format_double(report.avg_fde) << ','
      << format_double(report.avg_var_ade) << '\n';
  out << "Var," << format_double(report.cross_scene_var_ade) << ','
      << format_double(report.cross_scene_var_fde) << ','
      << format_double(report.cross_scene_var_var_ade) << '\n';
}

void print_metrics_table(std::ostream& out, const MetricsReport& report) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::left << std::setw(12) << "scene" << std::right << std::setw(12) << "ADE"
      << std::setw(12) << "FDE" << std::setw(12) << "Var(ADE)" << '\n';
  auto row = [&](const std::string& name, double a, double f, double v) {
    out << std::left << std::setw(12) << name << std::right << std::fixed << std::setprecision(4)
        << std::setw(12) << a << std::setw(12) << f << std::setw(12) << v << '\n';
  };
  for (const auto& [name, m] : report.per_scene) row(name, m.ade, m.fde, m.var_ade);
  row("AVG", report.avg_ade, report.avg_fde, report.avg_var_ade);
  row("Var", report.cross_scene_var_ade, report.cross_scene_var_fde, report.cross_scene_var_var_ade);
  out.flags(flags);
  out.precision(precision);
}

}  // namespace sttraj::loss
