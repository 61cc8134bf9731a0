#pragma once

#include <Eigen/Core>

namespace sttraj {

/// 2-D points for `steps` time steps of `agents` pedestrians (T x N x 2).
///
/// Stored as a T x 2N row-major matrix so that one time step is one
/// contiguous row: [x_0, y_0, x_1, y_1, ...].
template <typename Scalar>
class PointSequence {
 public:
  using Storage = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using Point = Eigen::Matrix<Scalar, 2, 1>;

  PointSequence() = default;
  PointSequence(Eigen::Index steps, Eigen::Index agents) : xy_(Storage::Zero(steps, 2 * agents)) {}

  Eigen::Index steps() const { return xy_.rows(); }
  Eigen::Index agents() const { return xy_.cols() / 2; }

  Point point(Eigen::Index t, Eigen::Index n) const { return {xy_(t, 2 * n), xy_(t, 2 * n + 1)}; }
  void set_point(Eigen::Index t, Eigen::Index n, const Point& p) {
    xy_(t, 2 * n) = p.x();
    xy_(t, 2 * n + 1) = p.y();
  }
  Scalar& x(Eigen::Index t, Eigen::Index n) { return xy_(t, 2 * n); }
  Scalar& y(Eigen::Index t, Eigen::Index n) { return xy_(t, 2 * n + 1); }
  Scalar x(Eigen::Index t, Eigen::Index n) const { return xy_(t, 2 * n); }
  Scalar y(Eigen::Index t, Eigen::Index n) const { return xy_(t, 2 * n + 1); }

  /// Final-step positions as an N x 2 matrix.
  Eigen::Matrix<Scalar, Eigen::Dynamic, 2> last() const {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 2> out(agents(), 2);
    for (Eigen::Index n = 0; n < agents(); ++n) out.row(n) = point(steps() - 1, n).transpose();
    return out;
  }

  const Storage& raw() const { return xy_; }
  Storage& raw() { return xy_; }

  friend bool operator==(const PointSequence& a, const PointSequence& b) {
    return a.xy_.rows() == b.xy_.rows() && a.xy_.cols() == b.xy_.cols() && a.xy_ == b.xy_;
  }

 private:
  Storage xy_;
};

using Positions = PointSequence<double>;
using Anchor = Eigen::Matrix<double, Eigen::Dynamic, 2>;

enum class CoordMode { Absolute, Relative };

}  // namespace sttraj
