#pragma once

#include "sttraj/errors.hpp"

#include <Eigen/Core>

#include <cmath>
#include <numbers>

namespace sttraj::loss {

/// log N((x, y) | mu, diag(sigma) [[1, rho], [rho, 1]] diag(sigma)).
template <typename Scalar>
Scalar bigauss_log_density(const Eigen::Matrix<Scalar, 2, 1>& point,
                           const Eigen::Matrix<Scalar, 2, 1>& mu,
                           const Eigen::Matrix<Scalar, 2, 1>& sigma, Scalar rho) {
  using std::abs;
  using std::log;
  if (!(sigma.x() > Scalar(0)) || !(sigma.y() > Scalar(0))) {
    throw DomainError("bigauss_density: sigma must be positive");
  }
  if (!(abs(rho) < Scalar(1))) throw DomainError("bigauss_density: |rho| must be below 1");
  const Scalar zx = (point.x() - mu.x()) / sigma.x();
  const Scalar zy = (point.y() - mu.y()) / sigma.y();
  const Scalar one_minus = Scalar(1) - rho * rho;
  const Scalar z = zx * zx + zy * zy - Scalar(2) * rho * zx * zy;
  return -log(Scalar(2) * std::numbers::pi_v<Scalar> * sigma.x() * sigma.y()) -
         Scalar(0.5) * log(one_minus) - z / (Scalar(2) * one_minus);
}

template <typename Scalar>
Scalar bigauss_density(const Eigen::Matrix<Scalar, 2, 1>& point,
                       const Eigen::Matrix<Scalar, 2, 1>& mu,
                       const Eigen::Matrix<Scalar, 2, 1>& sigma, Scalar rho) {
  using std::exp;
  using std::sqrt;
  if (!(sigma.x() > Scalar(0)) || !(sigma.y() > Scalar(0))) {
    throw DomainError("bigauss_density: sigma must be positive");
  }
  if (!(std::abs(rho) < Scalar(1))) throw DomainError("bigauss_density: |rho| must be below 1");
  const Scalar zx = (point.x() - mu.x()) / sigma.x();
  const Scalar zy = (point.y() - mu.y()) / sigma.y();
  const Scalar one_minus = Scalar(1) - rho * rho;
  const Scalar z = zx * zx + zy * zy - Scalar(2) * rho * zx * zy;
  return exp(-z / (Scalar(2) * one_minus)) /
         (Scalar(2) * std::numbers::pi_v<Scalar> * sigma.x() * sigma.y() * sqrt(one_minus));
}

}  // namespace sttraj::loss
