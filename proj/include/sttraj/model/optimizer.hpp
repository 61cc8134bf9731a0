#pragma once

#include "sttraj/autodiff/tensor.hpp"

#include <Eigen/Core>

#include <vector>

namespace sttraj::model {

/// Classic momentum: v <- m v + g; p <- p - lr v.
template <typename Derived, typename GradDerived, typename VelDerived>
void sgd_update(Eigen::MatrixBase<Derived>& param, const Eigen::MatrixBase<GradDerived>& grad,
                Eigen::MatrixBase<VelDerived>& velocity, double lr, double momentum) {
  velocity = momentum * velocity + grad;
  param -= lr * velocity;
}

struct SgdState {
  std::vector<ad::Vector> velocity;  // one per parameter, lazily sized
};

/// Applies sgd_update to each parameter using its accumulated gradient.
void sgd_step(const std::vector<ad::Tensor>& params, SgdState& state, double lr, double momentum);

/// Scales all gradients so their joint L2 norm is at most `max_norm`.
/// Returns the norm before scaling. Does nothing for max_norm <= 0.
double clip_grad_norm(const std::vector<ad::Tensor>& params, double max_norm);

}  // namespace sttraj::model
