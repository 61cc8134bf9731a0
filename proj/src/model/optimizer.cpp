#include "sttraj/model/optimizer.hpp"

#include "sttraj/errors.hpp"

#include <cmath>

namespace sttraj::model {

void sgd_step(const std::vector<ad::Tensor>& params, SgdState& state, double lr, double momentum) {
  if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
  if (state.velocity.size() != params.size()) state.velocity.resize(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    ad::Tensor p = params[i];
    ad::Vector& v = state.velocity[i];
    if (v.size() != p.size()) v = ad::Vector::Zero(p.size());
    const ad::Vector g = p.grad();
    sgd_update(p.mutable_value(), g, v, lr, momentum);
  }
}

double clip_grad_norm(const std::vector<ad::Tensor>& params, double max_norm) {
  double sq = 0.0;
  for (const auto& p : params) {
    if (p.has_grad()) sq += p.node()->grad.squaredNorm();
  }
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / norm;
    for (const auto& p : params) {
      if (p.has_grad()) p.node()->grad *= scale;
    }
  }
  return norm;
}

}  // namespace sttraj::model
