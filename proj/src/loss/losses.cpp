#include "sttraj/loss/losses.hpp"

#include "sttraj/autodiff/ops.hpp"
#include "sttraj/errors.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace sttraj::loss {

using ad::Tensor;

void LossConfig::validate() const {
  if (!(alpha >= 0.0)) throw ConfigError("alpha must be non-negative");
  if (mmd_bandwidths.empty()) throw ConfigError("at least one MMD bandwidth is required");
  for (double b : mmd_bandwidths) {
    if (!(b > 0.0)) throw ConfigError("MMD bandwidths must be positive");
  }
  if (mmd_sample_count < 1) throw ConfigError("mmd_sample_count must be at least 1");
}

namespace {

struct Target {
  Tensor x, y;  // [T x N]
};

Target split_target(const Tensor& future, const decoder::GaussianField& field) {
  if (future.rank() != 3 || future.dim(0) != 2 || future.dim(1) != field.steps() ||
      future.dim(2) != field.agents()) {
    throw DimensionError("loss: future " + ad::to_string(future.shape()) +
                         " does not match field of " + std::to_string(field.steps()) + " x " +
                         std::to_string(field.agents()));
  }
  const auto t = field.steps(), n = field.agents();
  return {ad::reshape(ad::slice(future, 0, 0, 1), {t, n}),
          ad::reshape(ad::slice(future, 0, 1, 2), {t, n})};
}

}  // namespace

Tensor nll_loss(const decoder::GaussianField& field, const Tensor& future) {
  const Target gt = split_target(future, field);
  const Tensor zx = (gt.x - field.mu_x) / field.sigma_x;
  const Tensor zy = (gt.y - field.mu_y) / field.sigma_y;
  const Tensor one_minus = 1.0 - ad::square(field.rho);
  const Tensor z = ad::square(zx) + ad::square(zy) - 2.0 * (field.rho * zx * zy);
  const Tensor terms = (ad::log(field.sigma_x) + ad::log(field.sigma_y) + 0.5 * ad::log(one_minus) +
                        0.5 * (z / one_minus)) +
                       std::log(2.0 * std::numbers::pi);
  return ad::sum(terms) * (1.0 / static_cast<double>(field.agents()));
}

Tensor mmd_loss(const Tensor& x, const Tensor& y, const std::vector<double>& bandwidths) {
  if (x.rank() != 2 || y.rank() != 2 || x.dim(0) < 1 || y.dim(0) < 1) {
    throw ContractError("mmd_loss: both samples must be non-empty [count x d] blocks");
  }
  if (x.dim(1) != y.dim(1)) {
    throw DimensionError("mmd_loss: sample widths differ (" + ad::to_string(x.shape()) + " vs " +
                         ad::to_string(y.shape()) + ")");
  }
  if (bandwidths.empty()) throw ContractError("mmd_loss: no bandwidths");
  auto kernel_mean = [&](const Tensor& a, const Tensor& b) {
    const Tensor d = ad::pairwise_sqdist(a, b);
    Tensor acc;
    for (double s : bandwidths) {
      const Tensor k = ad::mean(ad::exp(d * (-1.0 / (2.0 * s * s))));
      acc = acc.defined() ? acc + k : k;
    }
    return acc;
  };
  return kernel_mean(x, x) + kernel_mean(y, y) - 2.0 * kernel_mean(x, y);
}

LossTerms total_loss(const decoder::GaussianField& field, const Tensor& future,
                     const LossConfig& config, CounterRng rng) {
  config.validate();
  const Target gt = split_target(future, field);
  const Tensor nll = nll_loss(field, future);

  const auto t = field.steps(), n = field.agents();
  const auto draws = static_cast<ad::Index>(config.mmd_sample_count);
  ad::Vector e1(draws * t * n), e2(draws * t * n);
  std::normal_distribution<double> normal;
  for (ad::Index i = 0; i < e1.size(); ++i) {
    e1[i] = normal(rng);
    e2[i] = normal(rng);
  }
  const Tensor eps1 = Tensor::constant({draws, t, n}, std::move(e1));
  const Tensor eps2 = Tensor::constant({draws, t, n}, std::move(e2));
  const Tensor rho = ad::tile(field.rho, draws);
  const Tensor sx = ad::tile(field.mu_x, draws) + ad::tile(field.sigma_x, draws) * eps1;
  const Tensor sy = ad::tile(field.mu_y, draws) +
                    ad::tile(field.sigma_y, draws) * (rho * eps1 + ad::sqrt(1.0 - ad::square(rho)) * eps2);
  const Tensor predicted = ad::reshape(ad::stack_lastdim({sx, sy}), {draws * t * n, 2});
  const Tensor observed = ad::reshape(ad::stack_lastdim({gt.x, gt.y}), {t * n, 2});
  const Tensor mmd = mmd_loss(observed, predicted, config.mmd_bandwidths);

  const Tensor total = config.alpha == 0.0 ? nll : nll + config.alpha * mmd;
  return {nll, mmd, total};
}

}  // namespace sttraj::loss
