#include <doctest.h>

#include "sttraj/autodiff/grad_check.hpp"
#include "sttraj/autodiff/ops.hpp"
#include "sttraj/errors.hpp"
#include "sttraj/loss/density.hpp"
#include "sttraj/loss/losses.hpp"
#include "sttraj/loss/metrics.hpp"
#include "sttraj/loss/sampling.hpp"

#include "../support.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

using namespace sttraj;
using namespace sttraj::loss;
using ad::Index;
using ad::Tensor;
using Eigen::Vector2d;
using sttraj::test::random_constant;
using sttraj::test::random_parameter;

namespace {

double univariate(double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

double midpoint_mass(double rho) {
  const Vector2d mu(0.3, -1.2), sigma(0.7, 1.9);
  const int cells = 201;
  const double hx = 12.0 * sigma.x() / cells, hy = 12.0 * sigma.y() / cells;
  double mass = 0.0;
  for (int i = 0; i < cells; ++i) {
    for (int j = 0; j < cells; ++j) {
      const Vector2d p(mu.x() - 6.0 * sigma.x() + (i + 0.5) * hx, mu.y() - 6.0 * sigma.y() + (j + 0.5) * hy);
      mass += bigauss_density(p, mu, sigma, rho) * hx * hy;
    }
  }
  return mass;
}

// Field with raw channels filled from a [5 x T x N] tensor.
decoder::GaussianField field_from(const Tensor& raw) { return decoder::to_gaussian_field(raw); }

Tensor raw_field(Index steps, Index agents, double mx, double my, double sx, double sy, double r) {
  Tensor raw = Tensor::zeros({5, steps, agents});
  const double values[5] = {mx, my, std::log(sx), std::log(sy), std::atanh(r)};
  for (Index c = 0; c < 5; ++c) {
    for (Index i = 0; i < steps * agents; ++i) raw.mutable_value()[c * steps * agents + i] = values[c];
  }
  return raw;
}

Positions random_positions(Index steps, Index agents, CounterRng& rng, double scale = 1.0) {
  Positions p(steps, agents);
  for (Index t = 0; t < steps; ++t) {
    for (Index n = 0; n < agents; ++n) p.set_point(t, n, scale * Vector2d(2 * rng.uniform() - 1, 2 * rng.uniform() - 1));
  }
  return p;
}

}  // namespace

TEST_SUITE("loss") {

TEST_CASE("density examples") {
  const Vector2d zero(0, 0);
  CHECK(std::abs(bigauss_density(zero, zero, Vector2d(1, 1), 0.0) - 1.0 / (2.0 * std::numbers::pi)) < 1e-12);
  CHECK(std::abs(bigauss_density(zero, zero, Vector2d(2, 2), 0.0) - 1.0 / (8.0 * std::numbers::pi)) < 1e-12);
  CHECK(std::abs(bigauss_density(zero, zero, Vector2d(1, 1), 0.0) - 0.1591549) < 1e-7);
  CHECK(std::abs(bigauss_density(zero, zero, Vector2d(2, 2), 0.0) - 0.0397887) < 1e-7);

  CounterRng rng(1);
  for (int i = 0; i < 20; ++i) {
    const Vector2d p(3 * rng.uniform() - 1.5, 3 * rng.uniform() - 1.5);
    const Vector2d mu(rng.uniform(), -rng.uniform());
    const Vector2d sigma(0.2 + rng.uniform(), 0.2 + rng.uniform());
    const double ref = univariate(p.x(), mu.x(), sigma.x()) * univariate(p.y(), mu.y(), sigma.y());
    CHECK(std::abs(bigauss_density(p, mu, sigma, 0.0) - ref) < 1e-12);
    CHECK(std::abs(std::exp(bigauss_log_density(p, mu, sigma, 0.3)) - bigauss_density(p, mu, sigma, 0.3)) < 1e-12);
  }
}

TEST_CASE("density domain errors") {
  const Vector2d zero(0, 0);
  CHECK_THROWS_AS(bigauss_density(zero, zero, Vector2d(1, 1), 1.0), DomainError);
  CHECK_THROWS_AS(bigauss_density(zero, zero, Vector2d(0, 1), 0.0), DomainError);
  CHECK_THROWS_AS(bigauss_log_density(zero, zero, Vector2d(1, -1), 0.0), DomainError);
}

TEST_CASE("density integrates to one") {
  for (double rho : {0.0, 0.5, -0.9}) CHECK(std::abs(midpoint_mass(rho) - 1.0) < 1e-3);
}

TEST_CASE("density works with float scalars") {
  const Eigen::Vector2f zero(0, 0);
  CHECK(std::abs(bigauss_density<float>(zero, zero, Eigen::Vector2f(1, 1), 0.0f) - 0.1591549f) < 1e-6f);
}

TEST_CASE("nll examples") {
  // Centered on the ground truth with unit sigma: every term is log(2 pi).
  const Tensor future = Tensor::full({2, 12, 1}, 0.4);
  const auto field = field_from(raw_field(12, 1, 0.4, 0.4, 1.0, 1.0, 0.0));
  CHECK(std::abs(nll_loss(field, future).item() - 12.0 * std::log(2.0 * std::numbers::pi)) < 1e-12);
  CHECK(std::abs(std::log(2.0 * std::numbers::pi) - 1.8379) < 1e-4);

  // Moving one point away from the mean increases the loss.
  double previous = nll_loss(field, future).item();
  for (double shift : {0.1, 0.5, 1.0, 3.0}) {
    Tensor moved = future.clone();
    moved.mutable_value()[5] += shift;
    const double now = nll_loss(field, moved).item();
    CHECK(now > previous);
    previous = now;
  }
}

TEST_CASE("nll matches loop oracle") {
  CounterRng rng(2);
  Tensor raw = random_constant({5, 12, 2}, rng);
  const Tensor future = random_constant({2, 12, 2}, rng);
  const auto field = field_from(raw);
  double ref = 0.0;
  for (Index t = 0; t < 12; ++t) {
    for (Index n = 0; n < 2; ++n) {
      const Vector2d p(future.at({0, t, n}), future.at({1, t, n}));
      const Vector2d mu(raw.at({0, t, n}), raw.at({1, t, n}));
      const Vector2d sigma(std::exp(raw.at({2, t, n})), std::exp(raw.at({3, t, n})));
      ref -= bigauss_log_density(p, mu, sigma, std::tanh(raw.at({4, t, n})));
    }
  }
  CHECK(std::abs(nll_loss(field, future).item() - ref / 2.0) < 1e-12);
}

TEST_CASE("nll passes gradient check") {
  CounterRng rng(3);
  const Tensor raw = random_parameter({5, 12, 2}, rng);
  const Tensor future = random_constant({2, 12, 2}, rng);
  CHECK(ad::grad_check([&](const Tensor& r) { return nll_loss(field_from(r), future); }, raw) < 1e-5);
}

TEST_CASE("mmd examples") {
  CounterRng rng(4);
  const Tensor x = random_constant({6, 2}, rng);
  CHECK(std::abs(mmd_loss(x, x, {0.25, 1.0}).item()) < 1e-12);

  const Tensor a = Tensor::constant({1, 2}, {0.0, 0.0});
  const Tensor b = Tensor::constant({1, 2}, {1000.0, 0.0});
  CHECK(std::abs(mmd_loss(a, b, {1.0}).item() - 2.0) < 1e-6);

  CHECK_THROWS_AS(mmd_loss(Tensor::zeros({0, 2}), x, {1.0}), ContractError);
}

TEST_CASE("mmd is symmetric and nonnegative") {
  CounterRng rng(5);
  const std::vector<double> bw{0.25, 0.5, 1.0, 2.0, 4.0};
  for (int i = 0; i < 100; ++i) {
    const Index m = 1 + static_cast<Index>(rng.uniform() * 8), l = 1 + static_cast<Index>(rng.uniform() * 8);
    const Tensor x = random_constant({m, 2}, rng, -3, 3);
    const Tensor y = random_constant({l, 2}, rng, -3, 3);
    const double xy = mmd_loss(x, y, bw).item();
    CHECK(xy >= -1e-12);
    CHECK(std::abs(xy - mmd_loss(y, x, bw).item()) < 1e-12);
  }
}

TEST_CASE("mmd matches closed form") {
  CounterRng rng(6);
  const Tensor x = random_constant({3, 2}, rng);
  const Tensor y = random_constant({4, 2}, rng);
  const std::vector<double> bw{0.5, 2.0};
  auto k = [&](const Tensor& p, Index i, const Tensor& q, Index j) {
    const double d2 = std::pow(p.at({i, 0}) - q.at({j, 0}), 2) + std::pow(p.at({i, 1}) - q.at({j, 1}), 2);
    double s = 0.0;
    for (double b : bw) s += std::exp(-d2 / (2 * b * b));
    return s;
  };
  double xx = 0, yy = 0, xy = 0;
  for (Index i = 0; i < 3; ++i) for (Index j = 0; j < 3; ++j) xx += k(x, i, x, j);
  for (Index i = 0; i < 4; ++i) for (Index j = 0; j < 4; ++j) yy += k(y, i, y, j);
  for (Index i = 0; i < 3; ++i) for (Index j = 0; j < 4; ++j) xy += k(x, i, y, j);
  const double ref = xx / 9 + yy / 16 - 2 * xy / 12;
  CHECK(std::abs(mmd_loss(x, y, bw).item() - ref) < 1e-12);

  const Tensor px = random_parameter({3, 2}, rng);
  CHECK(ad::grad_check([&](const Tensor& v) { return mmd_loss(v, y, bw); }, px) < 1e-5);
}

TEST_CASE("total loss weighting") {
  CounterRng rng(7);
  const Tensor raw = random_constant({5, 12, 3}, rng);
  const Tensor future = random_constant({2, 12, 3}, rng);
  const auto field = field_from(raw);
  LossConfig config;
  config.alpha = 0.0;
  const auto zero = total_loss(field, future, config, CounterRng(9));
  CHECK(zero.total.item() == nll_loss(field, future).item());

  config.alpha = 0.3;
  const auto base = total_loss(field, future, config, CounterRng(9));
  CHECK(std::abs(base.total.item() - (base.nll.item() + 0.3 * base.mmd.item())) < 1e-12);
  config.alpha = 0.6;
  const auto twice = total_loss(field, future, config, CounterRng(9));
  CHECK(std::abs((twice.total.item() - twice.nll.item()) - 2 * (base.total.item() - base.nll.item())) < 1e-12);

  config.alpha = -1.0;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config = LossConfig{};
  config.mmd_sample_count = 0;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config = LossConfig{};
  config.mmd_bandwidths = {1.0, 0.0};
  CHECK_THROWS_AS(config.validate(), ConfigError);
}

TEST_CASE("total loss passes gradient check") {
  CounterRng rng(8);
  const Tensor raw = random_parameter({5, 12, 2}, rng);
  const Tensor future = random_constant({2, 12, 2}, rng);
  const LossConfig config;
  CHECK(ad::grad_check([&](const Tensor& r) { return total_loss(field_from(r), future, config, CounterRng(3)).total; },
                       raw) < 1e-5);
}

TEST_CASE("sampling examples") {
  const auto field = field_from(raw_field(12, 2, 0.3, -0.2, 1e-9, 1e-9, 0.5));
  Anchor last(2, 2);
  last << 1.0, 2.0, -1.0, 0.0;
  const auto mean = mean_trajectory(field, last);
  CHECK(std::abs(mean.x(0, 0) - 1.3) < 1e-12);
  CHECK(std::abs(mean.y(11, 1) - (-0.2 * 12)) < 1e-12);
  for (const auto& s : sample_trajectories(field, 5, 1, last)) CHECK((s.raw() - mean.raw()).cwiseAbs().maxCoeff() < 1e-6);

  const auto wide = field_from(raw_field(12, 2, 0.3, -0.2, 0.5, 0.5, 0.0));
  const auto a = sample_trajectories(wide, 7, 42, last);
  const auto b = sample_trajectories(wide, 7, 42, last);
  REQUIRE(a.size() == 7);
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k] == b[k]);

  // Sample k does not depend on how many are drawn.
  const auto more = sample_trajectories(wide, 14, 42, last);
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k] == more[k]);

  CHECK_THROWS_AS(sample_trajectories(wide, 0, 1, last), ContractError);
  CHECK_THROWS_AS(sample_trajectories(wide, 1, 1, Anchor(3, 2)), DimensionError);
}

TEST_CASE("sampler recovers correlation") {
  const auto field = field_from(raw_field(1, 1, 0.0, 0.0, 1.5, 0.5, 0.8));
  const auto draws = sample_trajectories(field, 100000, 11, Anchor::Zero(1, 2), CoordMode::Absolute);
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (const auto& d : draws) {
    const double x = d.x(0, 0), y = d.y(0, 0);
    sx += x;
    sy += y;
    sxx += x * x;
    syy += y * y;
    sxy += x * y;
  }
  const double n = static_cast<double>(draws.size());
  const double cov = sxy / n - sx * sy / (n * n);
  const double corr = cov / std::sqrt((sxx / n - sx * sx / (n * n)) * (syy / n - sy * sy / (n * n)));
  CHECK(std::abs(corr - 0.8) < 0.02);
  CHECK(std::abs(std::sqrt(sxx / n - sx * sx / (n * n)) - 1.5) < 0.03);
}

TEST_CASE("metric examples") {
  CounterRng rng(9);
  const auto gt = random_positions(12, 3, rng);
  CHECK(ade(gt, gt) == 0.0);
  CHECK(fde(gt, gt) == 0.0);
  CHECK(var_ade(gt, gt) == 0.0);

  Positions off = gt;
  off.raw().rowwise() += Eigen::RowVectorXd::NullaryExpr(6, [](Index i) { return i % 2 == 0 ? 3.0 : 4.0; });
  CHECK(ade(off, gt) == 5.0);
  CHECK(fde(off, gt) == 5.0);
  CHECK(var_ade(off, gt) == 0.0);

  Positions one(12, 1), last(12, 1);
  last.y(11, 0) = 1.0;
  CHECK(ade(last, one) == doctest::Approx(1.0 / 12.0).epsilon(1e-15));
  CHECK(fde(last, one) == 1.0);

  Positions a(2, 1), b(2, 1);
  b.x(1, 0) = 2.0;
  CHECK(ade(a, b) == 1.0);
  CHECK(var_ade(a, b) == 1.0);

  CHECK_THROWS_AS(ade(Positions(12, 2), Positions(12, 3)), DimensionError);
}

TEST_CASE("metric identities and invariances") {
  CounterRng rng(10);
  for (int i = 0; i < 20; ++i) {
    const auto pred = random_positions(12, 4, rng, 3.0);
    const auto gt = random_positions(12, 4, rng, 3.0);
    const auto e = point_errors(pred, gt);
    const double a = ade(pred, gt), v = var_ade(pred, gt);
    CHECK(std::abs(v * v + a * a - e.array().square().mean()) < 1e-9);

    Positions tp = pred, tg = gt;
    tp.raw().array() += 7.5;
    tg.raw().array() += 7.5;
    CHECK(std::abs(ade(tp, tg) - a) < 1e-12);

    Positions sp = pred, sg = gt;
    sp.raw() *= 4.0;
    sg.raw() *= 4.0;
    CHECK(ade(sp, sg) == 4.0 * a);
    CHECK(fde(sp, sg) == 4.0 * fde(pred, gt));
    CHECK(std::abs(var_ade(sp, sg) - 4.0 * v) < 1e-12);
  }
}

TEST_CASE("best of K") {
  CounterRng rng(11);
  Anchor last = Anchor::Zero(2, 2);
  for (int i = 0; i < 50; ++i) {
    const auto field = field_from(random_constant({5, 12, 2}, rng, -1, 0.5));
    const auto gt = random_positions(12, 2, rng, 4.0);
    const std::uint64_t seed = 1000 + static_cast<std::uint64_t>(i);
    const auto k = best_of_k_metrics(field, gt, 10, seed, last);
    const auto k2 = best_of_k_metrics(field, gt, 20, seed, last);
    CHECK(k2.ade <= k.ade);
  }

  const auto field = field_from(random_constant({5, 12, 2}, rng));
  const auto gt = random_positions(12, 2, rng);
  const auto one = best_of_k_metrics(field, gt, 1, 5, last);
  const auto single = sample_trajectories(field, 1, 5, last).front();
  CHECK(one.ade == ade(single, gt));
  CHECK(one.fde == fde(single, gt));
  CHECK(one.var_ade == var_ade(single, gt));
  CHECK(one.best_index == 0);

  const auto sharp = field_from(raw_field(12, 2, 0.1, 0.2, 1e-9, 1e-9, 0.0));
  const auto mu = mean_trajectory(sharp, last);
  for (int count : {1, 5, 20}) CHECK(std::abs(best_of_k_metrics(sharp, gt, count, 3, last).ade - ade(mu, gt)) < 1e-6);
}

TEST_CASE("scene pooling and reports") {
  SceneAccumulator acc;
  CHECK(acc.empty());
  Eigen::MatrixXd e1(2, 1), e2(2, 2);
  e1 << 0.0, 2.0;
  e2 << 1.0, 1.0, 1.0, 3.0;
  acc.add(e1);
  acc.add(e2);
  const auto m = acc.finish();
  CHECK(m.ade == doctest::Approx(8.0 / 6.0));
  CHECK(m.fde == doctest::Approx(2.0));
  CHECK(m.var_ade == doctest::Approx(std::sqrt((16.0 / 9 + 4.0 / 9 + 1.0 / 9 * 3 + 25.0 / 9) / 6)));

  std::map<std::string, SceneMetrics> scenes{{"ETH", {0.64, 1.11, 0.2}},
                                             {"HOTEL", {0.49, 0.85, 0.1}},
                                             {"UNIV", {0.44, 0.79, 0.3}},
                                             {"ZARA1", {0.34, 0.53, 0.2}},
                                             {"ZARA2", {0.30, 0.48, 0.2}}};
  const auto r = make_report(scenes);
  CHECK(std::abs(r.avg_ade - (0.64 + 0.49 + 0.44 + 0.34 + 0.30) / 5) < 1e-12);
  double var = 0.0;
  for (const auto& [k, v] : scenes) var += (v.ade - r.avg_ade) * (v.ade - r.avg_ade) / 5;
  CHECK(std::abs(r.cross_scene_var_ade - var) < 1e-15);

  std::ostringstream csv;
  write_metrics_csv(csv, r);
  std::istringstream lines(csv.str());
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(lines, line)) rows.push_back(line);
  REQUIRE(rows.size() == 8);
  CHECK(rows.front() == "scene,ade,fde,var_ade");
  CHECK(rows[1].rfind("ETH,0.64,1.11,", 0) == 0);
  CHECK(rows[6].rfind("AVG,", 0) == 0);
  CHECK(rows[7].rfind("Var,", 0) == 0);

  std::ostringstream table;
  table.precision(3);
  print_metrics_table(table, r);
  CHECK(table.precision() == 3);
  CHECK(table.str().find("ZARA2") != std::string::npos);
}

TEST_CASE("sample cloud export") {
  CounterRng rng(12);
  const auto field = field_from(random_constant({5, 12, 2}, rng));
  const auto observed = random_positions(8, 2, rng);
  const auto gt = random_positions(12, 2, rng);
  const auto samples = sample_trajectories(field, 3, 1, observed.last());
  std::ostringstream out;
  write_sample_cloud(out, samples, observed, gt, {4, 9});
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "sample_id,t,ped_id,x,y");
  int obs = 0, truth = 0, drawn = 0;
  while (std::getline(in, line)) {
    if (line.rfind("-1,", 0) == 0) ++obs;
    else if (line.rfind("-2,", 0) == 0) ++truth;
    else ++drawn;
  }
  CHECK(obs == 8 * 2);
  CHECK(truth == 12 * 2);
  CHECK(drawn == 3 * 12 * 2);
}

}  // TEST_SUITE
