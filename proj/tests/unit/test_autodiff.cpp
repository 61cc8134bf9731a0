#include <doctest.h>

#include "sttraj/autodiff/grad_check.hpp"
#include "sttraj/autodiff/ops.hpp"
#include "sttraj/autodiff/tape.hpp"
#include "sttraj/errors.hpp"

#include "../support.hpp"

#include <cmath>

using namespace sttraj;
using namespace sttraj::ad;
using sttraj::test::random_constant;
using sttraj::test::random_parameter;

namespace {

// Contracts a tensor to a scalar with fixed random weights so that every
// output coordinate influences the result.
Tensor weighted_sum(const Tensor& t, std::uint64_t seed = 99) {
  CounterRng rng(seed);
  return sum(t * random_constant(t.shape(), rng));
}

void check_unary(const std::function<Tensor(const Tensor&)>& op, double lo, double hi,
                 double tol = 1e-5) {
  const std::vector<Shape> shapes{{4}, {3, 2}, {2, 3, 4}};
  CounterRng rng(1);
  for (const auto& shape : shapes) {
    const Tensor x = random_parameter(shape, rng, lo, hi);
    const double err = grad_check([&](const Tensor& v) { return weighted_sum(op(v)); }, x);
    CHECK_MESSAGE(err < tol, "shape " << to_string(shape) << " error " << err);
  }
}

}  // namespace

TEST_SUITE("autodiff") {

TEST_CASE("matmul examples") {
  const Tensor eye = Tensor::constant({2, 2}, {1, 0, 0, 1});
  const Tensor m = Tensor::constant({2, 2}, {1, 2, 3, 4});
  CHECK(matmul(eye, m).value() == m.value());

  const Tensor p = Tensor::constant({2, 2}, {1, 0, 0, 0});
  const Tensor v = Tensor::constant({2, 1}, {5, 7});
  const Tensor pv = matmul(p, v);
  CHECK(pv.shape() == Shape{2, 1});
  CHECK(pv.at({0, 0}) == 5.0);
  CHECK(pv.at({1, 0}) == 0.0);
}

TEST_CASE("matmul matches triple loop") {
  CounterRng rng(7);
  const Tensor a = random_constant({3, 4}, rng);
  const Tensor b = random_constant({4, 2}, rng);
  const Tensor c = matmul(a, b);
  for (Index i = 0; i < 3; ++i) {
    for (Index j = 0; j < 2; ++j) {
      double s = 0.0;
      for (Index k = 0; k < 4; ++k) s += a.value()[i * 4 + k] * b.value()[k * 2 + j];
      CHECK(std::abs(c.at({i, j}) - s) < 1e-12);
    }
  }
}

TEST_CASE("matmul shape mismatch names both shapes") {
  const Tensor a = Tensor::zeros({2, 3});
  const Tensor b = Tensor::zeros({2, 3});
  try {
    matmul(a, b);
    FAIL("expected DimensionError");
  } catch (const DimensionError& e) {
    const std::string what = e.what();
    CHECK(what.find("[2x3]") != std::string::npos);
  }
}

TEST_CASE("softmax examples") {
  const Tensor u = softmax_lastdim(Tensor::constant({3}, {0, 0, 0}));
  for (Index i = 0; i < 3; ++i) CHECK(u.value()[i] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  const Tensor s = softmax_lastdim(Tensor::constant({3}, {1, 2, 3}));
  const double z = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(s.value()[i] - std::exp(i + 1.0) / z) < 1e-12);
  CHECK(std::abs(s.value()[0] - 0.09003) < 1e-5);
  CHECK(std::abs(s.value()[1] - 0.24473) < 1e-5);
  CHECK(std::abs(s.value()[2] - 0.66524) < 1e-5);

  CHECK(softmax_lastdim(Tensor::constant({1}, {-42.0})).item() == 1.0);
}

TEST_CASE("softmax rows are distributions") {
  CounterRng rng(3);
  const Tensor s = softmax_lastdim(random_constant({5, 7}, rng, -30, 30));
  const auto m = s.matrix();
  for (Index r = 0; r < m.rows(); ++r) {
    CHECK(std::abs(m.row(r).sum() - 1.0) < 1e-9);
    CHECK(m.row(r).minCoeff() >= 0.0);
    CHECK(m.row(r).maxCoeff() <= 1.0);
  }
}

TEST_CASE("softmax rejects non-finite input") {
  CHECK_THROWS_AS(softmax_lastdim(Tensor::constant({2}, {0.0, std::nan("")})), ValidationError);
  CHECK_THROWS_AS(softmax_lastdim(Tensor::constant({2}, {0.0, INFINITY})), ValidationError);
}

TEST_CASE("prelu examples") {
  const Tensor slope = Tensor::scalar(0.25);
  CHECK(prelu(Tensor::scalar(3.0), slope).item() == 3.0);
  CHECK(prelu(Tensor::scalar(-4.0), slope).item() == -1.0);
  CHECK(prelu(Tensor::scalar(0.0), Tensor::scalar(7.0)).item() == 0.0);
}

TEST_CASE("prelu slope receives gradient") {
  Tensor slope = Tensor::parameter({}, Vector::Constant(1, 0.25));
  Tensor x = Tensor::parameter({3}, (Vector(3) << -2.0, 1.0, -0.5).finished());
  Tape tape;
  {
    Tape::Scope scope(tape);
    tape.backward(sum(prelu(x, slope)));
  }
  CHECK(slope.grad()[0] == doctest::Approx(-2.5));
  CHECK(x.grad()[0] == 0.25);
  CHECK(x.grad()[1] == 1.0);
}

TEST_CASE("conv_over_time examples") {
  CounterRng rng(11);
  const Tensor x = random_constant({2, 5, 3}, rng);

  Tensor identity = Tensor::zeros({2, 2, 1});
  identity.mutable_value()[0] = 1.0;  // out 0 <- in 0
  identity.mutable_value()[3] = 1.0;  // out 1 <- in 1
  CHECK(conv_over_time(x, identity, Tensor::zeros({2})).value() == x.value());

  const Tensor bias = Tensor::constant({3}, {0.5, -1.0, 2.0});
  const Tensor y = conv_over_time(Tensor::zeros({2, 5, 3}), random_constant({3, 2, 3}, rng), bias);
  for (Index c = 0; c < 3; ++c) {
    for (Index l = 0; l < 5; ++l) {
      for (Index n = 0; n < 3; ++n) CHECK(y.at({c, l, n}) == bias.value()[c]);
    }
  }

  CHECK_THROWS_AS(conv_over_time(x, Tensor::zeros({2, 2, 2}), Tensor::zeros({2})), ConfigError);
}

TEST_CASE("conv_over_time matches nested loops") {
  CounterRng rng(12);
  const Index cin = 2, len = 5, n = 3, cout = 4, k = 3;
  const Tensor x = random_constant({cin, len, n}, rng);
  const Tensor w = random_constant({cout, cin, k}, rng);
  const Tensor b = random_constant({cout}, rng);
  const Tensor y = conv_over_time(x, w, b);
  for (Index co = 0; co < cout; ++co) {
    for (Index l = 0; l < len; ++l) {
      for (Index p = 0; p < n; ++p) {
        double s = b.value()[co];
        for (Index ci = 0; ci < cin; ++ci) {
          for (Index j = 0; j < k; ++j) {
            const Index src = l + j - k / 2;
            if (src < 0 || src >= len) continue;
            s += w.at({co, ci, j}) * x.at({ci, src, p});
          }
        }
        CHECK(std::abs(y.at({co, l, p}) - s) < 1e-12);
      }
    }
  }
}

TEST_CASE("backward requires a scalar recorded loss") {
  Tensor x = Tensor::parameter({2}, Vector::Ones(2));
  Tape tape;
  Tape::Scope scope(tape);
  CHECK_THROWS_AS(tape.backward(x * 2.0), ContractError);
}

TEST_CASE("leaf gradients accumulate until reset") {
  Tensor x = Tensor::parameter({3}, Vector::LinSpaced(3, 1.0, 3.0));
  for (int pass = 1; pass <= 2; ++pass) {
    Tape tape;
    Tape::Scope scope(tape);
    tape.backward(sum(square(x)));
    CHECK(x.grad().isApprox(2.0 * pass * x.value()));
  }
  zero_grads({x});
  CHECK(x.grad().isZero(0.0));
}

TEST_CASE("gradient additivity") {
  CounterRng rng(5);
  Tensor x = random_parameter({2, 3}, rng);
  auto f1 = [&] { return sum(exp(x)); };
  auto f2 = [&] { return weighted_sum(tanh(x)); };

  Vector separate = Vector::Zero(6);
  for (const auto& f : {std::function<Tensor()>(f1), std::function<Tensor()>(f2)}) {
    x.zero_grad();
    Tape tape;
    Tape::Scope scope(tape);
    tape.backward(f());
    separate += x.grad();
  }
  x.zero_grad();
  Tape tape;
  Tape::Scope scope(tape);
  tape.backward(f1() + f2());
  CHECK((x.grad() - separate).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("no active tape computes values only") {
  Tensor x = Tensor::parameter({2}, Vector::Ones(2));
  const Tensor y = sum(x * 3.0);
  CHECK(y.item() == 6.0);
  CHECK(Tape::current() == nullptr);
}

TEST_CASE("grad_check examples") {
  CounterRng rng(2);
  const Tensor x = random_parameter({5}, rng);
  CHECK(grad_check([](const Tensor& v) { return sum(v); }, x) < 1e-9);

  Tape tape;
  {
    Tape::Scope scope(tape);
    Tensor y = x;
    y.zero_grad();
    tape.backward(sum(softmax_lastdim(y)));
  }
  CHECK(x.grad().cwiseAbs().maxCoeff() < 1e-12);
  CHECK(grad_check([](const Tensor& v) { return sum(softmax_lastdim(v)); }, x) < 1e-9);

  CHECK_THROWS_AS(grad_check([](const Tensor& v) { return sum(v); }, x, 1e-3), ContractError);
  CHECK_THROWS_AS(grad_check([](const Tensor& v) { return sum(v); }, x, 1e-9), ContractError);
}

TEST_CASE("elementwise primitives pass gradient checks") {
  check_unary([](const Tensor& v) { return exp(v); }, -2, 2);
  check_unary([](const Tensor& v) { return log(v); }, 0.5, 3);
  check_unary([](const Tensor& v) { return tanh(v); }, -2, 2);
  check_unary([](const Tensor& v) { return sqrt(v); }, 0.5, 3);
  check_unary([](const Tensor& v) { return square(v); }, -2, 2);
  check_unary([](const Tensor& v) { return -v; }, -2, 2);
  check_unary([](const Tensor& v) { return 2.5 * v + 1.0; }, -2, 2);
  check_unary([](const Tensor& v) { return 1.0 - v * 0.5; }, -2, 2);
  check_unary([](const Tensor& v) { return v - 3.0; }, -2, 2);
  check_unary([](const Tensor& v) { return softmax_lastdim(v); }, -3, 3);
  check_unary([](const Tensor& v) { return clamp(v, -1.0, 1.5); }, -2, 2);
  CounterRng rng(2);
  const Tensor m = random_parameter({3, 2, 2}, rng);
  CHECK(grad_check([](const Tensor& v) { return weighted_sum(add_diagonal(v, 0.5)); }, m) < 1e-5);
}

TEST_CASE("clamp examples") {
  const Tensor x = Tensor::parameter({4}, (ad::Vector(4) << -3.0, -0.5, 0.5, 3.0).finished());
  Tape tape;
  Tape::Scope scope(tape);
  const Tensor y = clamp(x, -1.0, 1.0);
  CHECK(y.value() == (ad::Vector(4) << -1.0, -0.5, 0.5, 1.0).finished());
  tape.backward(sum(y));
  CHECK(x.grad() == (ad::Vector(4) << 0.0, 1.0, 1.0, 0.0).finished());
  CHECK_THROWS_AS(clamp(x, 1.0, -1.0), ContractError);
}

TEST_CASE("binary primitives pass gradient checks") {
  CounterRng rng(21);
  for (const Shape& shape : {Shape{4}, Shape{2, 3}, Shape{2, 2, 3}}) {
    const Tensor a = random_parameter(shape, rng);
    const Tensor b = random_parameter(shape, rng, 0.5, 2.0);
    const std::vector<Tensor> in{a, b};
    CHECK(grad_check([&] { return weighted_sum(a + b); }, in).max_relative_error < 1e-5);
    CHECK(grad_check([&] { return weighted_sum(a - b); }, in).max_relative_error < 1e-5);
    CHECK(grad_check([&] { return weighted_sum(a * b); }, in).max_relative_error < 1e-5);
    CHECK(grad_check([&] { return weighted_sum(a / b); }, in).max_relative_error < 1e-5);
  }
}

TEST_CASE("prelu passes gradient checks on both sides") {
  CounterRng rng(22);
  for (const Shape& shape : {Shape{6}, Shape{3, 4}, Shape{2, 2, 5}}) {
    Tensor x = random_parameter(shape, rng);
    // Keep inputs away from the kink.
    for (auto& v : x.mutable_value()) v += v >= 0.0 ? 0.1 : -0.1;
    const Tensor slope = Tensor::parameter({}, Vector::Constant(1, 0.3));
    CHECK(grad_check([&] { return weighted_sum(prelu(x, slope)); }, {x, slope}).max_relative_error < 1e-5);
  }
}

TEST_CASE("linear algebra primitives pass gradient checks") {
  CounterRng rng(23);
  for (Index m : {1, 2, 4}) {
    const Tensor a = random_parameter({m, 3}, rng);
    const Tensor b = random_parameter({3, 2}, rng);
    CHECK(grad_check([&] { return weighted_sum(matmul(a, b)); }, {a, b}).max_relative_error < 1e-5);

    const Tensor ba = random_parameter({m, 2, 3}, rng);
    const Tensor bb = random_parameter({m, 3, 4}, rng);
    CHECK(grad_check([&] { return weighted_sum(bmm(ba, bb)); }, {ba, bb}).max_relative_error < 1e-5);

    const Tensor x = random_parameter({m, 2, 3}, rng);
    const Tensor w = random_parameter({3, 5}, rng);
    const Tensor bias = random_parameter({5}, rng);
    CHECK(grad_check([&] { return weighted_sum(linear(x, w, bias)); }, {x, w, bias}).max_relative_error < 1e-5);
    CHECK(grad_check([&] { return weighted_sum(add_bias(x, slice(bias, 0, 0, 3))); }, {x, bias})
              .max_relative_error < 1e-5);

    const Tensor d = random_parameter({m, 3}, rng);
    CHECK(grad_check([&] { return weighted_sum(outer_lastdim(d)); }, {d}).max_relative_error < 1e-5);

    const Tensor p = random_parameter({m + 1, 2}, rng);
    const Tensor q = random_parameter({3, 2}, rng);
    CHECK(grad_check([&] { return weighted_sum(pairwise_sqdist(p, q)); }, {p, q}).max_relative_error < 1e-5);
  }
}

TEST_CASE("shape primitives pass gradient checks") {
  CounterRng rng(24);
  for (const Shape& shape : {Shape{2, 3, 4}, Shape{1, 2, 2}, Shape{3, 1, 5}}) {
    const Tensor x = random_parameter(shape, rng);
    CHECK(grad_check([&] { return weighted_sum(permute(x, {2, 0, 1})); }, {x}).max_relative_error < 1e-5);
    CHECK(grad_check([&] { return weighted_sum(transpose(x)); }, {x}).max_relative_error < 1e-5);
    CHECK(grad_check([&] { return weighted_sum(reshape(x, {x.size()})); }, {x}).max_relative_error < 1e-5);
    CHECK(grad_check([&] { return weighted_sum(slice(x, 2, 0, 1)); }, {x}).max_relative_error < 1e-5);
    CHECK(grad_check([&] { return weighted_sum(tile(x, 3)); }, {x}).max_relative_error < 1e-5);
    CHECK(grad_check([&] { return weighted_sum(stack_lastdim({x, exp(x)})); }, {x}).max_relative_error < 1e-5);
    CHECK(grad_check([&] { return mean(square(x)); }, {x}).max_relative_error < 1e-5);
    for (Index axis = 0; axis < 3; ++axis) {
      CHECK(grad_check([&] { return weighted_sum(sum_axis(x, axis)); }, {x}).max_relative_error < 1e-5);
    }
  }
}

TEST_CASE("conv_over_time passes gradient checks") {
  CounterRng rng(25);
  for (Index k : {1, 3, 5}) {
    const Tensor x = random_parameter({2, 5, 3}, rng);
    const Tensor w = random_parameter({4, 2, k}, rng);
    const Tensor b = random_parameter({4}, rng);
    CHECK(grad_check([&] { return weighted_sum(conv_over_time(x, w, b)); }, {x, w, b}).max_relative_error < 1e-5);
  }
}

TEST_CASE("operations are bitwise deterministic") {
  CounterRng rng(26);
  const Tensor x = random_constant({3, 4}, rng);
  const Tensor w = random_constant({4, 4}, rng);
  auto f = [&] { return softmax_lastdim(matmul(tanh(x), w)); };
  CHECK(f().value() == f().value());
}

}  // TEST_SUITE
