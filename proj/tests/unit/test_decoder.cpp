#include <doctest.h>

#include <cmath>
#include <random>

#include "ndf4d/decoder.hpp"

using namespace ndf4d;

namespace {

// D=1, one hidden unit, K=1, weights 2 then 3, no bias.
Mlp tiny() {
  Mlp m(1, {1}, 1);
  m.layers()[0].weight.value(0, 0) = 2.0;
  m.layers()[1].weight.value(0, 0) = 3.0;
  return m;
}

double min_abs_preactivation(const Mlp& m, Eigen::VectorXd x) {
  double smallest = 1e300;
  for (std::size_t i = 0; i + 1 < m.layers().size(); ++i) {
    const Eigen::VectorXd z = m.layers()[i].weight.value * x + m.layers()[i].bias.value.col(0);
    smallest = std::min(smallest, z.cwiseAbs().minCoeff());
    x = z.cwiseMax(0.0);
  }
  return smallest;
}

}  // namespace

TEST_CASE("zero parameters give zero output") {
  const Mlp m(8, {64, 64}, 32);
  CHECK(m.forward_one(Eigen::VectorXd::Constant(8, 3.0)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(m.parameter_count() == 8 * 64 + 64 + 64 * 64 + 64 + 64 * 32 + 32);
}

TEST_CASE("hand-computed tiny network") {
  const Mlp m = tiny();
  CHECK(m.forward_one(Eigen::VectorXd::Constant(1, 1.0))(0) == 6.0);
  CHECK(m.forward_one(Eigen::VectorXd::Constant(1, -1.0))(0) == 0.0);

  Mlp g = tiny();
  MlpTape tape;
  g.forward(Eigen::MatrixXd::Constant(1, 1, 1.0), &tape);
  const auto d = g.backward(tape, Eigen::MatrixXd::Constant(1, 1, 1.0));
  CHECK(d(0, 0) == 6.0);
  CHECK(g.layers()[1].weight.grad(0, 0) == 2.0);  // hidden activation
  CHECK(g.layers()[0].weight.grad(0, 0) == 3.0);
}

TEST_CASE("zero upstream gives zero gradients") {
  Mlp m = Mlp::glorot(4, {8, 8}, 3, 1);
  MlpTape tape;
  m.forward(Eigen::MatrixXd::Random(4, 5), &tape);
  const auto d = m.backward(tape, Eigen::MatrixXd::Zero(3, 5));
  CHECK(d.cwiseAbs().maxCoeff() == 0.0);
  for (const auto& l : m.layers()) {
    CHECK(l.weight.grad.cwiseAbs().maxCoeff() == 0.0);
    CHECK(l.bias.grad.cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("glorot init: bounds, zero biases, determinism") {
  const Mlp a = Mlp::glorot(8, {64, 64}, 32, 42);
  const Mlp b = Mlp::glorot(8, {64, 64}, 32, 42);
  const Mlp c = Mlp::glorot(8, {64, 64}, 32, 43);
  for (std::size_t i = 0; i < a.layers().size(); ++i) {
    const auto& w = a.layers()[i].weight.value;
    const double bound = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    CHECK(w.cwiseAbs().maxCoeff() <= bound);
    CHECK(a.layers()[i].bias.value.cwiseAbs().maxCoeff() == 0.0);
    CHECK(w == b.layers()[i].weight.value);
  }
  CHECK(a.layers()[0].weight.value != c.layers()[0].weight.value);
}

TEST_CASE("backward matches central differences on 100 random triples") {
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> u(-1, 1);
  int trials = 0;
  while (trials < 100) {
    Mlp m = Mlp::glorot(5, {7, 6}, 3, rng());
    for (auto& l : m.layers()) {
      for (Eigen::Index i = 0; i < l.bias.value.rows(); ++i) l.bias.value(i, 0) = 0.3 * u(rng);
    }
    Eigen::VectorXd x(5);
    for (auto& v : x) v = u(rng);
    if (min_abs_preactivation(m, x) < 1e-4) continue;  // re-roll inputs on a ReLU kink
    Eigen::VectorXd up(3);
    for (auto& v : up) v = u(rng);
    ++trials;

    MlpTape tape;
    m.zero_grad();
    m.forward(x, &tape);
    const Eigen::VectorXd dx = m.backward(tape, up);
    auto objective = [&]() { return m.forward_one(x).dot(up); };
    const double h = 1e-5;
    auto near = [](double a, double n) { return std::abs(a - n) <= 1e-6 * std::max({std::abs(a), std::abs(n), 1e-4}); };

    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double saved = x(i);
      x(i) = saved + h;
      const double plus = objective();
      x(i) = saved - h;
      const double minus = objective();
      x(i) = saved;
      CHECK(near(dx(i), (plus - minus) / (2 * h)));
    }
    for (auto& l : m.layers()) {
      for (auto* block : {&l.weight, &l.bias}) {
        for (Eigen::Index j = 0; j < block->value.cols(); ++j) {
          for (Eigen::Index i = 0; i < block->value.rows(); ++i) {
            const double saved = block->value(i, j);
            block->value(i, j) = saved + h;
            const double plus = objective();
            block->value(i, j) = saved - h;
            const double minus = objective();
            block->value(i, j) = saved;
            CHECK(near(block->grad(i, j), (plus - minus) / (2 * h)));
          }
        }
      }
    }
  }
}

TEST_CASE("batched forward equals per-column forward") {
  const Mlp m = Mlp::glorot(8, {64, 64}, 4, 9);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(8, 37);
  const Eigen::MatrixXd y = m.forward(x);
  for (Eigen::Index c = 0; c < x.cols(); ++c) CHECK((y.col(c) - m.forward_one(x.col(c))).cwiseAbs().maxCoeff() < 1e-14);
  // Column order does not change results.
  const Eigen::MatrixXd reversed = x.rowwise().reverse();
  const Eigen::MatrixXd y2 = m.forward(reversed);
  CHECK((y2.rowwise().reverse() - y).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("gradient buffers add linearly") {
  const Mlp m = Mlp::glorot(2, {3}, 1, 4);
  auto g = m.make_gradients();
  MlpTape tape;
  m.forward(Eigen::Vector2d(0.3, -0.2), &tape);
  m.backward(tape, Eigen::MatrixXd::Constant(1, 1, 1.0), g);
  auto twice = m.make_gradients();
  twice.add(g);
  twice.add(g);
  CHECK(twice.weight[0].isApprox(2 * g.weight[0]));
  g.set_zero();
  CHECK(g.weight[0].cwiseAbs().maxCoeff() == 0.0);
}
