// Copyright 2026 The MC-CNN Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <random>

#include "doctest.h"
#include "mccnn/error.hpp"
#include "mccnn/ops.hpp"
#include "oracles.hpp"

using namespace mccnn;

namespace {

Tensor random_tensor(Shape shape, std::mt19937_64& rng, bool grad = true, double lo = -1.0, double hi = 1.0) {
  const auto n = shape_numel(shape);
  return Tensor(std::move(shape), oracle::random_values(n, rng, lo, hi), grad);
}

// Compares the autodiff gradient of `loss()` w.r.t. `t` with central
// differences; returns the worst relative error.
double max_grad_error(const std::function<Tensor()>& loss, Tensor& t, double floor = 1e-8) {
  t.zero_grad();
  loss().backward();
  const std::vector<double> analytic(t.grad().begin(), t.grad().end());
  auto values = t.mutable_data();
  const auto numeric = oracle::finite_difference(
      [&] {
        NoGradGuard g;
        return loss().item();
      },
      values.data(), values.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < numeric.size(); ++i) {
    worst = std::max(worst, oracle::relative_error(analytic[i], numeric[i], floor));
  }
  return worst;
}

}  // namespace

TEST_CASE("tensor invariants and errors") {
  Tensor t(Shape{2, 3}, std::vector<double>{1, 2, 3, 4, 5, 6});
  CHECK(t.numel() == 6);
  CHECK(t.rank() == 2);
  CHECK(t.at(4) == 5.0);
  CHECK_THROWS_AS(Tensor(Shape{2, 2}, std::vector<double>{1, 2, 3}), DimensionError);
  CHECK(t.op_name() == "leaf");
  CHECK_FALSE(t.has_grad());

  // A leaf is not attached to a graph.
  Tensor leaf(Shape{1}, std::vector<double>{1.0}, true);
  CHECK_THROWS_AS(leaf.backward(), UsageError);
  // Non-scalar roots are rejected.
  Tensor v(Shape{2}, std::vector<double>{1, 2}, true);
  CHECK_THROWS_AS(square(v).backward(), UsageError);
  // Op results are read-only.
  CHECK_THROWS_AS(square(v).mutable_data(), UsageError);
}

TEST_CASE("conv2d trivial cases") {
  Tensor x(Shape{1, 1, 1}, std::vector<double>{2});
  Tensor k(Shape{1, 1, 1, 1}, std::vector<double>{3});
  Tensor b(Shape{1}, std::vector<double>{0});
  CHECK(conv2d(x, k, b).item() == 6.0);

  Tensor ones(Shape{1, 3, 3}, std::vector<double>(9, 1.0));
  Tensor k3(Shape{1, 1, 3, 3}, std::vector<double>(9, 1.0));
  const Tensor y = conv2d(ones, k3, b);
  CHECK(y.shape() == Shape{1, 1, 1});
  CHECK(y.item() == 9.0);
}

TEST_CASE("conv2d errors") {
  Tensor x(Shape{2, 5, 5});
  Tensor b(Shape{3});
  CHECK_THROWS_AS(conv2d(x, Tensor(Shape{3, 1, 3, 3}), b, 1, 1), DimensionError);  // Cin mismatch
  CHECK_THROWS_AS(conv2d(x, Tensor(Shape{3, 2, 2, 2}), b, 1, 0), DimensionError);  // even kernel
  CHECK_THROWS_AS(conv2d(x, Tensor(Shape{3, 2, 3, 3}), Tensor(Shape{2}), 1, 1), DimensionError);
  CHECK_THROWS_AS(conv2d(x, Tensor(Shape{3, 2, 7, 7}), b, 1, 0), DimensionError);  // empty output
}

TEST_CASE("conv2d matches the naive oracle") {
  std::mt19937_64 rng(11);
  struct Case {
    std::size_t cin, h, w, cout, k, stride, pad;
  };
  const Case cases[] = {{2, 5, 5, 3, 3, 1, 1}, {3, 8, 8, 4, 3, 2, 1}, {4, 6, 6, 2, 1, 2, 0},
                        {9, 32, 32, 8, 3, 1, 1}, {1, 7, 5, 2, 5, 1, 2}, {5, 4, 4, 3, 3, 2, 1}};
  for (const auto& c : cases) {
    auto x = oracle::random_values(c.cin * c.h * c.w, rng);
    auto k = oracle::random_values(c.cout * c.cin * c.k * c.k, rng);
    auto b = oracle::random_values(c.cout, rng);
    std::size_t oh = 0, ow = 0;
    const auto expected = oracle::conv2d(x, c.cin, c.h, c.w, k, c.cout, c.k, b, c.stride, c.pad, &oh, &ow);
    const Tensor y = conv2d(Tensor(Shape{c.cin, c.h, c.w}, x), Tensor(Shape{c.cout, c.cin, c.k, c.k}, k),
                            Tensor(Shape{c.cout}, b), c.stride, c.pad);
    REQUIRE(y.shape() == Shape{c.cout, oh, ow});
    for (std::size_t i = 0; i < expected.size(); ++i) CHECK(std::abs(y.at(i) - expected[i]) < 1e-12);
  }
}

TEST_CASE("conv2d is bitwise deterministic") {
  std::mt19937_64 rng(3);
  Tensor x = random_tensor(Shape{3, 9, 9}, rng, false);
  Tensor k = random_tensor(Shape{4, 3, 3, 3}, rng, false);
  Tensor b = random_tensor(Shape{4}, rng, false);
  const Tensor a = conv2d(x, k, b, 2, 1);
  const Tensor c = conv2d(x, k, b, 2, 1);
  for (std::size_t i = 0; i < a.numel(); ++i) CHECK(a.at(i) == c.at(i));
}

TEST_CASE("conv2d gradients match finite differences") {
  std::mt19937_64 rng(5);
  for (auto [stride, pad] : {std::pair<std::size_t, std::size_t>{1, 1}, {2, 1}, {2, 0}}) {
    Tensor x = random_tensor(Shape{2, 5, 5}, rng);
    Tensor k = random_tensor(Shape{3, 2, 3, 3}, rng);
    Tensor b = random_tensor(Shape{3}, rng);
    Tensor w = random_tensor(Shape{3 * ((5 + 2 * pad - 3) / stride + 1) * ((5 + 2 * pad - 3) / stride + 1)}, rng, false);
    auto loss = [&] { return sum(mul(flatten(conv2d(x, k, b, stride, pad)), w)); };
    CHECK(max_grad_error(loss, x) < 1e-6);
    CHECK(max_grad_error(loss, k) < 1e-6);
    CHECK(max_grad_error(loss, b) < 1e-6);
  }
}

TEST_CASE("relu") {
  Tensor x(Shape{3}, std::vector<double>{-1, 0, 2}, true);
  const Tensor y = relu(x);
  CHECK(y.at(0) == 0.0);
  CHECK(y.at(1) == 0.0);
  CHECK(y.at(2) == 2.0);
  sum(y).backward();
  CHECK(x.grad()[0] == 0.0);
  CHECK(x.grad()[1] == 0.0);  // defined as 0 at exactly 0
  CHECK(x.grad()[2] == 1.0);

  std::mt19937_64 rng(9);
  auto values = oracle::random_values(20, rng);
  for (auto& v : values) {
    if (std::abs(v) < 1e-3) v = 0.5;  // keep away from the kink
  }
  Tensor r(Shape{20}, values, true);
  Tensor w = random_tensor(Shape{20}, rng, false);
  CHECK(max_grad_error([&] { return sum(mul(relu(r), w)); }, r) < 1e-6);
}

TEST_CASE("avg_pool2d") {
  Tensor x(Shape{1, 2, 2}, std::vector<double>{1, 3, 5, 7});
  CHECK(avg_pool2d(x, 2).item() == 4.0);

  Tensor c(Shape{2, 4, 4}, std::vector<double>(32, 2.5));
  const Tensor pooled = avg_pool2d(c, 2);
  for (double v : pooled.data()) CHECK(v == 2.5);

  std::mt19937_64 rng(1);
  const auto values = oracle::random_values(32, rng);
  const auto expected = oracle::window_mean(values, 2, 4, 4, 2);
  const Tensor y = avg_pool2d(Tensor(Shape{2, 4, 4}, values), 2);
  for (std::size_t i = 0; i < expected.size(); ++i) CHECK(std::abs(y.at(i) - expected[i]) < 1e-12);

  CHECK_THROWS_AS(avg_pool2d(Tensor(Shape{1, 5, 4}), 2), DimensionError);

  Tensor g = random_tensor(Shape{2, 4, 4}, rng);
  Tensor w = random_tensor(Shape{8}, rng, false);
  CHECK(max_grad_error([&] { return sum(mul(flatten(avg_pool2d(g, 2)), w)); }, g) < 1e-6);
}

TEST_CASE("global_avg_pool") {
  Tensor c(Shape{3, 2, 2}, std::vector<double>{1, 1, 1, 1, 2, 2, 2, 2, 5, 5, 5, 5});
  const Tensor v = global_avg_pool(c);
  CHECK(v.shape() == Shape{3});
  CHECK(v.at(0) == 1.0);
  CHECK(v.at(1) == 2.0);
  CHECK(v.at(2) == 5.0);
  CHECK(global_avg_pool(Tensor(Shape{1, 2, 2}, std::vector<double>{1, 3, 5, 7})).item() == 4.0);

  std::mt19937_64 rng(2);
  const auto values = oracle::random_values(8 * 16, rng);
  const auto expected = oracle::channel_mean(values, 8, 16);
  const Tensor y = global_avg_pool(Tensor(Shape{8, 4, 4}, values));
  for (std::size_t i = 0; i < 8; ++i) CHECK(std::abs(y.at(i) - expected[i]) < 1e-12);

  Tensor g = random_tensor(Shape{8, 4, 4}, rng);
  Tensor w = random_tensor(Shape{8}, rng, false);
  CHECK(max_grad_error([&] { return sum(mul(global_avg_pool(g), w)); }, g) < 1e-6);
}

TEST_CASE("linear") {
  Tensor x(Shape{2}, std::vector<double>{3, -4});
  Tensor eye(Shape{2, 2}, std::vector<double>{1, 0, 0, 1});
  Tensor zero_b(Shape{2});
  const Tensor y = linear(x, eye, zero_b);
  CHECK(y.at(0) == 3.0);
  CHECK(y.at(1) == -4.0);
  const Tensor z = linear(x, Tensor(Shape{2, 2}), Tensor(Shape{2}, std::vector<double>{1, 2}));
  CHECK(z.at(0) == 1.0);
  CHECK(z.at(1) == 2.0);
  CHECK_THROWS_AS(linear(x, Tensor(Shape{2, 3}), zero_b), DimensionError);

  std::mt19937_64 rng(4);
  Tensor in = random_tensor(Shape{4}, rng);
  Tensor w = random_tensor(Shape{3, 4}, rng);
  Tensor b = random_tensor(Shape{3}, rng);
  auto loss = [&] { return sum(linear(in, w, b)); };
  CHECK(max_grad_error(loss, w) < 1e-6);
  CHECK(max_grad_error(loss, in) < 1e-6);
  CHECK(max_grad_error(loss, b) < 1e-6);
}

TEST_CASE("softmax2") {
  const Tensor half = softmax2(Tensor(Shape{2}, std::vector<double>{0, 0}));
  CHECK(half.at(0) == 0.5);
  CHECK(half.at(1) == 0.5);

  std::mt19937_64 rng(6);
  // Gaps past ~36 saturate a component to exactly 0 or 1 in float64.
  std::uniform_real_distribution<double> d(-15, 15);
  for (int i = 0; i < 200; ++i) {
    const double a = d(rng), b = d(rng), c = d(rng);
    const Tensor p = softmax2(Tensor(Shape{2}, std::vector<double>{a, b}));
    const Tensor q = softmax2(Tensor(Shape{2}, std::vector<double>{a + c, b + c}));
    CHECK(std::abs(p.at(0) + p.at(1) - 1.0) < 1e-12);
    CHECK(p.at(0) > 0.0);
    CHECK(p.at(1) > 0.0);
    CHECK(p.at(0) < 1.0);
    CHECK(p.at(1) < 1.0);
    CHECK(std::abs(p.at(0) - q.at(0)) < 1e-12);
  }

  const Tensor big = softmax2(Tensor(Shape{2}, std::vector<double>{1000, 0}));
  CHECK(std::isfinite(big.at(0)));
  CHECK(big.at(0) == doctest::Approx(1.0));
  CHECK(big.at(1) == doctest::Approx(0.0));

  Tensor s = random_tensor(Shape{2}, rng);
  Tensor w = random_tensor(Shape{2}, rng, false);
  CHECK(max_grad_error([&] { return sum(mul(softmax2(s), w)); }, s) < 1e-6);
}

TEST_CASE("bce_loss") {
  const double eps = kProbabilityEpsilon;
  CHECK(bce_loss(Tensor(Shape{1}, std::vector<double>{1.0 - eps}), 1).item() == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(bce_loss(Tensor(Shape{1}, std::vector<double>{0.5}), 0).item() == doctest::Approx(0.693147).epsilon(1e-6));
  // Clamping keeps log(0) away.
  CHECK(std::isfinite(bce_loss(Tensor(Shape{1}, std::vector<double>{0.0}), 1).item()));
  CHECK(bce_loss(Tensor(Shape{1}, std::vector<double>{0.3}), 1).item() >= 0.0);
  CHECK_THROWS_AS(bce_loss(Tensor(Shape{1}, std::vector<double>{0.3}), 2), UsageError);

  for (int label : {0, 1}) {
    for (double p0 : {0.1, 0.35, 0.8, 0.97}) {
      Tensor p(Shape{1}, std::vector<double>{p0}, true);
      CHECK(max_grad_error([&] { return bce_loss(p, label); }, p) < 1e-6);
    }
  }
}

TEST_CASE("elementwise, reduction and shape ops") {
  std::mt19937_64 rng(8);
  Tensor a = random_tensor(Shape{6}, rng);
  Tensor b = random_tensor(Shape{6}, rng);
  Tensor w = random_tensor(Shape{6}, rng, false);
  CHECK(max_grad_error([&] { return sum(mul(add(a, b), w)); }, a) < 1e-6);
  CHECK(max_grad_error([&] { return sum(mul(sub(a, b), w)); }, b) < 1e-6);
  CHECK(max_grad_error([&] { return sum(mul(a, b)); }, a) < 1e-6);
  CHECK(max_grad_error([&] { return sum(mul(abs(a), w)); }, a) < 1e-6);
  CHECK(max_grad_error([&] { return mean(square(a)); }, a) < 1e-6);
  CHECK(max_grad_error([&] { return sum(mul(slice(a, 2, 3), slice(w, 0, 3))); }, a) < 1e-6);
  CHECK(max_grad_error([&] { return euclidean_distance(a, b); }, a) < 1e-6);
  CHECK(max_grad_error([&] { return cosine_distance(a, b); }, b) < 1e-6);
  std::vector<Tensor> parts{a, b};
  Tensor w2 = random_tensor(Shape{12}, rng, false);
  CHECK(max_grad_error([&] { return sum(mul(concat(parts), w2)); }, b) < 1e-6);
  Tensor m = random_tensor(Shape{2, 3}, rng);
  CHECK(max_grad_error([&] { return sum(mul(reshape(m, Shape{6}), w)); }, m) < 1e-6);

  CHECK_THROWS_AS(add(a, Tensor(Shape{5})), DimensionError);
  CHECK_THROWS_AS(slice(a, 4, 3), DimensionError);
  CHECK_THROWS_AS(reshape(a, Shape{4}), DimensionError);
}

TEST_CASE("backward contracts") {
  Tensor x(Shape{2}, std::vector<double>{1, 2}, true);
  sum(square(x)).backward();
  CHECK(x.grad()[0] == 2.0);
  CHECK(x.grad()[1] == 4.0);

  // Accumulation: a second backward without reset doubles exactly.
  Tensor y(Shape{3}, std::vector<double>{0.3, -1.7, 2.2}, true);
  Tensor w(Shape{3}, std::vector<double>{1.1, 0.4, -0.9});
  const Tensor loss = sum(mul(relu(mul(y, w)), w));
  loss.backward();
  const std::vector<double> once(y.grad().begin(), y.grad().end());
  loss.backward();
  for (std::size_t i = 0; i < 3; ++i) CHECK(y.grad()[i] == 2.0 * once[i]);
  y.zero_grad();
  for (double g : y.grad()) CHECK(g == 0.0);

  // A tensor used twice receives both contributions.
  Tensor z(Shape{1}, std::vector<double>{3.0}, true);
  sum(mul(z, z)).backward();
  CHECK(z.grad()[0] == 6.0);

  // No graph under NoGradGuard.
  {
    NoGradGuard guard;
    const Tensor r = sum(square(x));
    CHECK(r.is_leaf());
    CHECK_THROWS_AS(r.backward(), UsageError);
  }
  CHECK(grad_recording_enabled());
}

TEST_CASE("compute graph is topologically ordered") {
  Tensor a(Shape{2}, std::vector<double>{1, 2}, true);
  Tensor b(Shape{2}, std::vector<double>{3, 4}, true);
  const Tensor s = sum(mul(add(a, b), a));
  const ComputeGraph g = trace_graph(s);
  REQUIRE(g.nodes.size() == 5);  // a, b, add, mul, sum
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    for (auto in : g.nodes[i].inputs) CHECK(in < i);
  }
  CHECK(g.nodes.back().op == "sum");
}

TEST_CASE("sgd_step") {
  Tensor w(Shape{1}, std::vector<double>{1.0}, true);
  sum(mul(w, Tensor(Shape{1}, std::vector<double>{2.0}))).backward();  // grad 2
  std::vector<Tensor> params{w};
  sgd_step(params, 0.1);
  CHECK(w.item() == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(w.grad()[0] == 0.0);

  Tensor v(Shape{3}, std::vector<double>{0.5, -0.25, 4.0}, true);
  sum(square(v)).backward();
  std::vector<Tensor> p2{v};
  const std::vector<double> before(v.data().begin(), v.data().end());
  sgd_step(p2, 0.0);
  for (std::size_t i = 0; i < 3; ++i) CHECK(v.at(i) == before[i]);

  CHECK_THROWS_AS(sgd_step(p2, -1e-3), ConfigError);

  // One small step on a quadratic lowers it.
  Tensor q(Shape{4}, std::vector<double>{1, -2, 3, 0.5}, true);
  auto quad = [&] { return sum(square(sub(q, Tensor(Shape{4}, std::vector<double>{0.2, 0.1, -0.3, 0.0})))); };
  const double l0 = quad().item();
  quad().backward();
  std::vector<Tensor> p3{q};
  sgd_step(p3, 1e-2);
  CHECK(quad().item() < l0);
}
