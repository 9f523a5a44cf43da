#include <cmath>
#include <sstream>

#include "c2gan/adam.hpp"
#include "c2gan/error.hpp"
#include "c2gan/gradcheck.hpp"
#include "c2gan/mlp.hpp"
#include "doctest.h"

using namespace c2gan;

TEST_CASE("xavier_init respects the Glorot bound") {
  Rng rng(42);
  const auto m = xavier_init(100, 200, rng);
  CHECK(m.rows == 200);
  CHECK(m.cols == 100);
  const double bound = std::sqrt(6.0 / 300.0);
  CHECK(bound == doctest::Approx(0.14142).epsilon(1e-4));
  double lo = 1.0, hi = -1.0;
  for (double v : m.data) {
    CHECK(std::abs(v) <= bound);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  // 20000 draws cover the interval.
  CHECK(lo < -0.9 * bound);
  CHECK(hi > 0.9 * bound);

  const auto one = xavier_init(1, 1, rng);
  REQUIRE(one.data.size() == 1);
  CHECK(std::abs(one.data[0]) <= std::sqrt(3.0));
}

TEST_CASE("xavier_init is deterministic and rejects empty fans") {
  Rng a(7), b(7);
  CHECK(xavier_init(13, 5, a) == xavier_init(13, 5, b));
  Rng c(1);
  CHECK_THROWS_AS(xavier_init(0, 3, c), DimensionError);
  CHECK_THROWS_AS(xavier_init(3, 0, c), DimensionError);
}

TEST_CASE("xavier networks start with zero biases") {
  Rng rng(3);
  const auto net = Mlp::xavier(4, 6, 2, OutputKind::Linear, rng);
  for (double b : net.bias_in) CHECK(b == 0.0);
  for (double b : net.bias_out) CHECK(b == 0.0);
}

TEST_CASE("forward on zero parameters") {
  const Mlp soft(5, 200, 7, OutputKind::Softmax);
  const auto t = forward(soft, Vector(5, 0.3));
  for (double p : t.output) CHECK(p == doctest::Approx(1.0 / 7.0).epsilon(1e-15));
  for (double h : t.hidden_act) CHECK(h == 0.5);

  const Mlp lin(5, 200, 3, OutputKind::Linear);
  for (double y : forward(lin, Vector(5, -2.0)).output) CHECK(y == 0.0);
}

TEST_CASE("softmax closed form") {
  Mlp net(1, 1, 3, OutputKind::Softmax);
  net.bias_out = {std::log(2.0), 0.0, 0.0};
  const auto out = forward(net, Vector{0.0}).output;
  CHECK(out[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(out[1] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(out[2] == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("softmax stays normalized for large logits") {
  Rng rng(11);
  std::uniform_real_distribution<double> offset(-1e4, 1e4), spread(-5.0, 5.0), wide(-1e4, 1e4);
  for (int trial = 0; trial < 1000; ++trial) {
    const double c = offset(rng);
    Vector logits(6);
    for (double& l : logits) l = c + spread(rng);
    const auto p = softmax(logits);
    double total = 0.0;
    for (double v : p) {
      CHECK(v > 0.0);
      CHECK(v < 1.0);
      total += v;
    }
    CHECK(std::abs(total - 1.0) < 1e-12);

    for (double& l : logits) l = wide(rng);
    const auto q = softmax(logits);
    total = 0.0;
    for (double v : q) {
      CHECK(std::isfinite(v));
      total += v;
    }
    CHECK(std::abs(total - 1.0) < 1e-12);
  }
}

TEST_CASE("forward validates its input") {
  const Mlp net(3, 4, 2, OutputKind::Linear);
  CHECK_THROWS_AS(forward(net, Vector(2, 0.0)), DimensionError);
  CHECK_THROWS_AS(forward(net, Vector{0.0, NAN, 1.0}), NumericError);
  CHECK_THROWS_AS(forward(net, Vector{0.0, INFINITY, 1.0}), NumericError);
}

TEST_CASE("hidden activations lie strictly inside (0, 1)") {
  Mlp net(1, 2, 1, OutputKind::Linear);
  net.weights_in.data = {1.0, -1.0};
  const auto t = forward(net, Vector{1e6});
  for (double h : t.hidden_act) {
    CHECK(h > 0.0);
    CHECK(h < 1.0);
  }
}

TEST_CASE("backward of a zero output gradient is zero") {
  Rng rng(5);
  const auto net = Mlp::xavier(4, 6, 3, OutputKind::Linear, rng);
  const auto t = forward(net, Vector{0.1, -0.2, 0.3, 0.4});
  const auto g = backward(net, t, Vector(3, 0.0));
  for (auto block : g.blocks())
    for (double v : block) CHECK(v == 0.0);
  for (double v : g.input) CHECK(v == 0.0);
}

TEST_CASE("output layer gradient is the chain-rule base case") {
  // y = w . h + b, so dL/dw = g h and dL/db = g.
  Rng rng(9);
  const auto net = Mlp::xavier(3, 5, 1, OutputKind::Linear, rng);
  const auto t = forward(net, Vector{0.5, 1.0, -1.5});
  const double g = 2.5;
  const auto grads = backward(net, t, Vector{g});
  for (std::size_t j = 0; j < 5; ++j) CHECK(grads.weights_out(0, j) == g * t.hidden_act[j]);
  CHECK(grads.bias_out[0] == g);
}

TEST_CASE("backward rejects mismatched traces") {
  const Mlp a(3, 4, 2, OutputKind::Linear);
  const Mlp b(5, 4, 2, OutputKind::Linear);
  const auto t = forward(b, Vector(5, 0.0));
  CHECK_THROWS_AS(backward(a, t, Vector(2, 1.0)), DimensionError);
  CHECK_THROWS_AS(backward(b, t, Vector(3, 1.0)), DimensionError);
}

TEST_CASE("input_gradient agrees with backward") {
  Rng rng(21);
  const auto net = Mlp::xavier(4, 7, 3, OutputKind::Softmax, rng);
  const auto t = forward(net, Vector{0.3, -0.1, 0.8, -0.7});
  const Vector og{0.2, -0.5, 0.3};
  const auto full = backward(net, t, og);
  const auto only = input_gradient(net, t, og);
  for (std::size_t i = 0; i < only.size(); ++i) CHECK(only[i] == doctest::Approx(full.input[i]).epsilon(1e-13));
}

TEST_CASE("analytic gradients match central finite differences") {
  const auto r = gradcheck::check_mlp(100, 2024);
  INFO("max relative error " << r.max_relative_error);
  CHECK(r.instances == 100);
  CHECK(r.passed);
}

TEST_CASE("numeric_gradient restores parameters bit-exactly") {
  Vector p{0.1, 0.2, 0.30000000000000004};
  const Vector before = p;
  gradcheck::numeric_gradient(p, [&] { return p[0] * p[1] * p[2]; });
  CHECK(p == before);
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
  Vector theta{1.0, -2.0, 3.0};
  const Vector zero(3, 0.0);
  const std::size_t sizes[] = {3};
  AdamState s(sizes, AdamHyper{});
  std::span<double> p[] = {theta};
  std::span<const double> g[] = {zero};
  adam_step(p, g, s);
  CHECK(theta == Vector{1.0, -2.0, 3.0});
  CHECK(s.step_count == 1);
}

TEST_CASE("adam: one hand-evaluated step") {
  Vector theta{0.0};
  const Vector grad{2.0};
  const std::size_t sizes[] = {1};
  AdamState s(sizes, AdamHyper{1e-4, 0.5, 0.999, 1e-8});
  std::span<double> p[] = {theta};
  std::span<const double> g[] = {grad};
  adam_step(p, g, s);
  // m_hat = 2, v_hat = 4.
  CHECK(s.first_moment[0][0] == doctest::Approx(1.0));
  CHECK(s.second_moment[0][0] == doctest::Approx(0.004));
  CHECK(theta[0] == doctest::Approx(-1e-4 * 2.0 / (2.0 + 1e-8)).epsilon(1e-12));
}

TEST_CASE("adam: minimizes a quadratic") {
  Vector theta{1.0};
  Vector grad{0.0};
  const std::size_t sizes[] = {1};
  AdamState s(sizes, AdamHyper{0.05, 0.5, 0.999, 1e-8});
  std::span<double> p[] = {theta};
  std::span<const double> g[] = {grad};
  std::vector<double> trajectory;
  for (int i = 0; i < 200; ++i) {
    grad[0] = 2.0 * theta[0];
    adam_step(p, g, s);
    trajectory.push_back(std::abs(theta[0]));
    for (const auto& v : s.second_moment) CHECK(v[0] >= 0.0);
  }
  CHECK(s.step_count == 200);
  CHECK(std::abs(theta[0]) < 0.1);
  // Strictly shrinking while still far from the optimum.
  for (std::size_t i = 1; i < trajectory.size() && trajectory[i] > 0.1; ++i)
    CHECK(trajectory[i] < trajectory[i - 1]);
}

TEST_CASE("adam: non-finite gradients are rejected without updating") {
  Vector theta{1.0, 2.0};
  const Vector grad{0.5, NAN};
  const std::size_t sizes[] = {2};
  AdamState s(sizes, AdamHyper{});
  std::span<double> p[] = {theta};
  std::span<const double> g[] = {grad};
  CHECK_THROWS_AS(adam_step(p, g, s), NumericError);
  CHECK(theta == Vector{1.0, 2.0});
  CHECK(s.step_count == 0);
  CHECK(s.first_moment[0] == Vector{0.0, 0.0});
}

TEST_CASE("adam: first update is invariant to gradient scale") {
  Rng rng(17);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 100; ++trial) {
    Vector g(8), g100(8);
    for (std::size_t i = 0; i < g.size(); ++i) {
      // Large-gradient regime: the epsilon term contributes at most eps / |g|.
      const double n = normal(rng);
      g[i] = std::copysign(0.1 + std::abs(n), n);
      g100[i] = 100.0 * g[i];
    }
    Vector a(8, 0.0), b(8, 0.0);
    const std::size_t sizes[] = {8};
    AdamState sa(sizes, AdamHyper{}), sb(sizes, AdamHyper{});
    std::span<double> pa[] = {a}, pb[] = {b};
    std::span<const double> ga[] = {g}, gb[] = {g100};
    adam_step(pa, ga, sa);
    adam_step(pb, gb, sb);
    for (std::size_t i = 0; i < 8; ++i) {
      CHECK(std::signbit(a[i]) == std::signbit(b[i]));
      CHECK(std::abs(a[i] - b[i]) <= 1e-6 * std::abs(b[i]));
    }
  }
}

TEST_CASE("adam: shape mismatches are dimension errors") {
  Vector theta{1.0, 2.0};
  const Vector grad{0.5};
  const std::size_t sizes[] = {2};
  AdamState s(sizes, AdamHyper{});
  std::span<double> p[] = {theta};
  std::span<const double> g[] = {grad};
  CHECK_THROWS_AS(adam_step(p, g, s), DimensionError);
}

TEST_CASE("network serialization is exact") {
  Rng rng(99);
  auto net = Mlp::xavier(6, 9, 4, OutputKind::Softmax, rng);
  net.bias_in[3] = -1.0 / 3.0;
  net.bias_out[0] = 1e-300;
  std::stringstream ss;
  write_mlp(ss, net);
  CHECK(read_mlp(ss) == net);
}

TEST_CASE("fixed seed gives bitwise-identical networks") {
  Rng a(123), b(123);
  CHECK(Mlp::xavier(20, 200, 21, OutputKind::Softmax, a) ==
        Mlp::xavier(20, 200, 21, OutputKind::Softmax, b));
}
