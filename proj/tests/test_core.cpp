#include <cmath>
#include <cstring>

#include "doctest.h"
#include "forcediff/core/adam.hpp"
#include "forcediff/core/rng.hpp"
#include "forcediff/core/tape.hpp"
#include "support/gradcheck.hpp"
#include "support/op_gradcheck.hpp"

using namespace forcediff;
using forcediff::testing::compare_gradients;
using forcediff::testing::GradCheckPolicy;
using forcediff::testing::numeric_gradient;
using forcediff::testing::mse_in_double;
using forcediff::testing::random_array;
using forcediff::testing::worst_error_for_op;


TEST_CASE("philox known answers") {
  const auto zero = Rng::philox({0, 0, 0, 0}, {0, 0});
  CHECK(zero[0] == 0x6627e8d5u);
  CHECK(zero[1] == 0xe169c58du);
  CHECK(zero[2] == 0xbc57ac4cu);
  CHECK(zero[3] == 0x9b00dbd8u);
  const auto ones = Rng::philox({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                {0xffffffffu, 0xffffffffu});
  CHECK(ones[0] == 0x408f276du);
  CHECK(ones[1] == 0x41c83b0eu);
  CHECK(ones[2] == 0xa20bc7c6u);
  CHECK(ones[3] == 0x6d5451fdu);
}

TEST_CASE("rng streams are reproducible and independent") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  CHECK(a.draws() == 200);
  Rng s1 = Rng(42).derive(1), s2 = Rng(42).derive(2);
  CHECK(s1.next_u64() != s2.next_u64());

  Rng n(7);
  double mean = 0, sq = 0;
  const int count = 20000;
  for (int i = 0; i < count; ++i) {
    const double x = n.normal();
    mean += x;
    sq += x * x;
  }
  mean /= count;
  CHECK(std::abs(mean) < 0.03);
  CHECK(std::abs(sq / count - 1.0) < 0.05);

  Rng u(3);
  for (int i = 0; i < 1000; ++i) {
    const auto k = u.uniform_int(7);
    CHECK(k < 7);
  }
  CHECK_THROWS_AS(u.uniform_int(0), ConfigError);
}

TEST_CASE("array invariants") {
  CHECK_THROWS_AS(Array<float>(Shape{2, 3}, std::vector<float>(5)), DimensionError);
  Array<float> a(Shape{2, 3}, 1.5f);
  CHECK(a.size() == 6);
  CHECK(a.reshaped({3, 2}).shape() == Shape{3, 2});
  CHECK_THROWS_AS(a.reshaped({4}), DimensionError);
  a[2] = std::nanf("");
  CHECK_THROWS_AS(a.require_finite("test"), NumericError);
}

TEST_CASE("conv1d examples") {
  const auto x = Array<double>::from_list({1, 3}, {1, 2, 3});
  const Array<double> zero_bias(Shape{1});
  SUBCASE("identity kernel") {
    const auto w = Array<double>::from_list({1, 1, 3}, {0, 1, 0});
    CHECK(conv1d(x, w, zero_bias, 1, 1).values() == std::vector<double>{1, 2, 3});
  }
  SUBCASE("box kernel with zero padding") {
    const auto w = Array<double>::from_list({1, 1, 3}, {1, 1, 1});
    CHECK(conv1d(x, w, zero_bias, 1, 1).values() == std::vector<double>{3, 6, 5});
  }
  SUBCASE("cross-correlation, no kernel flip") {
    const auto w = Array<double>::from_list({1, 1, 3}, {1, 0, 0});
    CHECK(conv1d(x, w, zero_bias, 1, 1).values() == std::vector<double>{0, 1, 2});
  }
  SUBCASE("strided output length") {
    Rng rng(1);
    const auto in = random_array<float>({2, 8}, rng);
    const auto w = random_array<float>({3, 2, 3}, rng);
    CHECK(conv1d(in, w, Array<float>(Shape{3}), 2, 1).shape() == Shape{3, 4});
    CHECK(conv1d_output_length(8, 3, 2, 1) == 4);
  }
  SUBCASE("shape errors") {
    const auto w = Array<double>::from_list({1, 2, 3}, {0, 1, 0, 0, 1, 0});
    CHECK_THROWS_AS(conv1d(x, w, zero_bias, 1, 1), DimensionError);
    const auto even = Array<double>::from_list({1, 1, 2}, {1, 1});
    CHECK_THROWS_AS(conv1d(x, even, zero_bias, 1, 0), DimensionError);
  }
}

TEST_CASE("conv1d identity property over random inputs") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t c = 1 + rng.uniform_int(6);
    const std::size_t len = 1 + rng.uniform_int(16);
    const auto in = random_array<float>({2, c, len}, rng);
    Array<float> w(Shape{c, c, 3});
    for (std::size_t i = 0; i < c; ++i) w.at(i, i, 1) = 1.0f;
    CHECK(conv1d(in, w, Array<float>(Shape{c}), 1, 1) == in);
  }
}

TEST_CASE("linear and silu examples") {
  const auto x = Array<double>::from_list({2}, {1, 2});
  CHECK(linear(x, Array<double>::from_list({1, 2}, {1, 1}), Array<double>::from_list({1}, {1}))
            .values() == std::vector<double>{4});
  CHECK(linear(x, Array<double>::from_list({2, 2}, {1, 0, 0, 1}), Array<double>(Shape{2})) == x);
  const auto b = Array<double>::from_list({2}, {0.25, -3});
  CHECK(linear(x, Array<double>(Shape{2, 2}), b) == b);
  CHECK_THROWS_AS(linear(x, Array<double>(Shape{2, 3}), b), DimensionError);

  const auto s = silu(Array<double>::from_list({3}, {0.0, 1.0, 30.0}));
  CHECK(s[0] == 0.0);
  CHECK(s[1] == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))).epsilon(1e-12));
  CHECK(s[1] == doctest::Approx(0.7311).epsilon(1e-4));
  CHECK(s[2] == doctest::Approx(30.0).epsilon(1e-9));
}

TEST_CASE("backward basics") {
  Tape<double> tape;
  const auto w = tape.variable(Array<double>(Shape{2, 3}, 0.5));
  const auto loss = tape.sum(w);
  tape.backward(loss);
  const auto gw = tape.grad(w);
  for (double g : gw.data()) CHECK(g == 1.0);

  Tape<double> constant_tape;
  const auto p = constant_tape.variable(Array<double>(Shape{4}, 2.0));
  const auto c = constant_tape.constant(Array<double>(Shape{3}, 1.0));
  const auto closs = constant_tape.sum(c);
  constant_tape.backward(closs);
  const auto gp = constant_tape.grad(p);
  for (double g : gp.data()) CHECK(g == 0.0);

  CHECK_THROWS_AS(tape.backward(w), GraphError);
  CHECK_THROWS_AS(constant_tape.backward(loss), GraphError);
  CHECK_THROWS_AS(tape.value(Var{}), GraphError);
}

TEST_CASE("tape rejects non-finite values") {
  Tape<float> tape;
  Array<float> bad(Shape{2}, 1.0f);
  bad[1] = INFINITY;
  CHECK_THROWS_AS(tape.constant(bad), NumericError);
}


TEST_CASE_TEMPLATE("every op matches central differences on random shapes", T, float, double) {
  Rng rng(2024);
  for (int op = 0; op < forcediff::testing::kOpCount; ++op) {
    for (int trial = 0; trial < 6; ++trial) {
      CAPTURE(op);
      CAPTURE(trial);
      CHECK(worst_error_for_op<T>(op, rng) < GradCheckPolicy<T>::tolerance);
    }
  }
}

TEST_CASE("mse(conv1d) gradient in 32-bit mode") {
  Rng rng(5);
  const auto x = random_array<float>({2, 3, 8}, rng);
  const auto w = random_array<float>({4, 3, 3}, rng, 0.5);
  const auto b = random_array<float>({4}, rng);
  const auto target = random_array<float>({2, 4, 8}, rng);
  Tape<float> tape;
  const Var wv = tape.param(w);
  tape.backward(tape.mse(tape.conv1d(tape.constant(x), wv, tape.param(b), 1, 1), target));

  auto w64 = w.cast<double>();
  const auto numeric = numeric_gradient<double>(
      [&] {
        Tape<double> t;
        return mse_in_double(
            t.value(t.conv1d(t.constant(x.cast<double>()), t.param(w64), t.param(b.cast<double>()), 1, 1)),
            target.cast<double>());
      },
      w64, 1e-3);
  CHECK(compare_gradients(tape.grad(wv).cast<double>(), numeric, 1e-2).max_rel_error < 1e-3);
}

TEST_CASE("adam examples") {
  AdamConfig cfg;
  cfg.lr = 0.1;
  SUBCASE("first step magnitude equals lr") {
    std::vector<Array<double>> p = {Array<double>::scalar(0.0)};
    const std::vector<Array<double>> g = {Array<double>::scalar(1.0)};
    AdamState<double> state;
    adam_step<double>(p, g, state, cfg);
    CHECK(p[0][0] == doctest::Approx(-0.1).epsilon(1e-6));
  }
  SUBCASE("zero gradients leave parameters unchanged") {
    std::vector<Array<float>> p = {Array<float>(Shape{3}, 0.25f)};
    const std::vector<Array<float>> g = {Array<float>(Shape{3})};
    AdamState<float> state;
    for (int i = 0; i < 10; ++i) adam_step<float>(p, g, state, cfg);
    for (float v : p[0].data()) CHECK(v == 0.25f);
  }
  SUBCASE("rejects nonpositive learning rate") {
    std::vector<Array<float>> p = {Array<float>(Shape{1})};
    const std::vector<Array<float>> g = {Array<float>(Shape{1})};
    AdamState<float> state;
    cfg.lr = 0.0;
    CHECK_THROWS_AS(adam_step<float>(p, g, state, cfg), ConfigError);
  }
}

TEST_CASE("forward, backward and optimizer are bitwise deterministic") {
  auto run = [] {
    Rng rng(77);
    std::vector<Array<float>> params = {random_array<float>({5, 3, 3}, rng),
                                        random_array<float>({5}, rng)};
    const auto x = random_array<float>({4, 3, 16}, rng);
    const auto target = random_array<float>({4, 5, 8}, rng);
    AdamState<float> state;
    for (int step = 0; step < 5; ++step) {
      Tape<float> tape;
      const auto w = tape.param(params[0]);
      const auto b = tape.param(params[1]);
      tape.backward(tape.mse(tape.silu(tape.conv1d(tape.constant(x), w, b, 2, 1)), target));
      const std::vector<Array<float>> grads = {tape.grad(w), tape.grad(b)};
      adam_step<float>(params, grads, state, AdamConfig{});
    }
    return params;
  };
  const auto a = run();
  const auto b = run();
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(std::memcmp(a[i].data().data(), b[i].data().data(), a[i].size() * sizeof(float)) == 0);
  }
}
