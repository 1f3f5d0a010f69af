// Copyright 2026 The RLN Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "rln/grad_check.hpp"
#include "rln/layers.hpp"
#include "test_util.hpp"

using namespace rln;
using rln::test::max_abs_diff;
using rln::test::random_tensor;

namespace {

double sigm(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Scalar-loop GRU step, independent of the graph code.
struct ScalarGru {
  std::vector<double> z, h;
};

ScalarGru scalar_gru(const ParameterStore<double>& ps, const GruParams& p,
                     const std::vector<double>& x, const std::vector<double>& hp) {
  const auto& Wz = ps.value(p.name("Wz")); const auto& Wr = ps.value(p.name("Wr"));
  const auto& Wc = ps.value(p.name("Wc")); const auto& Uz = ps.value(p.name("Uz"));
  const auto& Ur = ps.value(p.name("Ur")); const auto& Uc = ps.value(p.name("Uc"));
  const auto& bz = ps.value(p.name("bz")); const auto& br = ps.value(p.name("br"));
  const auto& bc = ps.value(p.name("bc"));
  const std::size_t H = p.hidden, D = p.input;
  std::vector<double> r(H), u(H), out_z(H), out_h(H);
  for (std::size_t i = 0; i < H; ++i) {
    double ar = br[i], au = bz[i];
    for (std::size_t j = 0; j < D; ++j) { ar += Wr(i, j) * x[j]; au += Wz(i, j) * x[j]; }
    for (std::size_t j = 0; j < H; ++j) { ar += Ur(i, j) * hp[j]; au += Uz(i, j) * hp[j]; }
    r[i] = sigm(ar);
    u[i] = sigm(au);
  }
  for (std::size_t i = 0; i < H; ++i) {
    double ac = bc[i];
    for (std::size_t j = 0; j < D; ++j) ac += Wc(i, j) * x[j];
    for (std::size_t j = 0; j < H; ++j) ac += Uc(i, j) * r[j] * hp[j];
    out_z[i] = ac;
    out_h[i] = (1 - u[i]) * hp[i] + u[i] * std::tanh(ac);
  }
  return {out_z, out_h};
}

ParameterStore<double> random_gru(const GruParams& p, Rng& rng, double scale = 1.0) {
  ParameterStore<double> ps;
  init_gru(ps, p, rng);
  for (auto& e : ps.entries()) e.value = random_tensor(e.value.shape(), rng, scale);
  return ps;
}

}  // namespace

TEST_CASE("dense_forward") {
  ParameterStore<double> ps;
  DenseParams p{"d", 3, 3, Activation::kLinear};
  ps.add(p.weight(), Tensor<double>::matrix({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}));
  ps.add(p.bias(), Tensor<double>(Shape{3}));
  Graph<double> g(&ps);
  auto x = g.constant(Tensor<double>::matrix({{1, -2, 3}, {0.5, 0, 7}}));
  CHECK(dense_forward(g, x, p).h.value() == x.value());

  Rng rng(1);
  Rng before = rng;
  auto clean = dense_forward(g, x, p);
  auto zero_noise = dense_forward(g, x, p, NoiseSource{0.0, &rng});
  CHECK(clean.z.value() == zero_noise.z.value());
  CHECK(rng == before);

  CHECK_THROWS_AS(dense_forward(g, g.constant(Tensor<double>(Shape{2, 4})), p), DimensionError);
}

TEST_CASE("dense_forward preactivation matches the matmul oracle") {
  Rng rng(2);
  ParameterStore<double> ps;
  DenseParams p{"d", 4, 3, Activation::kTanh};
  ps.add(p.weight(), random_tensor(Shape{3, 4}, rng));
  ps.add(p.bias(), random_tensor(Shape{3}, rng));
  Graph<double> g(&ps);
  const auto xv = random_tensor(Shape{5, 4}, rng);
  auto out = dense_forward(g, g.constant(xv), p);
  const auto& W = ps.value(p.weight());
  const auto& b = ps.value(p.bias());
  for (std::size_t r = 0; r < 5; ++r) {
    for (std::size_t o = 0; o < 3; ++o) {
      double z = b[o];
      for (std::size_t k = 0; k < 4; ++k) z += xv(r, k) * W(o, k);
      CHECK(std::abs(out.z.value()(r, o) - z) < 1e-12);
      CHECK(std::abs(out.h.value()(r, o) - std::tanh(z)) < 1e-12);
    }
  }
}

TEST_CASE("gru_step degenerate cases") {
  GruParams p{"gru", 2, 3};
  ParameterStore<double> ps;
  Rng rng(3);
  init_gru(ps, p, rng);
  for (auto& e : ps.entries()) e.value.fill(0.0);
  Graph<double> g(&ps);
  auto step = gru_step(g, g.constant(Tensor<double>(Shape{1, 2})),
                       g.constant(Tensor<double>(Shape{1, 3})), p);
  for (double v : step.update.value().values()) CHECK(v == 0.5);
  for (double v : step.z.value().values()) CHECK(v == 0.0);
  for (double v : step.h.value().values()) CHECK(v == 0.0);

  // With h_prev = 0 the recurrent candidate term vanishes whatever Uc is.
  ParameterStore<double> qs = random_gru(p, rng);
  Graph<double> q(&qs);
  const auto xv = random_tensor(Shape{1, 2}, rng);
  auto s = gru_step(q, q.constant(xv), q.constant(Tensor<double>(Shape{1, 3})), p);
  const auto& Wc = qs.value(p.name("Wc"));
  const auto& bc = qs.value(p.name("bc"));
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(std::abs(s.z.value()[i] - (Wc(i, 0) * xv[0] + Wc(i, 1) * xv[1] + bc[i])) < 1e-14);
  }
}

TEST_CASE("gru_step matches the scalar oracle") {
  GruParams p{"gru", 2, 3};
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    ParameterStore<double> ps = random_gru(p, rng);
    const auto x = random_tensor(Shape{1, 2}, rng);
    const auto h = random_tensor(Shape{1, 3}, rng);
    Graph<double> g(&ps);
    auto step = gru_step(g, g.constant(x), g.constant(h), p);
    const auto ref = scalar_gru(ps, p, {x[0], x[1]}, {h[0], h[1], h[2]});
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(std::abs(step.z.value()[i] - ref.z[i]) < 1e-12);
      CHECK(std::abs(step.h.value()[i] - ref.h[i]) < 1e-12);
    }
  }
}

TEST_CASE("gru gates stay in (0,1) and the state stays bounded") {
  GruParams p{"gru", 3, 5};
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    ParameterStore<double> ps = random_gru(p, rng, 3.0);
    Graph<double> g(&ps);
    const auto hv = random_tensor(Shape{4, 5}, rng, 2.0);
    auto step = gru_step(g, g.constant(random_tensor(Shape{4, 3}, rng, 3.0)), g.constant(hv), p);
    double bound = 1.0;
    for (double v : hv.values()) bound = std::max(bound, std::abs(v));
    for (double v : step.update.value().values()) CHECK((v > 0.0 && v < 1.0));
    for (double v : step.h.value().values()) CHECK(std::abs(v) <= bound + 1e-15);
  }
}

TEST_CASE("gru gradients unrolled over four steps") {
  GruParams p{"gru", 2, 3};
  Rng rng(6);
  ParameterStore<double> ps = random_gru(p, rng);
  std::vector<Tensor<double>> xs;
  for (int t = 0; t < 4; ++t) xs.push_back(random_tensor(Shape{2, 2}, rng));
  const auto weights = random_tensor(Shape{2, 3}, rng);
  auto loss = [&](Graph<double>& g) {
    Var<double> h = g.constant(Tensor<double>(Shape{2, 3}));
    Var<double> total = g.constant(Tensor<double>::scalar(0));
    for (const auto& x : xs) {
      auto s = gru_step(g, g.constant(x), h, p);
      h = s.h;
      total = total + sum(s.z * g.constant(weights)) + sum(square(h));
    }
    return total;
  };
  const auto r = grad_check(loss, ps, 1e-6);
  CHECK(r.coordinates == 3 * 6 + 3 * 9 + 3 * 3);
  CHECK(r.max_rel_error < 1e-6);
}

TEST_CASE("noisy gru step") {
  GruParams p{"gru", 2, 3};
  Rng init(7);
  for (int trial = 0; trial < 10; ++trial) {
    ParameterStore<double> ps = random_gru(p, init, 2.0);
    const auto x = random_tensor(Shape{2, 2}, init);
    const auto c = random_tensor(Shape{2, 3}, init);
    Graph<double> g(&ps);
    auto clean = gru_step(g, g.constant(x), g.constant(c), p);

    for (auto variant : {NoiseVariant::kFeedForward, NoiseVariant::kRecurrent}) {
      Rng rng(trial);
      auto zero = gru_step_noisy(g, g.constant(x), g.constant(c), p, {variant, 0.0}, rng);
      CHECK(zero.z.value() == clean.z.value());
      CHECK(zero.h.value() == clean.h.value());
      CHECK(zero.carry.value() == clean.h.value());
    }

    Rng rng(100 + trial);
    auto ffn = gru_step_noisy(g, g.constant(x), g.constant(c), p, {NoiseVariant::kFeedForward, 0.7}, rng);
    CHECK(ffn.z.value() == clean.z.value());
    CHECK(ffn.h.value() == clean.h.value());

    auto rn = gru_step_noisy(g, g.constant(x), g.constant(c), p, {NoiseVariant::kRecurrent, 0.7}, rng);
    CHECK(rn.carry.value() == clean.h.value());
    CHECK(max_abs_diff(rn.z.value(), clean.z.value()) > 0.0);
    CHECK(max_abs_diff(rn.h.value(), clean.h.value()) > 0.0);
    // h~ = (1 - u) * carry + u * tanh(z~) with the clean gates.
    for (std::size_t i = 0; i < 6; ++i) {
      const double u = clean.update.value()[i];
      CHECK(std::abs(rn.h.value()[i] - ((1 - u) * c[i] + u * std::tanh(rn.z.value()[i]))) < 1e-14);
    }
  }
  Rng rng(0);
  Graph<double> g;
  CHECK_THROWS_AS(add_noise(g.constant(Tensor<double>(Shape{1})), -0.1, rng), std::invalid_argument);
}

TEST_CASE("recurrent noise never re-enters the recurrence") {
  GruParams p{"gru", 2, 4};
  Rng init(8);
  ParameterStore<double> ps = random_gru(p, init, 1.5);
  std::vector<Tensor<double>> xs;
  for (int t = 0; t < 6; ++t) xs.push_back(random_tensor(Shape{3, 2}, init));
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Graph<double> g(&ps);
    Rng rng(seed);
    Var<double> carry = g.constant(Tensor<double>(Shape{3, 4}));
    Var<double> h = carry;
    for (const auto& x : xs) {
      auto noisy = gru_step_noisy(g, g.constant(x), carry, p, {NoiseVariant::kRecurrent, 1.0}, rng);
      auto clean = gru_step(g, g.constant(x), h, p);
      CHECK(noisy.carry.value() == clean.h.value());
      carry = noisy.carry;
      h = clean.h;
    }
  }
}
