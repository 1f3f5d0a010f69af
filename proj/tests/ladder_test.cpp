// Copyright 2026 The RLN Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <numeric>

#include "rln/grad_check.hpp"
#include "rln/ladder.hpp"
#include "test_util.hpp"

using namespace rln;
using rln::test::max_abs_diff;
using rln::test::random_tensor;

namespace {

LadderConfig tiny(DecoderKind decoder, NoiseVariant variant, double sigma = 0.3) {
  LadderConfig c;
  c.input_dim = 3;
  c.hidden_dim = 4;
  c.classes = 2;
  c.decoder = decoder;
  c.noise = {variant, sigma};
  if (decoder == DecoderKind::kNone) c.lambdas = {0, 0, 0};
  return c;
}

/// Random batch with lengths `lengths`; labels drawn when `labeled`.
SequenceBatch<double> random_batch(const LadderConfig& c, const std::vector<std::size_t>& lengths,
                                   Rng& rng, bool labeled) {
  std::vector<std::vector<float>> store;
  std::vector<std::pair<const float*, std::size_t>> seqs;
  std::vector<LabelSeq> labels;
  for (std::size_t len : lengths) {
    std::vector<float> buf(len * c.input_dim);
    for (auto& v : buf) v = static_cast<float>(2.0 * rng.uniform() - 1.0);
    store.push_back(std::move(buf));
    if (labeled) {
      LabelSeq l;
      // Distinct neighbours keep every label feasible in `len` frames.
      for (std::size_t i = 0; i < (len + 1) / 2; ++i) {
        l.push_back(static_cast<std::int32_t>((i + rng.uniform_index(2)) % c.classes));
        if (l.size() > 1 && l.back() == l[l.size() - 2]) l.back() = (l.back() + 1) % c.classes;
      }
      labels.push_back(l);
    }
  }
  for (std::size_t i = 0; i < lengths.size(); ++i) seqs.emplace_back(store[i].data(), lengths[i]);
  return make_batch<double>(seqs, c.input_dim, labels);
}

void check_traces_equal(const EncoderTrace<double>& a, const EncoderTrace<double>& b) {
  for (std::size_t l = 0; l < kLadderLayers; ++l) {
    for (std::size_t t = 0; t < a.layers[l].clean_z.size(); ++t) {
      CHECK(a.layers[l].clean_z[t].value() == b.layers[l].clean_z[t].value());
      CHECK(a.layers[l].noisy_z[t].value() == b.layers[l].noisy_z[t].value());
    }
  }
}

}  // namespace

TEST_CASE("encode: zero noise gives identical passes") {
  for (auto variant : {NoiseVariant::kFeedForward, NoiseVariant::kRecurrent}) {
    const auto c = tiny(DecoderKind::kRecurrent, variant, 0.0);
    Rng rng(1);
    auto ps = init_ladder_params<double>(c, rng);
    const auto batch = random_batch(c, {4, 2, 3}, rng, false);
    Graph<double> g(&ps);
    const Rng before = rng;
    const auto trace = encode(g, batch, c, rng);
    CHECK(rng == before);
    for (std::size_t l = 0; l < kLadderLayers; ++l) {
      REQUIRE(trace.layers[l].clean_z.size() == 4);
      for (std::size_t t = 0; t < 4; ++t) {
        CHECK(trace.layers[l].clean_z[t].value() == trace.layers[l].noisy_z[t].value());
      }
    }
    for (std::size_t t = 0; t < 4; ++t) CHECK(trace.clean_y[t].value() == trace.noisy_y[t].value());
  }
}

TEST_CASE("encode: noise injection sites") {
  Rng init(2);
  auto base = tiny(DecoderKind::kRecurrent, NoiseVariant::kFeedForward, 0.5);
  auto ps = init_ladder_params<double>(base, init);
  const auto batch = random_batch(base, {3, 3}, init, false);
  auto differs = [&](const LadderConfig& c, std::size_t layer) {
    Graph<double> g(&ps);
    Rng rng(9);
    const auto trace = encode(g, batch, c, rng);
    double d = 0;
    for (std::size_t t = 0; t < 3; ++t) {
      d = std::max(d, max_abs_diff(trace.layers[layer].clean_z[t].value(),
                                   trace.layers[layer].noisy_z[t].value()));
    }
    return d > 0.0;
  };

  // Under FFN the hidden site draws nothing even with a large sigma there.
  auto c = base;
  c.layer_sigma = {0.0, 2.0, 0.0};
  CHECK(!differs(c, 0));
  CHECK(!differs(c, 1));
  CHECK(!differs(c, 2));
  c.noise.variant = NoiseVariant::kRecurrent;
  CHECK(!differs(c, 0));
  CHECK(differs(c, 1));
  CHECK(differs(c, 2));

  // Output-only noise leaves the lower layers alone.
  c = base;
  c.layer_sigma = {0.0, std::nullopt, std::nullopt};
  CHECK(!differs(c, 0));
  CHECK(!differs(c, 1));
  CHECK(differs(c, 2));

  c = base;
  CHECK(differs(c, 0));
  CHECK(differs(c, 1));  // input noise propagates
  // Layer-0 noise is exactly the input plus the Gaussian draw.
  Graph<double> g(&ps);
  Rng rng(9), replay(9);
  const auto trace = encode(g, batch, c, rng, EncodePasses::kNoisyOnly);
  const auto n = gaussian<double>(batch.frames[0].shape(), 0.5, replay);
  for (std::size_t i = 0; i < n.size(); ++i) {
    CHECK(trace.layers[0].noisy_z[0].value()[i] == batch.frames[0][i] + n[i]);
  }
}

TEST_CASE("encode is deterministic for a fixed seed") {
  const auto c = tiny(DecoderKind::kFeedForward, NoiseVariant::kRecurrent, 0.4);
  Rng init(3);
  auto ps = init_ladder_params<double>(c, init);
  const auto batch = random_batch(c, {5, 1}, init, false);
  Graph<double> g(&ps);
  Rng a(17), b(17);
  check_traces_equal(encode(g, batch, c, a), encode(g, batch, c, b));

  auto wrong = c;
  wrong.input_dim = 4;
  CHECK_THROWS_AS(encode(g, batch, wrong, a), DimensionError);
}

TEST_CASE("combinator") {
  CombinatorParams p{"g", 4};
  Rng rng(4);
  {
    ParameterStore<double> ps;
    init_combinator(ps, p, rng);
    for (auto& e : ps.entries()) e.value.fill(0.0);
    ps.value(p.b2())[0] = 0.75;
    Graph<double> g(&ps);
    auto out = combinator(g, g.constant(random_tensor(Shape{2, 5}, rng)),
                          g.constant(random_tensor(Shape{2, 5}, rng)), p);
    for (double v : out.value().values()) CHECK(v == 0.75);
  }
  ParameterStore<double> ps;
  init_combinator(ps, p, rng);
  for (int trial = 0; trial < 10; ++trial) {
    const Shape s{1 + rng.uniform_index(4), 1 + rng.uniform_index(6)};
    Graph<double> g(&ps);
    auto out = combinator(g, g.constant(random_tensor(s, rng)), g.constant(random_tensor(s, rng)), p);
    CHECK(out.shape() == s);
  }
  Graph<double> g(&ps);
  CHECK_THROWS_AS(combinator(g, g.constant(Tensor<double>(Shape{2, 3})),
                             g.constant(Tensor<double>(Shape{3, 2})), p),
                  DimensionError);

  // Inputs as parameters so their gradients are checked too.
  ps.add("z", random_tensor(Shape{3, 4}, rng, 2.0));
  ps.add("u", random_tensor(Shape{3, 4}, rng, 2.0));
  for (auto& e : ps.entries()) e.value = random_tensor(e.value.shape(), rng, 1.5);
  const auto weights = random_tensor(Shape{3, 4}, rng);
  const auto r = grad_check(
      [&](Graph<double>& h) {
        return sum(combinator(h, h.parameter("z"), h.parameter("u"), p) * h.constant(weights));
      },
      ps, 1e-6);
  CHECK(r.max_rel_error < 1e-6);
}

TEST_CASE("recurrent decoder reduces to the feed-forward one") {
  const auto c = tiny(DecoderKind::kRecurrent, NoiseVariant::kFeedForward);
  Rng rng(5);
  auto ps = init_ladder_params<double>(c, rng);

  SUBCASE("single step") {
    const auto batch = random_batch(c, {1, 1}, rng, false);
    Graph<double> g(&ps);
    const auto trace = encode(g, batch, c, rng);
    const auto rd = decode_recurrent(g, trace, c);
    const auto ffd = decode_feedforward(g, trace, c);
    for (std::size_t l = 0; l < kLadderLayers; ++l) CHECK(rd[l][0].value() == ffd[l][0].value());
  }
  SUBCASE("zero recurrent weights") {
    for (std::size_t l = 0; l < kLadderLayers; ++l) ps.value(decoder_recurrent(l)).fill(0.0);
    const auto batch = random_batch(c, {6, 4}, rng, false);
    Graph<double> g(&ps);
    const auto trace = encode(g, batch, c, rng);
    const auto rd = decode_recurrent(g, trace, c);
    const auto ffd = decode_feedforward(g, trace, c);
    for (std::size_t l = 0; l < kLadderLayers; ++l) {
      for (std::size_t t = 0; t < 6; ++t) CHECK(max_abs_diff(rd[l][t].value(), ffd[l][t].value()) < 1e-12);
    }
  }
  SUBCASE("nonzero recurrence matters") {
    const auto batch = random_batch(c, {3}, rng, false);
    Graph<double> g(&ps);
    const auto trace = encode(g, batch, c, rng);
    CHECK(max_abs_diff(decode_recurrent(g, trace, c)[1][2].value(),
                       decode_feedforward(g, trace, c)[1][2].value()) > 0.0);
  }
}

TEST_CASE("feed-forward decoder is independent across steps") {
  const auto c = tiny(DecoderKind::kFeedForward, NoiseVariant::kFeedForward);
  Rng rng(6);
  auto ps = init_ladder_params<double>(c, rng);
  const auto batch = random_batch(c, {5, 5}, rng, false);
  Graph<double> g(&ps);
  const auto trace = encode(g, batch, c, rng);
  const std::vector<std::size_t> perm = {3, 0, 4, 2, 1};
  EncoderTrace<double> shuffled;
  for (std::size_t t : perm) {
    for (std::size_t l = 0; l < kLadderLayers; ++l) {
      shuffled.layers[l].clean_z.push_back(trace.layers[l].clean_z[t]);
      shuffled.layers[l].noisy_z.push_back(trace.layers[l].noisy_z[t]);
    }
    shuffled.clean_y.push_back(trace.clean_y[t]);
    shuffled.noisy_y.push_back(trace.noisy_y[t]);
  }
  const auto a = decode(g, trace, c);
  const auto b = decode(g, shuffled, c);
  for (std::size_t l = 0; l < kLadderLayers; ++l) {
    for (std::size_t i = 0; i < perm.size(); ++i) CHECK(b[l][i].value() == a[l][perm[i]].value());
  }
}

TEST_CASE("denoising cost by hand") {
  Graph<double> g;
  EncoderTrace<double> trace;
  trace.layers[1].clean_z = {g.constant(Tensor<double>::matrix({{2}}))};
  Reconstructions<double> recon;
  recon[1] = {g.constant(Tensor<double>::matrix({{0}}))};
  NormStats<double> stats;
  stats.mean[1] = g.constant(Tensor<double>::vector({1}));
  stats.stddev[1] = g.constant(Tensor<double>::vector({1}));
  const auto cost = denoising_cost(g, trace, recon, {0, 10, 0}, stats, {{0, 0}});
  CHECK(cost.value()[0] == 40.0);

  // Perfect reconstruction.
  recon[1] = trace.layers[1].clean_z;
  CHECK(denoising_cost(g, trace, recon, {0, 10, 0}, stats, {{0, 0}}).value()[0] == 0.0);
  CHECK(denoising_cost(g, trace, recon, {0, 0, 0}, stats, {{0, 0}}).value()[0] == 0.0);
}

TEST_CASE("denoising cost is invariant under a joint unit permutation") {
  Rng rng(7);
  const std::vector<std::size_t> perm = {2, 4, 0, 1, 3};
  for (int trial = 0; trial < 20; ++trial) {
    const auto z = random_tensor(Shape{6, 5}, rng, 2.0), zh = random_tensor(Shape{6, 5}, rng, 2.0);
    const auto mu = random_tensor(Shape{5}, rng);
    auto s = random_tensor(Shape{5}, rng);
    for (auto& v : s.values()) v = 0.2 + std::abs(v);
    auto permute = [&](const Tensor<double>& t) {
      Tensor<double> out(t.shape());
      for (std::size_t r = 0; r < t.rows(); ++r)
        for (std::size_t c = 0; c < 5; ++c) out.row(r)[c] = t.row(r)[perm[c]];
      return out;
    };
    auto cost = [&](const Tensor<double>& a, const Tensor<double>& b, const Tensor<double>& m,
                    const Tensor<double>& sd) {
      Graph<double> g;
      EncoderTrace<double> trace;
      Reconstructions<double> recon;
      NormStats<double> stats;
      trace.layers[1].clean_z = {g.constant(a)};
      recon[1] = {g.constant(b)};
      stats.mean[1] = g.constant(m);
      stats.stddev[1] = g.constant(sd);
      std::vector<std::pair<std::size_t, std::size_t>> frames;
      for (std::size_t r = 0; r < 6; ++r) frames.emplace_back(0, r);
      return denoising_cost(g, trace, recon, {0, 3.0, 0}, stats, frames).value()[0];
    };
    const double base = cost(z, zh, mu, s);
    CHECK(base > 0.0);
    CHECK(std::abs(base - cost(permute(z), permute(zh), permute(mu), permute(s))) < 1e-12);
  }
}

TEST_CASE("normalised clean targets are standardised") {
  const auto c = tiny(DecoderKind::kRecurrent, NoiseVariant::kFeedForward);
  Rng rng(8);
  auto ps = init_ladder_params<double>(c, rng);
  const auto batch = random_batch(c, {7, 3, 5}, rng, false);
  Graph<double> g(&ps);
  const auto trace = encode(g, batch, c, rng);
  const auto frames = batch.valid_frames();
  CHECK(frames.size() == 15);
  const auto stats = norm_stats(g, trace, frames);
  for (std::size_t l = 0; l < kLadderLayers; ++l) {
    const auto w = c.widths()[l];
    for (std::size_t u = 0; u < w; ++u) {
      const double m = stats.mean[l].value()[u], s = stats.stddev[l].value()[u];
      REQUIRE(s > 1e-3);
      double sum = 0, sq = 0;
      for (auto [t, b] : frames) {
        const double v = (trace.layers[l].clean_z[t].value()(b, u) - m) / s;
        sum += v;
        sq += v * v;
      }
      const double mean = sum / 15.0;
      CHECK(std::abs(mean) < 1e-6);
      CHECK(std::abs(std::sqrt(sq / 15.0 - mean * mean) - 1.0) < 1e-4);
    }
  }
}

TEST_CASE("semi-supervised loss bookkeeping") {
  Rng rng(9);
  SUBCASE("zero lambdas reduce to the supervised cost") {
    auto c = tiny(DecoderKind::kRecurrent, NoiseVariant::kRecurrent);
    c.lambdas = {0, 0, 0};
    auto ps = init_ladder_params<double>(c, rng);
    const auto labeled = random_batch(c, {4, 3}, rng, true);
    const auto unlabeled = random_batch(c, {5, 2}, rng, false);
    Graph<double> g(&ps);
    Rng noise(1);
    const auto parts = semi_supervised_loss(g, labeled, &unlabeled, c, noise);
    CHECK(parts.total.value()[0] == parts.supervised.value()[0]);
    CHECK(parts.denoising.value()[0] == 0.0);
    g.backward(parts.total);
    for (const auto& e : ps.entries()) {
      if (e.name.rfind("dec.", 0) != 0) continue;
      CAPTURE(e.name);
      for (double v : e.grad.values()) CHECK(v == 0.0);
    }
    CHECK(max_abs_diff(ps.grad("enc.out.W"), Tensor<double>(ps.grad("enc.out.W").shape())) > 0.0);
  }
  SUBCASE("denoising on labeled data alone") {
    const auto c = tiny(DecoderKind::kFeedForward, NoiseVariant::kFeedForward);
    auto ps = init_ladder_params<double>(c, rng);
    const auto labeled = random_batch(c, {4, 3}, rng, true);
    Graph<double> g(&ps);
    Rng noise(2);
    const auto parts = semi_supervised_loss<double>(g, labeled, nullptr, c, noise);
    CHECK(parts.denoising.value()[0] > 0.0);
    CHECK(std::abs(parts.total.value()[0] - parts.supervised.value()[0] - parts.denoising.value()[0]) < 1e-12);
  }
  SUBCASE("component sum equals total") {
    const auto c = tiny(DecoderKind::kRecurrent, NoiseVariant::kFeedForward);
    auto ps = init_ladder_params<double>(c, rng);
    const auto labeled = random_batch(c, {4, 3}, rng, true);
    const auto unlabeled = random_batch(c, {5, 2, 6}, rng, false);
    Graph<double> g(&ps);
    Rng noise(3);
    const auto parts = semi_supervised_loss(g, labeled, &unlabeled, c, noise);
    CHECK(std::abs(parts.total.value()[0] - parts.supervised.value()[0] - parts.denoising.value()[0]) < 1e-12);
  }
  SUBCASE("no objective") {
    auto c = tiny(DecoderKind::kNone, NoiseVariant::kFeedForward);
    auto ps = init_ladder_params<double>(c, rng);
    const auto unlabeled = random_batch(c, {3}, rng, false);
    Graph<double> g(&ps);
    CHECK_THROWS_AS(semi_supervised_loss(g, SequenceBatch<double>{}, &unlabeled, c, rng),
                    std::invalid_argument);
  }
  SUBCASE("config validation") {
    auto c = tiny(DecoderKind::kNone, NoiseVariant::kFeedForward);
    c.lambdas = {1, 0, 0};
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  }
}

TEST_CASE("end-to-end gradients with frozen noise") {
  for (auto decoder : {DecoderKind::kRecurrent, DecoderKind::kFeedForward}) {
    for (auto variant : {NoiseVariant::kFeedForward, NoiseVariant::kRecurrent}) {
      const auto c = tiny(decoder, variant, 0.3);
      CAPTURE(variant_name(c));
      Rng rng(10);
      auto ps = init_ladder_params<double>(c, rng);
      const auto labeled = random_batch(c, {3, 3}, rng, true);
      const auto unlabeled = random_batch(c, {3, 2}, rng, false);
      const auto r = grad_check(
          [&](Graph<double>& g) {
            Rng noise(77);
            return semi_supervised_loss(g, labeled, &unlabeled, c, noise).total;
          },
          ps, 1e-4);  // the O(100) loss makes smaller steps round-off bound
      CHECK(r.coordinates == ps.scalar_count());
      CHECK(r.max_rel_error < 1e-4);
    }
  }
}

TEST_CASE("all six variants produce finite losses") {
  for (const char* dec : {"ND", "RD", "FFD"}) {
    for (const char* noise : {"FFN", "RN"}) {
      LadderConfig c;
      c.input_dim = 6;
      c.hidden_dim = 8;
      c.classes = 4;
      c.decoder = parse_decoder(dec);
      c.noise.variant = parse_noise_variant(noise);
      if (c.decoder == DecoderKind::kNone) c.lambdas = {0, 0, 0};
      CHECK(variant_name(c) == std::string(dec) + "-" + noise);
      Rng rng(11);
      auto ps = init_ladder_params<float>(c, rng);
      std::vector<std::vector<float>> bufs;
      std::vector<std::pair<const float*, std::size_t>> seqs;
      for (std::size_t len : {9, 6, 8}) {
        std::vector<float> b(len * 6);
        for (auto& v : b) v = static_cast<float>(rng.normal());
        bufs.push_back(std::move(b));
      }
      for (std::size_t i = 0; i < 3; ++i) seqs.emplace_back(bufs[i].data(), bufs[i].size() / 6);
      const auto labeled = make_batch<float>(seqs, 6, {{0, 1, 2}, {3}, {1, 1}});
      const auto unlabeled = make_batch<float>(seqs, 6);
      Graph<float> g(&ps);
      const auto parts = semi_supervised_loss(g, labeled, &unlabeled, c, rng);
      CHECK(std::isfinite(parts.total.value()[0]));
      CHECK(parts.supervised.value()[0] > 0.0f);
      CHECK((parts.denoising.value()[0] > 0.0f) == (c.decoder != DecoderKind::kNone));
      g.backward(parts.total);
    }
  }
  CHECK_THROWS_AS(parse_decoder("XD"), std::invalid_argument);
  CHECK_THROWS_AS(parse_noise_variant("GN"), std::invalid_argument);
}
