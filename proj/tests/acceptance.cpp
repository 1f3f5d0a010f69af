// Copyright 2026 The RLN Authors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: one PASS/FAIL line per criterion. Run all criteria, or
// only those whose numbers are given on the command line (e.g. `acceptance 1 5`).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iterator>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "rln/ctc.hpp"
#include "rln/data.hpp"
#include "rln/errors.hpp"
#include "rln/features.hpp"
#include "rln/grad_check.hpp"
#include "rln/ladder.hpp"
#include "rln/trainer.hpp"
#include "test_util.hpp"

using namespace rln;
namespace fs = std::filesystem;

namespace {

// ---- pinned tolerances and budgets -----------------------------------------

constexpr int kCtcInstances = 1000;
constexpr double kCtcTol = 1e-9;
constexpr double kCtcSeconds = 60;

constexpr double kGradRelTol = 1e-4;
constexpr double kGradSeconds = 300;
// The loss is O(10^2) (lambda_0 = 1000) while some gradient entries are
// O(10^-4); smaller steps are dominated by round-off in f(p+e) - f(p-e).
constexpr double kGradStep = 1e-4;

constexpr double kIdentityTol = 1e-12;

constexpr double kNormMeanTol = 1e-6;
constexpr double kNormStdTol = 1e-4;
constexpr std::size_t kNormMinFrames = 64;

constexpr std::size_t kTrendSeeds = 5;
constexpr double kTrendMargin = 0.005;  // 0.5 PER points
constexpr std::size_t kTrendMinWins = 3;
constexpr double kTrendSeconds = 45 * 60;

constexpr int kLevenshteinCases = 10000;

constexpr int kSubsetSeeds = 20;
constexpr double kSubsetDistributionTol = 0.05;

constexpr double kDctTol = 1e-10;

// ---- desk-scale synthetic trend experiment ---------------------------------
//
// 8 classes, 2000 training sequences of 20-40 frames plus 300 validation
// sequences drawn from the same prototypes; 10% of the training set labeled.
// Per-frame noise 2.0 makes the task hard enough that 200 labeled sequences
// overfit. Both models get the same data, subset and initialisation seed;
// each gets its best noise level from the grid (by mean over seeds).

constexpr std::size_t kTrendTrain = 2000;
constexpr std::size_t kTrendValid = 300;
constexpr double kTrendNoiseLevel = 2.0;
constexpr double kTrendLabelFraction = 0.1;
constexpr std::size_t kTrendHidden = 32;
constexpr std::size_t kTrendEpochs = 15;
const std::vector<double> kTrendSigmas = {0.3, 0.6};

// ---- helpers -----------------------------------------------------------------

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

void flip_byte(const fs::path& from, const fs::path& to, std::size_t at) {
  auto bytes = read_file(from);
  bytes[at] ^= 0x10;
  std::ofstream(to, std::ios::binary) << bytes;
}

Tensor<double> softmax(const Tensor<double>& logits) {
  Tensor<double> p(logits.shape());
  for (std::size_t t = 0; t < logits.rows(); ++t) kernel::softmax_row<double>(logits.row(t), p.row(t));
  return p;
}

LabelSeq random_label(Rng& rng, std::size_t max_len, std::int32_t classes) {
  LabelSeq l(rng.uniform_index(max_len + 1));
  for (auto& s : l) s = static_cast<std::int32_t>(rng.uniform_index(static_cast<std::uint64_t>(classes)));
  return l;
}

LadderConfig tiny(DecoderKind decoder, NoiseVariant variant, double sigma) {
  LadderConfig c;
  c.input_dim = 3;
  c.hidden_dim = 4;
  c.classes = 2;
  c.decoder = decoder;
  c.noise = {variant, sigma};
  return c;
}

SequenceBatch<double> random_batch(const LadderConfig& c, const std::vector<std::size_t>& lengths, Rng& rng,
                                   bool labeled, double scale = 1.0) {
  std::vector<std::vector<float>> store;
  std::vector<std::pair<const float*, std::size_t>> seqs;
  std::vector<LabelSeq> labels;
  for (std::size_t len : lengths) {
    std::vector<float> buf(len * c.input_dim);
    for (auto& v : buf) v = static_cast<float>(scale * (2.0 * rng.uniform() - 1.0));
    store.push_back(std::move(buf));
    if (labeled) {
      LabelSeq l;
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

// ---- criteria ----------------------------------------------------------------

Outcome ctc_oracle() {
  const auto t0 = Clock::now();
  Rng rng(2024);
  double worst = 0;
  int n = 0;
  while (n < kCtcInstances) {
    const std::size_t frames = 1 + rng.uniform_index(6);
    const LabelSeq label = random_label(rng, 3, 3);
    if (ctc_min_frames(label) > frames) continue;
    const auto logits = test::random_tensor(Shape{frames, 4}, rng, 3.0);
    worst = std::max(worst, std::abs(std::log(ctc_brute_force(softmax(logits), label)) + ctc_loss(logits, label)));
    ++n;
  }
  const double secs = seconds_since(t0);
  return {worst < kCtcTol && secs < kCtcSeconds,
          "max |log p_brute + loss| = " + fmt("%.2e", worst) + " over " + std::to_string(n) + " instances, " +
              fmt("%.2f", secs) + " s"};
}

Outcome gradient_check() {
  const auto t0 = Clock::now();
  double worst = 0;
  std::string where;
  bool complete = true;
  for (auto decoder : {DecoderKind::kRecurrent, DecoderKind::kFeedForward}) {
    for (auto variant : {NoiseVariant::kFeedForward, NoiseVariant::kRecurrent}) {
      const auto c = tiny(decoder, variant, 0.3);
      Rng rng(10);
      auto ps = init_ladder_params<double>(c, rng);
      const auto labeled = random_batch(c, {3, 3}, rng, true);
      const auto unlabeled = random_batch(c, {3, 3}, rng, false);
      const auto r = grad_check(
          [&](Graph<double>& g) {
            Rng noise(77);  // frozen: same draws for every evaluation
            return semi_supervised_loss(g, labeled, &unlabeled, c, noise).total;
          },
          ps, kGradStep);
      complete &= r.coordinates == ps.scalar_count();
      if (r.max_rel_error >= worst) {
        worst = r.max_rel_error;
        where = variant_name(c) + " " + r.worst_parameter;
      }
    }
  }
  const double secs = seconds_since(t0);
  return {complete && worst < kGradRelTol && secs < kGradSeconds,
          "max relative error " + fmt("%.2e", worst) + " (" + where + ") over RD/FFD x FFN/RN, " +
              fmt("%.2f", secs) + " s"};
}

Outcome degeneration() {
  Outcome o;
  // sigma = 0: noisy trace equals the clean one bit for bit.
  std::size_t differing = 0;
  for (auto variant : {NoiseVariant::kFeedForward, NoiseVariant::kRecurrent}) {
    const auto c = tiny(DecoderKind::kRecurrent, variant, 0.0);
    Rng rng(1);
    auto ps = init_ladder_params<double>(c, rng);
    const auto batch = random_batch(c, {5, 3, 4}, rng, false);
    Graph<double> g(&ps);
    const auto trace = encode(g, batch, c, rng);
    for (std::size_t l = 0; l < kLadderLayers; ++l)
      for (std::size_t t = 0; t < trace.layers[l].clean_z.size(); ++t)
        differing += !(trace.layers[l].clean_z[t].value() == trace.layers[l].noisy_z[t].value());
  }
  // lambda = 0: total equals supervised; decoder and combinator gradients are exactly zero.
  double lambda_gap = 0;
  std::size_t nonzero_dec = 0;
  for (auto decoder : {DecoderKind::kRecurrent, DecoderKind::kFeedForward}) {
    auto c = tiny(decoder, NoiseVariant::kRecurrent, 0.3);
    c.lambdas = {0, 0, 0};
    Rng rng(9);
    auto ps = init_ladder_params<double>(c, rng);
    const auto labeled = random_batch(c, {4, 3}, rng, true);
    const auto unlabeled = random_batch(c, {5, 2}, rng, false);
    Graph<double> g(&ps);
    Rng noise(1);
    const auto parts = semi_supervised_loss(g, labeled, &unlabeled, c, noise);
    lambda_gap = std::max(lambda_gap, std::abs(parts.total.value()[0] - parts.supervised.value()[0]));
    g.backward(parts.total);
    for (const auto& e : ps.entries()) {
      if (e.name.rfind("dec.", 0) != 0) continue;
      for (double v : e.grad.values()) nonzero_dec += v != 0.0;
    }
  }
  // O = 0: the recurrent decoder equals the feed-forward one.
  double rd_ffd = 0;
  {
    const auto c = tiny(DecoderKind::kRecurrent, NoiseVariant::kFeedForward, 0.3);
    Rng rng(5);
    auto ps = init_ladder_params<double>(c, rng);
    for (std::size_t l = 0; l < kLadderLayers; ++l) ps.value(decoder_recurrent(l)).fill(0.0);
    const auto batch = random_batch(c, {6, 4}, rng, false);
    Graph<double> g(&ps);
    const auto trace = encode(g, batch, c, rng);
    const auto rd = decode_recurrent(g, trace, c);
    const auto ffd = decode_feedforward(g, trace, c);
    for (std::size_t l = 0; l < kLadderLayers; ++l)
      for (std::size_t t = 0; t < rd[l].size(); ++t)
        for (std::size_t i = 0; i < rd[l][t].value().size(); ++i)
          rd_ffd = std::max(rd_ffd, std::abs(rd[l][t].value()[i] - ffd[l][t].value()[i]));
  }
  o.pass = differing == 0 && lambda_gap <= kIdentityTol && nonzero_dec == 0 && rd_ffd <= kIdentityTol;
  o.detail = "sigma=0: " + std::to_string(differing) + " differing steps; lambda=0: |C - C_sup| = " +
             fmt("%.1e", lambda_gap) + ", " + std::to_string(nonzero_dec) + " nonzero decoder grads; O=0: max |RD-FFD| = " +
             fmt("%.1e", rd_ffd);
  return o;
}

Outcome normalization() {
  double worst_mean = 0, worst_std = 0;
  std::size_t units = 0, min_frames = SIZE_MAX;
  Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    LadderConfig c = tiny(DecoderKind::kRecurrent, NoiseVariant::kFeedForward, 0.3);
    c.input_dim = 5;
    c.hidden_dim = 6;
    c.classes = 3;
    auto ps = init_ladder_params<double>(c, rng);
    std::vector<std::size_t> lengths;
    std::size_t total = 0;
    while (total < kNormMinFrames) {
      lengths.push_back(5 + rng.uniform_index(20));
      total += lengths.back();
    }
    const auto batch = random_batch(c, lengths, rng, false, 1.0 + trial);
    Graph<double> g(&ps);
    const auto trace = encode(g, batch, c, rng);
    const auto frames = batch.valid_frames();
    min_frames = std::min(min_frames, frames.size());
    const auto stats = norm_stats(g, trace, frames);
    for (std::size_t l = 0; l < kLadderLayers; ++l) {
      for (std::size_t u = 0; u < c.widths()[l]; ++u) {
        const double m = stats.mean[l].value()[u], s = stats.stddev[l].value()[u];
        double sum = 0, sq = 0;
        for (auto [t, b] : frames) {
          const double v = (trace.layers[l].clean_z[t].value()(b, u) - m) / s;
          sum += v;
          sq += v * v;
        }
        const double n = static_cast<double>(frames.size());
        const double mean = sum / n;
        worst_mean = std::max(worst_mean, std::abs(mean));
        worst_std = std::max(worst_std, std::abs(std::sqrt(sq / n - mean * mean) - 1.0));
        ++units;
      }
    }
  }
  return {worst_mean < kNormMeanTol && worst_std < kNormStdTol && min_frames >= kNormMinFrames,
          "max |mean| = " + fmt("%.1e", worst_mean) + ", max |std - 1| = " + fmt("%.1e", worst_std) + " over " +
              std::to_string(units) + " units, batches of >= " + std::to_string(min_frames) + " frames"};
}

Outcome synthetic_trend() {
  const auto t0 = Clock::now();
  // per[model][sigma][seed]; model 0 = ND-FFN, 1 = RD-FFN
  std::vector<std::vector<std::vector<double>>> per(2, std::vector<std::vector<double>>(kTrendSigmas.size()));
  for (std::size_t seed = 1; seed <= kTrendSeeds; ++seed) {
    SynthConfig sc;
    sc.classes = 8;
    sc.sequences = kTrendTrain + kTrendValid;
    sc.min_frames = 20;
    sc.max_frames = 40;
    sc.noise_level = kTrendNoiseLevel;
    sc.seed = 1000 + seed;
    const auto [pool, valid] = split_dataset(synth_dataset(sc), kTrendTrain);
    Rng subset_rng(seed);
    const auto sup = make_supervised_subset(pool, kTrendLabelFraction, 1, subset_rng);
    for (int model = 0; model < 2; ++model) {
      for (std::size_t si = 0; si < kTrendSigmas.size(); ++si) {
        LadderConfig c;
        c.input_dim = sc.dim;
        c.hidden_dim = kTrendHidden;
        c.classes = sc.classes;
        c.decoder = model == 0 ? DecoderKind::kNone : DecoderKind::kRecurrent;
        if (model == 0) c.lambdas = {0, 0, 0};
        c.noise = {NoiseVariant::kFeedForward, kTrendSigmas[si]};
        TrainConfig tc;
        tc.min_epochs = tc.max_epochs = kTrendEpochs;
        tc.seed = seed;
        const auto r = train(c, tc, sup, pool, valid);
        per[model][si].push_back(r.best.best_valid_per);
        std::printf("    seed %zu %s sigma %.2f: best valid PER %.4f (epoch %zu)  [%.0f s]\n", seed,
                    variant_name(c).c_str(), kTrendSigmas[si], r.best.best_valid_per, r.best.best_epoch,
                    seconds_since(t0));
        std::fflush(stdout);
      }
    }
  }
  auto mean = [](const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); };
  std::size_t best[2] = {0, 0};
  for (int model = 0; model < 2; ++model)
    for (std::size_t si = 1; si < kTrendSigmas.size(); ++si)
      if (mean(per[model][si]) < mean(per[model][best[model]])) best[model] = si;
  const auto& nd = per[0][best[0]];
  const auto& rd = per[1][best[1]];
  std::size_t wins = 0;
  for (std::size_t s = 0; s < kTrendSeeds; ++s) wins += rd[s] < nd[s];
  const double secs = seconds_since(t0);
  return {mean(rd) <= mean(nd) + kTrendMargin && wins >= kTrendMinWins && secs < kTrendSeconds,
          "RD-FFN (sigma " + fmt("%.2f", kTrendSigmas[best[1]]) + ") mean PER " + fmt("%.4f", mean(rd)) +
              " vs ND-FFN (sigma " + fmt("%.2f", kTrendSigmas[best[0]]) + ") " + fmt("%.4f", mean(nd)) + "; RD wins " +
              std::to_string(wins) + "/" + std::to_string(kTrendSeeds) + " seeds; " + fmt("%.0f", secs) + " s"};
}

Outcome metrics() {
  const std::vector<LabelSeq> refs = {{0, 1}, {2}};
  bool examples = phoneme_error_rate(refs, refs) == 0.0 && phoneme_error_rate(refs, {{}, {}}) == 1.0 &&
                  phoneme_error_rate(refs, {{0}, {2}}) == 1.0 / 3.0 &&
                  phoneme_error_rate(refs, {{1, 1, 1, 1}, {0, 0}}) > 1.0 &&
                  levenshtein({10, 8, 19, 19, 4, 13}, {18, 8, 19, 19, 8, 13, 6}) == 3;
  try {
    phoneme_error_rate(refs, {{0}});
    examples = false;
  } catch (const std::invalid_argument&) {
  }
  Rng rng(8);
  int violations = 0;
  for (int i = 0; i < kLevenshteinCases; ++i) {
    const auto a = random_label(rng, 8, 4), b = random_label(rng, 8, 4), c = random_label(rng, 8, 4);
    const auto ab = levenshtein(a, b);
    violations += ab != levenshtein(b, a);
    violations += (ab == 0) != (a == b);
    violations += levenshtein(a, c) > ab + levenshtein(b, c);
  }
  return {examples && violations == 0,
          std::string("PER examples ") + (examples ? "exact" : "WRONG") + "; " + std::to_string(violations) +
              " metric-property violations in " + std::to_string(kLevenshteinCases) + " cases"};
}

Outcome data_protocol() {
  SynthConfig sc;
  sc.sequences = 400;
  sc.dim = 2;
  const auto d = synth_dataset(sc);
  const auto full = d.class_counts();
  const double full_total = std::accumulate(full.begin(), full.end(), 0.0);
  const std::size_t min_count = 40;
  std::size_t coverage_failures = 0;
  double worst_shift = 0;
  for (int seed = 0; seed < kSubsetSeeds; ++seed) {
    Rng rng(static_cast<std::uint64_t>(seed));
    const auto sub = make_supervised_subset(d, 0.25, min_count, rng);
    const auto counts = sub.class_counts();
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    for (std::size_t k = 0; k < counts.size(); ++k) {
      coverage_failures += counts[k] < min_count;
      worst_shift = std::max(worst_shift, std::abs(counts[k] / total - full[k] / full_total));
    }
  }
  // Every unsupervised index exactly once per epoch, for awkward sizes too.
  std::size_t bad_epochs = 0;
  for (auto [sup, unsup, batch] : {std::tuple{7, 100, 16}, {40, 40, 8}, {3, 50, 7}, {200, 37, 5}}) {
    CyclePair cp(sup, unsup, batch, 42);
    for (int epoch = 0; epoch < 3; ++epoch) {
      std::vector<std::size_t> seen;
      for (const auto& step : cp.epoch()) seen.insert(seen.end(), step.unsupervised.begin(), step.unsupervised.end());
      std::sort(seen.begin(), seen.end());
      std::vector<std::size_t> all(static_cast<std::size_t>(unsup));
      std::iota(all.begin(), all.end(), 0);
      bad_epochs += seen != all;
    }
  }
  return {coverage_failures == 0 && worst_shift <= kSubsetDistributionTol && bad_epochs == 0,
          std::to_string(coverage_failures) + " min-count misses, max class-share shift " +
              fmt("%.3f", worst_shift) + " over " + std::to_string(kSubsetSeeds) + " seeds; " +
              std::to_string(bad_epochs) + " cycle_pair epochs not covering U exactly once"};
}

Outcome reproducibility() {
  const auto dir = test::scratch_dir("acceptance_repro");
  SynthConfig sc;
  sc.sequences = 60;
  sc.dim = 8;
  sc.min_frames = 10;
  sc.max_frames = 16;
  const auto [pool, valid] = split_dataset(synth_dataset(sc), 48);
  Rng subset_rng(1);
  const auto sup = make_supervised_subset(pool, 0.25, 1, subset_rng);
  LadderConfig c;
  c.input_dim = 8;
  c.hidden_dim = 8;
  c.classes = 8;
  c.noise.variant = NoiseVariant::kRecurrent;
  TrainConfig tc;
  tc.batch_size = 8;
  tc.min_epochs = tc.max_epochs = 3;
  tc.seed = 5;
  const auto first = train(c, tc, sup, pool, valid, dir / "a");
  train(c, tc, sup, pool, valid, dir / "b");
  const bool csv_same = read_file(dir / "a" / "metrics.csv") == read_file(dir / "b" / "metrics.csv") &&
                        !read_file(dir / "a" / "metrics.csv").empty();

  save_dataset(pool, dir / "d1.lds");
  const auto d_back = load_dataset(dir / "d1.lds");
  save_dataset(d_back, dir / "d2.lds");
  const bool dataset_rt = d_back == pool && read_file(dir / "d1.lds") == read_file(dir / "d2.lds");

  const auto ck = load_checkpoint(dir / "a" / "last.ckpt");
  save_checkpoint(ck, dir / "c2.ckpt");
  bool ckpt_rt = read_file(dir / "a" / "last.ckpt") == read_file(dir / "c2.ckpt");
  ckpt_rt &= evaluate(ck.model, ck.params, valid).per == evaluate(c, first.last.params, valid).per;

  std::size_t rejected = 0, tried = 0;
  for (const auto& [file, is_ckpt] : {std::pair{dir / "d1.lds", false}, {dir / "a" / "last.ckpt", true}}) {
    const auto size = fs::file_size(file);
    for (std::size_t at : {std::size_t{12}, size / 2, size - 3}) {
      flip_byte(file, dir / "bad", at);
      ++tried;
      try {
        if (is_ckpt) load_checkpoint(dir / "bad");
        else load_dataset(dir / "bad");
      } catch (const ChecksumError&) {
        ++rejected;
      }
    }
  }
  return {csv_same && dataset_rt && ckpt_rt && rejected == tried,
          std::string("metrics CSV ") + (csv_same ? "identical" : "DIFFERS") + "; dataset round trip " +
              (dataset_rt ? "exact" : "BROKEN") + "; checkpoint round trip " + (ckpt_rt ? "exact" : "BROKEN") +
              "; " + std::to_string(rejected) + "/" + std::to_string(tried) + " corruptions rejected by checksum"};
}

Outcome feature_pipeline() {
  double worst = 0;
  for (std::size_t n : {13, 40}) {
    const auto m = dct_matrix(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double dot = 0;
        for (std::size_t k = 0; k < n; ++k) dot += m(k, i) * m(k, j);
        worst = std::max(worst, std::abs(dot - (i == j ? 1.0 : 0.0)));
      }
  }
  Tensor<double> constant(Shape{12, 5}, 0.7);
  const Tensor<double> d1 = deltas(constant), d2 = deltas(d1);
  bool deltas_zero = true;
  for (double v : d1.values()) deltas_zero &= v == 0.0;
  for (double v : d2.values()) deltas_zero &= v == 0.0;

  Rng rng(6);
  std::size_t bad_counts = 0;
  for (int i = 0; i < 500; ++i) {
    const std::size_t n = 320 + rng.uniform_index(20000);
    Waveform w;
    w.samples.assign(n, 0.0f);
    bad_counts += frame_signal(w).rows() != 1 + (n - 320) / 160;
  }

  const auto dir = test::scratch_dir("acceptance_features");
  Waveform w;
  for (int i = 0; i < 8000; ++i) w.samples.push_back(static_cast<float>(std::round(rng.normal() * 3000) / 32768.0));
  write_wav(dir / "x.wav", w);
  auto as_dataset = [&] {
    const auto f = featurize(read_wav(dir / "x.wav"));
    Dataset d;
    Tensor<float> t(f.shape());
    for (std::size_t k = 0; k < f.size(); ++k) t[k] = static_cast<float>(f[k]);
    d.examples.push_back({"x", t, std::nullopt});
    return d;
  };
  save_dataset(as_dataset(), dir / "a.lds");
  save_dataset(as_dataset(), dir / "b.lds");
  const bool deterministic = read_file(dir / "a.lds") == read_file(dir / "b.lds");

  return {worst < kDctTol && deltas_zero && bad_counts == 0 && deterministic,
          "DCT max |QᵀQ - I| = " + fmt("%.1e", worst) + "; constant deltas " + (deltas_zero ? "exactly 0" : "NONZERO") +
              "; " + std::to_string(bad_counts) + "/500 frame-count mismatches; pipeline " +
              (deterministic ? "byte-deterministic" : "NOT deterministic")};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "CTC oracle equivalence", ctc_oracle},
      {2, "full-model gradient check", gradient_check},
      {3, "degeneration identities", degeneration},
      {4, "normalisation contract", normalization},
      {5, "synthetic semi-supervised trend", synthetic_trend},
      {6, "metric correctness", metrics},
      {7, "data protocol", data_protocol},
      {8, "reproducibility and formats", reproducibility},
      {9, "feature pipeline", feature_pipeline},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.contains(c.id)) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("[%s] %d %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
