// Copyright 2026 The RLN Authors
// SPDX-License-Identifier: Apache-2.0

#include "rln/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <system_error>

#include "rln/binary_io.hpp"
#include "rln/errors.hpp"

namespace rln {

template <std::floating_point T>
void adam_step(ParameterStore<T>& params, AdamState<T>& state) {
  auto& entries = params.entries();
  for (const auto& e : entries) {
    for (T g : e.grad.values()) {
      if (!std::isfinite(g)) throw NumericError("non-finite gradient for parameter '" + e.name + "'");
    }
  }
  if (state.m.empty()) {
    for (const auto& e : entries) {
      state.m.emplace_back(e.value.shape());
      state.v.emplace_back(e.value.shape());
    }
  }
  if (state.m.size() != entries.size()) throw DimensionError("adam: state does not match the parameters");
  const AdamConfig& h = state.hyper;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(h.beta1, t);
  const double c2 = 1.0 - std::pow(h.beta2, t);
  for (std::size_t p = 0; p < entries.size(); ++p) {
    auto& e = entries[p];
    auto& m = state.m[p];
    auto& v = state.v[p];
    if (m.shape() != e.value.shape()) throw DimensionError("adam: moment shape differs for '" + e.name + "'");
    for (std::size_t i = 0; i < e.value.size(); ++i) {
      const double g = e.grad[i];
      const double mi = h.beta1 * m[i] + (1.0 - h.beta1) * g;
      const double vi = h.beta2 * v[i] + (1.0 - h.beta2) * g * g;
      m[i] = static_cast<T>(mi);
      v[i] = static_cast<T>(vi);
      const double mhat = mi / c1, vhat = vi / c2;
      e.value[i] = static_cast<T>(e.value[i] - h.lr * mhat / (std::sqrt(vhat) + h.eps));
    }
  }
}

template <std::floating_point T>
double clip_gradients(ParameterStore<T>& params, double max_norm) {
  double sq = 0.0;
  for (const auto& e : params.entries())
    for (T g : e.grad.values()) sq += static_cast<double>(g) * g;
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const auto s = static_cast<T>(max_norm / norm);
    for (auto& e : params.entries())
      for (T& g : e.grad.values()) g *= s;
  }
  return norm;
}

template void adam_step(ParameterStore<float>&, AdamState<float>&);
template void adam_step(ParameterStore<double>&, AdamState<double>&);
template double clip_gradients(ParameterStore<float>&, double);
template double clip_gradients(ParameterStore<double>&, double);

std::string metrics_row(const EpochMetrics& m) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%zu,%.9g,%.9g,%.9g,%.9g,%.3f", m.epoch, m.c_sup, m.c_dae, m.total,
                m.valid_per, m.seconds);
  return buf;
}

// Checkpoint file layout, after the magic and version:
//   model config, parameters (name, shape, f32 values), Adam hyper-parameters,
//   step and moments, rng and cycle states, epoch bookkeeping, metadata.
namespace {

constexpr std::string_view kCheckpointMagic = "LDRCKPT1";

void write_config(io::ByteWriter& w, const LadderConfig& c) {
  w.u64(c.input_dim);
  w.u64(c.hidden_dim);
  w.u64(c.classes);
  w.u8(static_cast<std::uint8_t>(c.decoder));
  w.u8(static_cast<std::uint8_t>(c.noise.variant));
  w.f64(c.noise.sigma);
  for (const auto& s : c.layer_sigma) {
    w.u8(s ? 1 : 0);
    w.f64(s.value_or(0.0));
  }
  for (double l : c.lambdas) w.f64(l);
  w.u64(c.combinator_hidden);
}

LadderConfig read_config(io::ByteReader& r) {
  LadderConfig c;
  c.input_dim = r.u64();
  c.hidden_dim = r.u64();
  c.classes = r.u64();
  const auto decoder = r.u8(), variant = r.u8();
  if (decoder > 2 || variant > 1) throw FormatError("checkpoint: bad decoder or noise code");
  c.decoder = static_cast<DecoderKind>(decoder);
  c.noise.variant = static_cast<NoiseVariant>(variant);
  c.noise.sigma = r.f64();
  for (auto& s : c.layer_sigma) {
    const bool has = r.u8() != 0;
    const double v = r.f64();
    if (has) s = v;
  }
  for (double& l : c.lambdas) l = r.f64();
  c.combinator_hidden = r.u64();
  return c;
}

void write_tensor(io::ByteWriter& w, const Tensor<Real>& t) {
  w.u32(static_cast<std::uint32_t>(t.rank()));
  for (auto d : t.shape()) w.u64(d);
  for (Real v : t.values()) w.f32(v);
}

Tensor<Real> read_tensor(io::ByteReader& r) {
  Shape shape(r.u32());
  if (shape.size() > 8) throw FormatError("checkpoint: implausible tensor rank");
  for (auto& d : shape) d = r.u64();
  const std::size_t n = shape_size(shape);
  if (n * 4 > r.remaining()) throw FormatError("checkpoint: payload ends unexpectedly");
  Tensor<Real> t(shape);
  for (Real& v : t.values()) v = r.f32();
  return t;
}

}  // namespace

void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path) {
  io::ByteWriter w;
  w.raw(kCheckpointMagic);
  w.u32(kCheckpointVersion);
  write_config(w, c.model);
  w.u32(static_cast<std::uint32_t>(c.params.size()));
  for (const auto& e : c.params.entries()) {
    w.str(e.name);
    write_tensor(w, e.value);
  }
  w.f64(c.adam.hyper.lr);
  w.f64(c.adam.hyper.beta1);
  w.f64(c.adam.hyper.beta2);
  w.f64(c.adam.hyper.eps);
  w.u64(c.adam.step);
  w.u32(static_cast<std::uint32_t>(c.adam.m.size()));
  for (std::size_t i = 0; i < c.adam.m.size(); ++i) {
    write_tensor(w, c.adam.m[i]);
    write_tensor(w, c.adam.v[i]);
  }
  w.str(c.rng_state);
  w.str(c.cycle_state);
  w.u64(c.epoch);
  w.f64(c.best_valid_per);
  w.u64(c.best_epoch);
  w.u32(static_cast<std::uint32_t>(c.metadata.size()));
  for (const auto& [k, v] : c.metadata) {
    w.str(k);
    w.str(v);
  }
  w.save(path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  auto r = io::ByteReader::open(path, kCheckpointMagic);
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw FormatError(path.string() + ": unsupported checkpoint version " + std::to_string(version) +
                      " (this build reads version " + std::to_string(kCheckpointVersion) + ")");
  }
  Checkpoint c;
  c.model = read_config(r);
  try {
    c.model.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(path.string() + ": invalid model configuration: " + e.what());
  }
  // The parameter layout must be exactly what the configuration implies.
  Rng dummy(0);
  const Model expected = init_ladder_params<Real>(c.model, dummy);
  const std::uint32_t count = r.u32();
  if (count != expected.size()) throw FormatError(path.string() + ": parameter count does not match the model");
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = r.str();
    Tensor<Real> value = read_tensor(r);
    const auto& want = expected.entries()[i];
    if (name != want.name || value.shape() != want.value.shape()) {
      throw FormatError(path.string() + ": parameter '" + name + "' " + shape_string(value.shape()) +
                        " does not match the model's '" + want.name + "' " + shape_string(want.value.shape()));
    }
    c.params.add(name, std::move(value));
  }
  c.adam.hyper = {r.f64(), r.f64(), r.f64(), r.f64()};
  c.adam.step = r.u64();
  const std::uint32_t moments = r.u32();
  if (moments != 0 && moments != count) throw FormatError(path.string() + ": Adam state does not match the model");
  for (std::uint32_t i = 0; i < moments; ++i) {
    c.adam.m.push_back(read_tensor(r));
    c.adam.v.push_back(read_tensor(r));
    if (c.adam.m.back().shape() != c.params.entries()[i].value.shape() ||
        c.adam.v.back().shape() != c.params.entries()[i].value.shape()) {
      throw FormatError(path.string() + ": Adam moment shape mismatch");
    }
  }
  c.rng_state = r.str();
  c.cycle_state = r.str();
  c.epoch = r.u64();
  c.best_valid_per = r.f64();
  c.best_epoch = r.u64();
  const std::uint32_t meta = r.u32();
  for (std::uint32_t i = 0; i < meta; ++i) {
    std::string k = r.str();
    c.metadata[std::move(k)] = r.str();
  }
  r.finish();
  return c;
}

SequenceBatch<Real> gather_batch(const Dataset& d, const std::vector<std::size_t>& indices, bool labeled) {
  std::vector<std::pair<const float*, std::size_t>> seqs;
  std::vector<LabelSeq> labels;
  seqs.reserve(indices.size());
  for (auto i : indices) {
    const auto& e = d.examples.at(i);
    seqs.emplace_back(e.features.data(), e.frames());
    if (labeled) {
      if (!e.labels) throw DataError("example '" + e.id + "' has no labels");
      labels.push_back(*e.labels);
    }
  }
  return make_batch<Real>(seqs, d.feature_dim(), std::move(labels));
}

EvalResult evaluate(const LadderConfig& config, const Model& params, const Dataset& d, std::size_t batch_size) {
  if (d.size() == 0) throw DataError("evaluate: empty dataset");
  if (!d.fully_labeled()) throw DataError("evaluate: dataset contains unlabeled examples");
  if (d.feature_dim() != config.input_dim) {
    throw DimensionError("evaluate: dataset feature width " + std::to_string(d.feature_dim()) +
                         " differs from the model's " + std::to_string(config.input_dim));
  }
  if (batch_size == 0) throw std::invalid_argument("evaluate: batch size must be positive");
  // Length-sorted batches keep padding small.
  std::vector<std::size_t> order(d.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return d.examples[a].frames() < d.examples[b].frames(); });

  Model store = params;  // graphs write gradients into their store
  EvalResult out;
  out.hypotheses.resize(d.size());
  Rng unused(0);
  const std::size_t width = config.output_dim();
  for (std::size_t begin = 0; begin < order.size(); begin += batch_size) {
    const std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                       order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), begin + batch_size)));
    const SequenceBatch<Real> batch = gather_batch(d, idx, false);
    Graph<Real> g(&store);
    const EncoderTrace<Real> trace = encode(g, batch, config, unused, EncodePasses::kCleanOnly);
    const auto& logits = trace.clean_logits();
    for (std::size_t b = 0; b < idx.size(); ++b) {
      Tensor<Real> seq(Shape{batch.lengths[b], width});
      for (std::size_t t = 0; t < batch.lengths[b]; ++t) {
        const auto row = logits[t].value().row(b);
        std::copy(row.begin(), row.end(), seq.row(t).begin());
      }
      out.hypotheses[idx[b]] = best_path_decode(seq);
    }
  }
  std::vector<LabelSeq> refs;
  refs.reserve(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto& ref = *d.examples[i].labels;
    refs.push_back(ref);
    out.distances.push_back(levenshtein(ref, out.hypotheses[i]));
    out.reference_length += ref.size();
  }
  out.per = phoneme_error_rate(refs, out.hypotheses);
  return out;
}

namespace {

void check_dataset(const Dataset& d, const LadderConfig& config, const char* role, bool needs_labels) {
  if (d.size() == 0) throw DataError(std::string(role) + " set is empty");
  if (d.feature_dim() != config.input_dim) {
    throw DataError(std::string(role) + " set has feature width " + std::to_string(d.feature_dim()) +
                    ", the model expects " + std::to_string(config.input_dim));
  }
  if (d.classes() != 0 && d.classes() != config.classes) {
    throw DataError(std::string(role) + " set has " + std::to_string(d.classes()) + " classes, the model " +
                    std::to_string(config.classes));
  }
  if (needs_labels && !d.fully_labeled()) throw DataError(std::string(role) + " set has unlabeled examples");
}

}  // namespace

TrainResult train(const LadderConfig& config, const TrainConfig& tc, const Dataset& supervised,
                  const Dataset& unsupervised, const Dataset& valid,
                  const std::optional<std::filesystem::path>& out_dir, const EpochCallback& on_epoch) {
  config.validate();
  check_dataset(supervised, config, "supervised", true);
  check_dataset(unsupervised, config, "unsupervised", false);
  check_dataset(valid, config, "validation", true);
  if (tc.batch_size == 0) throw std::invalid_argument("batch size must be positive");
  if (tc.max_epochs == 0) throw std::invalid_argument("max_epochs must be positive");

  Rng rng(tc.seed);
  Model params = init_ladder_params<Real>(config, rng);
  CyclePair cycle(supervised.size(), unsupervised.size(), tc.batch_size, rng.next_u64());
  AdamState<Real> adam;
  adam.hyper = tc.adam;
  const bool dae = config.has_denoising_cost();

  std::ofstream csv;
  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    csv.open(*out_dir / "metrics.csv", std::ios::trunc);
    if (!csv) throw std::system_error(errno, std::generic_category(), "cannot write metrics.csv");
    csv << kMetricsHeader << '\n' << std::flush;
  }

  auto snapshot = [&](std::size_t epoch, double best_per, std::size_t best_epoch) {
    Checkpoint c;
    c.model = config;
    c.params = params;
    c.adam = adam;
    c.rng_state = rng.state();
    c.cycle_state = cycle.state();
    c.epoch = epoch;
    c.best_valid_per = best_per;
    c.best_epoch = best_epoch;
    c.metadata["seed"] = std::to_string(tc.seed);
    c.metadata["supervised_sequences"] = std::to_string(supervised.size());
    return c;
  };

  TrainResult result;
  double best_per = INFINITY;
  std::size_t best_epoch = 0;
  for (std::size_t epoch = 1; epoch <= tc.max_epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    EpochMetrics m;
    m.epoch = epoch;
    const auto steps = cycle.epoch();
    for (const auto& step : steps) {
      const SequenceBatch<Real> labeled = gather_batch(supervised, step.supervised, true);
      SequenceBatch<Real> unlabeled;
      if (dae) unlabeled = gather_batch(unsupervised, step.unsupervised, false);
      Graph<Real> g(&params);
      const LossParts<Real> parts = semi_supervised_loss(g, labeled, dae ? &unlabeled : nullptr, config, rng);
      if (!std::isfinite(parts.total.value()[0])) {
        throw NumericError("non-finite loss in epoch " + std::to_string(epoch));
      }
      g.backward(parts.total);
      if (tc.clip_norm > 0.0) clip_gradients(params, tc.clip_norm);
      adam_step(params, adam);
      m.c_sup += parts.supervised.value()[0];
      m.c_dae += parts.denoising.value()[0];
      m.total += parts.total.value()[0];
    }
    const double n = static_cast<double>(steps.size());
    m.c_sup /= n;
    m.c_dae /= n;
    m.total /= n;
    m.valid_per = evaluate(config, params, valid, std::max<std::size_t>(tc.batch_size, 32)).per;
    if (tc.log_seconds) {
      m.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    result.metrics.push_back(m);

    const bool improved = m.valid_per < best_per;
    if (improved) {
      best_per = m.valid_per;
      best_epoch = epoch;
      result.best = snapshot(epoch, best_per, best_epoch);
      if (out_dir) save_checkpoint(result.best, *out_dir / "best.ckpt");
    }
    if (csv.is_open()) csv << metrics_row(m) << '\n' << std::flush;

    const bool patience_out = epoch >= tc.min_epochs && epoch - best_epoch >= tc.patience;
    const bool stop_requested = on_epoch && !on_epoch(m);
    if (patience_out || stop_requested || epoch == tc.max_epochs) break;
  }
  result.last = snapshot(result.metrics.back().epoch, best_per, best_epoch);
  if (out_dir) save_checkpoint(result.last, *out_dir / "last.ckpt");
  return result;
}

}  // namespace rln
