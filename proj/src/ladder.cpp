// Copyright 2026 The RLN Authors
// SPDX-License-Identifier: Apache-2.0

#include "rln/ladder.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace rln {

bool LadderConfig::has_denoising_cost() const {
  return decoder != DecoderKind::kNone &&
         std::any_of(lambdas.begin(), lambdas.end(), [](double l) { return l != 0.0; });
}

void LadderConfig::validate() const {
  if (input_dim == 0 || hidden_dim == 0) throw std::invalid_argument("layer widths must be positive");
  if (classes < 1) throw std::invalid_argument("need at least one class");
  if (combinator_hidden == 0) throw std::invalid_argument("combinator width must be positive");
  if (!(noise.sigma >= 0.0)) throw std::invalid_argument("sigma must be non-negative");
  for (const auto& s : layer_sigma) {
    if (s && !(*s >= 0.0)) throw std::invalid_argument("per-layer sigma must be non-negative");
  }
  for (double l : lambdas) {
    if (!(l >= 0.0) || !std::isfinite(l)) throw std::invalid_argument("lambdas must be finite and non-negative");
  }
  if (decoder == DecoderKind::kNone &&
      std::any_of(lambdas.begin(), lambdas.end(), [](double l) { return l != 0.0; })) {
    throw std::invalid_argument("a model without decoder needs all lambdas = 0");
  }
}

std::string to_string(DecoderKind kind) {
  switch (kind) {
    case DecoderKind::kNone: return "ND";
    case DecoderKind::kRecurrent: return "RD";
    case DecoderKind::kFeedForward: return "FFD";
  }
  return "?";
}

std::string to_string(NoiseVariant variant) {
  return variant == NoiseVariant::kRecurrent ? "RN" : "FFN";
}

DecoderKind parse_decoder(const std::string& text) {
  if (text == "ND") return DecoderKind::kNone;
  if (text == "RD") return DecoderKind::kRecurrent;
  if (text == "FFD") return DecoderKind::kFeedForward;
  throw std::invalid_argument("unknown decoder '" + text + "' (expected ND, RD or FFD)");
}

NoiseVariant parse_noise_variant(const std::string& text) {
  if (text == "FFN") return NoiseVariant::kFeedForward;
  if (text == "RN") return NoiseVariant::kRecurrent;
  throw std::invalid_argument("unknown noise scheme '" + text + "' (expected FFN or RN)");
}

std::string variant_name(const LadderConfig& config) {
  return to_string(config.decoder) + "-" + to_string(config.noise.variant);
}

GruParams ladder_gru(const LadderConfig& config) {
  return {"enc.gru", config.input_dim, config.hidden_dim};
}

DenseParams ladder_output(const LadderConfig& config) {
  return {"enc.out", config.hidden_dim, config.output_dim(), Activation::kSoftmax};
}

std::string decoder_weight(std::size_t layer) { return "dec." + std::to_string(layer) + ".V"; }
std::string decoder_recurrent(std::size_t layer) { return "dec." + std::to_string(layer) + ".O"; }
std::string combinator_prefix(std::size_t layer) { return "dec." + std::to_string(layer) + ".g"; }

namespace {

CombinatorParams combinator_params(const LadderConfig& config, std::size_t layer) {
  return {combinator_prefix(layer), config.combinator_hidden};
}

}  // namespace

template <std::floating_point T>
void init_combinator(ParameterStore<T>& store, const CombinatorParams& p, Rng& rng) {
  store.add(p.w1(), gaussian<T>(Shape{p.hidden, 3}, 1.0 / std::sqrt(3.0), rng));
  store.add(p.b1(), Tensor<T>(Shape{p.hidden}));
  store.add(p.w2(), gaussian<T>(Shape{p.hidden}, 1.0 / std::sqrt(static_cast<double>(p.hidden)), rng));
  store.add(p.b2(), Tensor<T>(Shape{1}));
}

template <std::floating_point T>
ParameterStore<T> init_ladder_params(const LadderConfig& config, Rng& rng) {
  config.validate();
  ParameterStore<T> store;
  init_gru(store, ladder_gru(config), rng);
  init_dense(store, ladder_output(config), rng);
  store.value(ladder_output(config).bias())[config.classes] = static_cast<T>(kBlankBiasInit);
  if (config.decoder == DecoderKind::kNone) return store;
  const auto w = config.widths();
  for (std::size_t l = kLadderLayers; l-- > 0;) {
    const std::size_t above = l + 1 < kLadderLayers ? w[l + 1] : w[l];
    store.add(decoder_weight(l),
              gaussian<T>(Shape{w[l], above}, 1.0 / std::sqrt(static_cast<double>(above)), rng));
    if (config.decoder == DecoderKind::kRecurrent) {
      store.add(decoder_recurrent(l),
                gaussian<T>(Shape{w[l], w[l]}, 1.0 / std::sqrt(static_cast<double>(w[l])), rng));
    }
    init_combinator(store, combinator_params(config, l), rng);
  }
  return store;
}

template <std::floating_point T>
std::vector<std::pair<std::size_t, std::size_t>> SequenceBatch<T>::valid_frames() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t t = 0; t < steps(); ++t) {
    for (std::size_t b = 0; b < size(); ++b) {
      if (t < lengths[b]) out.emplace_back(t, b);
    }
  }
  return out;
}

template <std::floating_point T>
SequenceBatch<T> make_batch(const std::vector<std::pair<const float*, std::size_t>>& sequences,
                            std::size_t dim, std::vector<LabelSeq> labels) {
  if (!labels.empty() && labels.size() != sequences.size()) {
    throw DimensionError("make_batch: label count differs from sequence count");
  }
  SequenceBatch<T> batch;
  std::size_t longest = 0;
  for (const auto& [data, frames] : sequences) {
    if (frames == 0) throw DimensionError("make_batch: empty sequence");
    batch.lengths.push_back(frames);
    longest = std::max(longest, frames);
  }
  const std::size_t rows = sequences.size();
  batch.frames.assign(longest, Tensor<T>(Shape{rows, dim}));
  for (std::size_t b = 0; b < rows; ++b) {
    const auto [data, frames] = sequences[b];
    for (std::size_t t = 0; t < frames; ++t) {
      std::copy_n(data + t * dim, dim, batch.frames[t].row(b).begin());
    }
  }
  batch.labels = std::move(labels);
  return batch;
}

template <std::floating_point T>
EncoderTrace<T> encode(Graph<T>& g, const SequenceBatch<T>& batch, const LadderConfig& config,
                       Rng& rng, EncodePasses passes) {
  if (batch.size() == 0 || batch.steps() == 0) throw DimensionError("encode: empty batch");
  if (batch.frames.front().cols() != config.input_dim) {
    throw DimensionError("encode: feature width " + std::to_string(batch.frames.front().cols()) +
                         " does not match input_dim " + std::to_string(config.input_dim));
  }
  const GruParams gru = ladder_gru(config);
  const DenseParams out = ladder_output(config);
  const std::size_t rows = batch.size();
  EncoderTrace<T> trace;

  std::vector<Var<T>> inputs;
  inputs.reserve(batch.steps());
  for (const auto& f : batch.frames) inputs.push_back(g.constant(f));

  if (passes != EncodePasses::kNoisyOnly) {
    Var<T> h = g.constant(Tensor<T>(Shape{rows, config.hidden_dim}));
    for (const Var<T>& x : inputs) {
      const GruStep<T> step = gru_step(g, x, h, gru);
      h = step.h;
      const LayerOutput<T> y = dense_forward(g, h, out);
      trace.layers[0].clean_z.push_back(x);
      trace.layers[1].clean_z.push_back(step.z);
      trace.layers[2].clean_z.push_back(y.z);
      trace.clean_y.push_back(y.h);
    }
  }

  if (passes != EncodePasses::kCleanOnly) {
    const NoiseScheme hidden_scheme{config.noise.variant, config.sigma_at(1)};
    Var<T> carry = g.constant(Tensor<T>(Shape{rows, config.hidden_dim}));
    for (const Var<T>& x : inputs) {
      const Var<T> x_noisy = add_noise(x, config.sigma_at(0), rng);
      const NoisyGruStep<T> step = gru_step_noisy(g, x_noisy, carry, gru, hidden_scheme, rng);
      carry = step.carry;
      const LayerOutput<T> y = dense_forward(g, step.h, out, NoiseSource{config.sigma_at(2), &rng});
      trace.layers[0].noisy_z.push_back(x_noisy);
      trace.layers[1].noisy_z.push_back(step.z);
      trace.layers[2].noisy_z.push_back(y.z);
      trace.noisy_y.push_back(y.h);
    }
  }
  return trace;
}

template <std::floating_point T>
Var<T> combinator(Graph<T>& g, Var<T> z_noisy, Var<T> u, const CombinatorParams& p) {
  const Tensor<T>& zv = z_noisy.value();
  const Tensor<T>& uv = u.value();
  if (zv.shape() != uv.shape()) {
    throw DimensionError("combinator: shapes differ, " + shape_string(zv.shape()) + " vs " +
                         shape_string(uv.shape()));
  }
  const Var<T> w1 = g.parameter(p.w1()), b1 = g.parameter(p.b1());
  const Var<T> w2 = g.parameter(p.w2()), b2 = g.parameter(p.b2());
  const std::size_t m = p.hidden;
  if (w1.value().size() != 3 * m || b1.value().size() != m || w2.value().size() != m) {
    throw DimensionError("combinator: parameter shapes do not match width " + std::to_string(m));
  }

  auto hidden = [](const Tensor<T>& W1, const Tensor<T>& B1, T z, T uu, std::size_t j) {
    return std::tanh(W1[3 * j] * z + W1[3 * j + 1] * uu + W1[3 * j + 2] * z * uu + B1[j]);
  };
  Tensor<T> out(zv.shape());
  // Hidden activations, kept for the backward pass.
  auto acts = std::make_shared<std::vector<T>>(out.size() * m);
  {
    const Tensor<T>& W1 = w1.value();
    const Tensor<T>& B1 = b1.value();
    const Tensor<T>& W2 = w2.value();
    const T bias = b2.value()[0];
    T* h = acts->data();
    for (std::size_t i = 0; i < out.size(); ++i) {
      T acc = bias;
      for (std::size_t j = 0; j < m; ++j, ++h) {
        *h = hidden(W1, B1, zv[i], uv[i], j);
        acc += W2[j] * *h;
      }
      out[i] = acc;
    }
  }
  const std::size_t iz = z_noisy.id(), iu = u.id();
  const std::size_t iw1 = w1.id(), ib1 = b1.id(), iw2 = w2.id(), ib2 = b2.id();
  return g.emit("combinator", std::move(out), {iz, iu, iw1, ib1, iw2, ib2},
                [=](Graph<T>& gr, std::size_t self) {
    const Tensor<T>& go = gr.grad(self);
    const Tensor<T>& zv = gr.value(iz);
    const Tensor<T>& uv = gr.value(iu);
    const Tensor<T>& W1 = gr.value(iw1);
    const Tensor<T>& W2 = gr.value(iw2);
    const T* hs = acts->data();
    const bool want_z = gr.needs_grad(iz), want_u = gr.needs_grad(iu);
    const bool want_params = gr.needs_grad(iw1);
    std::vector<T> dw1(3 * m), db1(m), dw2(m);
    T db2 = 0;
    for (std::size_t i = 0; i < go.size(); ++i) {
      const T z = zv[i], uu = uv[i], gi = go[i];
      T dz = 0, du = 0;
      for (std::size_t j = 0; j < m; ++j) {
        const T h = hs[i * m + j];
        const T dpre = gi * W2[j] * (T{1} - h * h);
        dz += dpre * (W1[3 * j] + W1[3 * j + 2] * uu);
        du += dpre * (W1[3 * j + 1] + W1[3 * j + 2] * z);
        dw1[3 * j] += dpre * z;
        dw1[3 * j + 1] += dpre * uu;
        dw1[3 * j + 2] += dpre * z * uu;
        db1[j] += dpre;
        dw2[j] += gi * h;
      }
      db2 += gi;
      if (want_z) gr.grad(iz)[i] += dz;
      if (want_u) gr.grad(iu)[i] += du;
    }
    if (want_params) {
      for (std::size_t k = 0; k < 3 * m; ++k) gr.grad(iw1)[k] += dw1[k];
      for (std::size_t j = 0; j < m; ++j) {
        gr.grad(ib1)[j] += db1[j];
        gr.grad(iw2)[j] += dw2[j];
      }
      gr.grad(ib2)[0] += db2;
    }
  });
}

namespace {

template <std::floating_point T>
Reconstructions<T> run_decoder(Graph<T>& g, const EncoderTrace<T>& trace,
                               const LadderConfig& config, bool recurrent) {
  if (config.decoder == DecoderKind::kNone) {
    throw std::invalid_argument("decode: configuration has no decoder");
  }
  const std::size_t steps = trace.noisy_y.size();
  for (const auto& layer : trace.layers) {
    if (layer.noisy_z.size() != steps) throw DimensionError("decode: incomplete encoder trace");
  }
  Reconstructions<T> recon;
  for (std::size_t l = kLadderLayers; l-- > 0;) {
    const Var<T> v = g.parameter(decoder_weight(l));
    const Var<T> o = recurrent ? g.parameter(decoder_recurrent(l)) : Var<T>{};
    const CombinatorParams comb = combinator_params(config, l);
    const std::vector<Var<T>>& from_above = l + 1 < kLadderLayers ? recon[l + 1] : trace.noisy_y;
    recon[l].reserve(steps);
    for (std::size_t t = 0; t < steps; ++t) {
      Var<T> u = matmul_transposed(from_above[t], v);
      // The state before the first step is zero, so its O term vanishes.
      if (recurrent && t > 0) u = u + matmul_transposed(recon[l][t - 1], o);
      recon[l].push_back(combinator(g, trace.layers[l].noisy_z[t], u, comb));
    }
  }
  return recon;
}

}  // namespace

template <std::floating_point T>
Reconstructions<T> decode_recurrent(Graph<T>& g, const EncoderTrace<T>& trace,
                                    const LadderConfig& config) {
  return run_decoder(g, trace, config, true);
}

template <std::floating_point T>
Reconstructions<T> decode_feedforward(Graph<T>& g, const EncoderTrace<T>& trace,
                                      const LadderConfig& config) {
  return run_decoder(g, trace, config, false);
}

template <std::floating_point T>
Reconstructions<T> decode(Graph<T>& g, const EncoderTrace<T>& trace, const LadderConfig& config) {
  return run_decoder(g, trace, config, config.decoder == DecoderKind::kRecurrent);
}

template <std::floating_point T>
NormStats<T> norm_stats(Graph<T>& g, const EncoderTrace<T>& trace,
                        const std::vector<std::pair<std::size_t, std::size_t>>& frames) {
  (void)g;
  if (frames.empty()) throw DimensionError("norm_stats: no frames");
  NormStats<T> stats;
  for (std::size_t l = 0; l < kLadderLayers; ++l) {
    const Var<T> clean = gather_rows(trace.layers[l].clean_z, frames);
    stats.mean[l] = col_mean(clean);
    stats.stddev[l] = col_std(clean, stats.mean[l], static_cast<T>(kNormStdFloor));
  }
  return stats;
}

template <std::floating_point T>
Var<T> denoising_cost(Graph<T>& g, const EncoderTrace<T>& trace, const Reconstructions<T>& recon,
                      const std::array<double, kLadderLayers>& lambdas, const NormStats<T>& stats,
                      const std::vector<std::pair<std::size_t, std::size_t>>& frames) {
  Var<T> total;
  for (std::size_t l = 0; l < kLadderLayers; ++l) {
    if (lambdas[l] == 0.0) continue;
    if (recon[l].size() != trace.layers[l].clean_z.size()) {
      throw DimensionError("denoising_cost: reconstruction length differs from trace");
    }
    const Var<T> clean = gather_rows(trace.layers[l].clean_z, frames);
    const Var<T> estimate = gather_rows(recon[l], frames);
    const Var<T> target = div_row(sub_row(clean, stats.mean[l]), stats.stddev[l]);
    const Var<T> normalized = div_row(sub_row(estimate, stats.mean[l]), stats.stddev[l]);
    const Var<T> cost = scale(mean(square(target - normalized)), static_cast<T>(lambdas[l]));
    total = total.valid() ? total + cost : cost;
  }
  return total.valid() ? total : g.constant(Tensor<T>::scalar(T{0}));
}

namespace {

template <std::floating_point T>
Var<T> batch_denoising_cost(Graph<T>& g, const EncoderTrace<T>& trace, const SequenceBatch<T>& batch,
                            const LadderConfig& config) {
  const auto frames = batch.valid_frames();
  const Reconstructions<T> recon = decode(g, trace, config);
  const NormStats<T> stats = norm_stats(g, trace, frames);
  return denoising_cost(g, trace, recon, config.lambdas, stats, frames);
}

}  // namespace

template <std::floating_point T>
LossParts<T> semi_supervised_loss(Graph<T>& g, const SequenceBatch<T>& labeled,
                                  const SequenceBatch<T>* unlabeled, const LadderConfig& config,
                                  Rng& rng) {
  const bool dae = config.has_denoising_cost();
  const bool have_labeled = labeled.size() > 0;
  const bool have_unlabeled = unlabeled && unlabeled->size() > 0;
  if (!have_labeled && !dae) {
    throw std::invalid_argument("semi_supervised_loss: no labeled data and no denoising cost");
  }
  if (have_labeled && !labeled.labeled()) {
    throw std::invalid_argument("semi_supervised_loss: labeled batch carries no labels");
  }

  LossParts<T> parts;
  std::vector<Var<T>> dae_terms;
  if (have_labeled) {
    const EncoderTrace<T> trace =
        encode(g, labeled, config, rng, dae ? EncodePasses::kBoth : EncodePasses::kNoisyOnly);
    parts.supervised = ctc_loss_batch(trace.noisy_logits(), labeled.labels, labeled.lengths);
    if (dae) dae_terms.push_back(batch_denoising_cost(g, trace, labeled, config));
  }
  if (dae && (have_unlabeled || !have_labeled)) {
    if (!have_unlabeled) throw std::invalid_argument("semi_supervised_loss: no data");
    const EncoderTrace<T> trace = encode(g, *unlabeled, config, rng, EncodePasses::kBoth);
    dae_terms.push_back(batch_denoising_cost(g, trace, *unlabeled, config));
  }

  if (dae_terms.empty()) {
    parts.denoising = g.constant(Tensor<T>::scalar(T{0}));
  } else if (dae_terms.size() == 1) {
    parts.denoising = dae_terms[0];
  } else {
    parts.denoising = scale(dae_terms[0] + dae_terms[1], T{0.5});
  }
  if (!have_labeled) {
    parts.supervised = g.constant(Tensor<T>::scalar(T{0}));
    parts.total = parts.denoising;
  } else {
    parts.total = dae ? parts.supervised + parts.denoising : parts.supervised;
  }
  return parts;
}

#define RLN_INSTANTIATE(T)                                                                       \
  template struct SequenceBatch<T>;                                                               \
  template ParameterStore<T> init_ladder_params(const LadderConfig&, Rng&);                       \
  template SequenceBatch<T> make_batch(const std::vector<std::pair<const float*, std::size_t>>&,  \
                                       std::size_t, std::vector<LabelSeq>);                       \
  template EncoderTrace<T> encode(Graph<T>&, const SequenceBatch<T>&, const LadderConfig&, Rng&,  \
                                  EncodePasses);                                                  \
  template void init_combinator(ParameterStore<T>&, const CombinatorParams&, Rng&);               \
  template Var<T> combinator(Graph<T>&, Var<T>, Var<T>, const CombinatorParams&);                 \
  template Reconstructions<T> decode_recurrent(Graph<T>&, const EncoderTrace<T>&,                 \
                                               const LadderConfig&);                              \
  template Reconstructions<T> decode_feedforward(Graph<T>&, const EncoderTrace<T>&,               \
                                                 const LadderConfig&);                            \
  template Reconstructions<T> decode(Graph<T>&, const EncoderTrace<T>&, const LadderConfig&);     \
  template NormStats<T> norm_stats(Graph<T>&, const EncoderTrace<T>&,                             \
                                   const std::vector<std::pair<std::size_t, std::size_t>>&);      \
  template Var<T> denoising_cost(Graph<T>&, const EncoderTrace<T>&, const Reconstructions<T>&,    \
                                 const std::array<double, kLadderLayers>&, const NormStats<T>&,   \
                                 const std::vector<std::pair<std::size_t, std::size_t>>&);        \
  template LossParts<T> semi_supervised_loss(Graph<T>&, const SequenceBatch<T>&,                  \
                                             const SequenceBatch<T>*, const LadderConfig&, Rng&);

RLN_INSTANTIATE(float)
RLN_INSTANTIATE(double)

#undef RLN_INSTANTIATE

}  // namespace rln
