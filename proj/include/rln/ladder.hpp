// Copyright 2026 The RLN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rln/ctc.hpp"
#include "rln/graph.hpp"
#include "rln/layers.hpp"
#include "rln/rng.hpp"

namespace rln {

/// ND: encoder only (the supervised baseline). RD: recurrent decoder.
/// FFD: feed-forward decoder.
enum class DecoderKind { kNone, kRecurrent, kFeedForward };

/// Layers of the ladder: 0 is the input, 1 the GRU, 2 the softmax output.
inline constexpr std::size_t kLadderLayers = 3;

struct LadderConfig {
  std::size_t input_dim = 39;
  std::size_t hidden_dim = 192;
  std::size_t classes = 39;  ///< K; the output layer has K + 1 units, blank last
  DecoderKind decoder = DecoderKind::kRecurrent;
  NoiseScheme noise{NoiseVariant::kFeedForward, 0.3};
  /// Per-site override of noise.sigma (input, hidden, output).
  std::array<std::optional<double>, kLadderLayers> layer_sigma{};
  std::array<double, kLadderLayers> lambdas{1000.0, 10.0, 0.1};
  std::size_t combinator_hidden = 4;

  std::size_t output_dim() const { return classes + 1; }
  std::array<std::size_t, kLadderLayers> widths() const {
    return {input_dim, hidden_dim, output_dim()};
  }
  double sigma_at(std::size_t layer) const {
    return layer_sigma[layer].value_or(noise.sigma);
  }
  /// True when the denoising cost contributes (a decoder and some λ > 0).
  bool has_denoising_cost() const;

  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
};

std::string to_string(DecoderKind kind);
std::string to_string(NoiseVariant variant);
DecoderKind parse_decoder(const std::string& text);
NoiseVariant parse_noise_variant(const std::string& text);
/// "RD-FFN" style name of the six ladder variants.
std::string variant_name(const LadderConfig& config);

/// Initial bias of the blank output unit. An untrained model then mostly
/// emits blanks instead of a new symbol at nearly every frame.
inline constexpr double kBlankBiasInit = 2.0;

/// Parameter naming shared by every ladder operation.
GruParams ladder_gru(const LadderConfig& config);
DenseParams ladder_output(const LadderConfig& config);
std::string decoder_weight(std::size_t layer);      ///< V, [w_l x w_{l+1}]
std::string decoder_recurrent(std::size_t layer);   ///< O, [w_l x w_l]
std::string combinator_prefix(std::size_t layer);

/// Allocates and initialises every tensor the configuration uses.
template <std::floating_point T>
ParameterStore<T> init_ladder_params(const LadderConfig& config, Rng& rng);

/// Time-major, zero-padded batch of sequences.
template <std::floating_point T>
struct SequenceBatch {
  std::vector<Tensor<T>> frames;   ///< per step: [B x D]
  std::vector<std::size_t> lengths;
  std::vector<LabelSeq> labels;    ///< empty for unlabeled batches

  std::size_t size() const { return lengths.size(); }
  std::size_t steps() const { return frames.size(); }
  bool labeled() const { return !labels.empty(); }
  /// (step, row) of every non-padding frame, step-major.
  std::vector<std::pair<std::size_t, std::size_t>> valid_frames() const;
};

/// Builds a padded batch from row-major [T_i x D] feature buffers.
template <std::floating_point T>
SequenceBatch<T> make_batch(const std::vector<std::pair<const float*, std::size_t>>& sequences,
                            std::size_t dim, std::vector<LabelSeq> labels = {});

template <std::floating_point T>
struct LayerTrace {
  std::vector<Var<T>> clean_z;  ///< per step
  std::vector<Var<T>> noisy_z;
};

template <std::floating_point T>
struct EncoderTrace {
  std::array<LayerTrace<T>, kLadderLayers> layers;
  std::vector<Var<T>> clean_y;  ///< softmax outputs, clean pass
  std::vector<Var<T>> noisy_y;  ///< softmax outputs, noisy pass

  const std::vector<Var<T>>& clean_logits() const { return layers[2].clean_z; }
  const std::vector<Var<T>>& noisy_logits() const { return layers[2].noisy_z; }
};

enum class EncodePasses { kBoth, kCleanOnly, kNoisyOnly };

/// Clean and noisy encoder passes with shared parameters. Layer-0 entries are
/// the input and its noisy copy. Noise enters the input and the output
/// preactivations always, and the GRU candidate preactivation under RN.
template <std::floating_point T>
EncoderTrace<T> encode(Graph<T>& g, const SequenceBatch<T>& batch, const LadderConfig& config,
                       Rng& rng, EncodePasses passes = EncodePasses::kBoth);

/// Combinator g(z~, u): one per-unit MLP on (z~, u, z~ * u) with a tanh hidden
/// layer and linear output, weights shared across units and steps.
struct CombinatorParams {
  std::string prefix;
  std::size_t hidden = 4;

  std::string w1() const { return prefix + ".W1"; }  ///< [hidden x 3]
  std::string b1() const { return prefix + ".b1"; }  ///< [hidden]
  std::string w2() const { return prefix + ".w2"; }  ///< [hidden]
  std::string b2() const { return prefix + ".b2"; }  ///< [1]
};

template <std::floating_point T>
void init_combinator(ParameterStore<T>& store, const CombinatorParams& p, Rng& rng);

template <std::floating_point T>
Var<T> combinator(Graph<T>& g, Var<T> z_noisy, Var<T> u, const CombinatorParams& p);

/// Per-layer, per-step reconstructions ẑ.
template <std::floating_point T>
using Reconstructions = std::array<std::vector<Var<T>>, kLadderLayers>;

/// u_t = V ẑ^(l+1)_t + O ẑ^(l)_{t-1}, ẑ^(l)_t = g(z~^(l)_t, u_t), top-down and
/// forward in time from a zero state. The top layer reads the noisy softmax
/// output in place of ẑ^(3).
template <std::floating_point T>
Reconstructions<T> decode_recurrent(Graph<T>& g, const EncoderTrace<T>& trace,
                                    const LadderConfig& config);

/// As decode_recurrent without the O term.
template <std::floating_point T>
Reconstructions<T> decode_feedforward(Graph<T>& g, const EncoderTrace<T>& trace,
                                      const LadderConfig& config);

/// Dispatches on config.decoder.
template <std::floating_point T>
Reconstructions<T> decode(Graph<T>& g, const EncoderTrace<T>& trace, const LadderConfig& config);

/// Batch statistics of the clean preactivations, per layer, shape [w_l].
template <std::floating_point T>
struct NormStats {
  std::array<Var<T>, kLadderLayers> mean;
  std::array<Var<T>, kLadderLayers> stddev;
};

inline constexpr double kNormStdFloor = 1e-6;

/// Mean and population std of clean z^(l) over the valid frames of the batch,
/// std floored at kNormStdFloor. Differentiable.
template <std::floating_point T>
NormStats<T> norm_stats(Graph<T>& g, const EncoderTrace<T>& trace,
                        const std::vector<std::pair<std::size_t, std::size_t>>& frames);

/// sum_l λ_l · mean over frames and units of (((z - μ) / s) - ((ẑ - μ) / s))².
/// Layers with λ_l = 0 are skipped entirely.
template <std::floating_point T>
Var<T> denoising_cost(Graph<T>& g, const EncoderTrace<T>& trace, const Reconstructions<T>& recon,
                      const std::array<double, kLadderLayers>& lambdas, const NormStats<T>& stats,
                      const std::vector<std::pair<std::size_t, std::size_t>>& frames);

template <std::floating_point T>
struct LossParts {
  Var<T> total;
  Var<T> supervised;  ///< C_sup, CTC on the noisy logits of the labeled batch
  Var<T> denoising;   ///< C_DAE, averaged over the labeled and unlabeled batches
};

/// C_semsup = C_sup + C_DAE. `unlabeled` may be null or empty; `labeled` may be
/// empty only when the denoising cost is active.
template <std::floating_point T>
LossParts<T> semi_supervised_loss(Graph<T>& g, const SequenceBatch<T>& labeled,
                                  const SequenceBatch<T>* unlabeled, const LadderConfig& config,
                                  Rng& rng);

}  // namespace rln
