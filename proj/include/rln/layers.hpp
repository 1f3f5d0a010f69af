// Copyright 2026 The RLN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "rln/graph.hpp"
#include "rln/rng.hpp"

namespace rln {

enum class Activation { kLinear, kTanh, kSoftmax };

/// Where fresh Gaussian noise enters the encoder.
///
/// kFeedForward (FFN): only feed-forward layers (input and dense output) are
/// perturbed; the recurrent layer sees noise only through its noisy input.
/// kRecurrent (RN): the recurrent layer additionally perturbs its candidate
/// preactivation and output, never its recurrent carry.
enum class NoiseVariant { kFeedForward, kRecurrent };

struct NoiseScheme {
  NoiseVariant variant = NoiseVariant::kFeedForward;
  double sigma = 0.0;
};

/// Noise to add at one injection site.
struct NoiseSource {
  double sigma = 0.0;
  Rng* rng = nullptr;
};

/// Names and sizes of a dense layer whose tensors live in a ParameterStore:
/// weight [out x in] and bias [out].
struct DenseParams {
  std::string prefix;
  std::size_t in = 0;
  std::size_t out = 0;
  Activation activation = Activation::kLinear;

  std::string weight() const { return prefix + ".W"; }
  std::string bias() const { return prefix + ".b"; }
};

/// Standard GRU parameters: input weights [H x D], recurrent weights [H x H]
/// and biases [H] for the update gate (z), reset gate (r) and candidate (c).
struct GruParams {
  std::string prefix;
  std::size_t input = 0;
  std::size_t hidden = 0;

  std::string name(const char* part) const { return prefix + "." + part; }
};

template <std::floating_point T>
struct LayerOutput {
  Var<T> z;  ///< preactivation
  Var<T> h;  ///< activation
};

template <std::floating_point T>
struct GruStep {
  Var<T> z;       ///< candidate preactivation, pre-tanh
  Var<T> h;       ///< new hidden state
  Var<T> update;  ///< update gate
};

template <std::floating_point T>
struct NoisyGruStep {
  Var<T> z;      ///< (possibly) perturbed candidate preactivation
  Var<T> h;      ///< (possibly) perturbed output passed upwards
  Var<T> carry;  ///< un-perturbed state for the next step
};

/// Scaled-normal initialisation: weights ~ N(0, 1/fan_in), biases zero.
template <std::floating_point T>
void init_dense(ParameterStore<T>& store, const DenseParams& p, Rng& rng);
template <std::floating_point T>
void init_gru(ParameterStore<T>& store, const GruParams& p, Rng& rng);

/// Rows of x are frames: z = x W^T + b (+ noise), h = activation(z).
template <std::floating_point T>
LayerOutput<T> dense_forward(Graph<T>& g, Var<T> x, const DenseParams& p,
                             const NoiseSource& noise = {});

/// One GRU step over a batch: x_t [B x D], h_prev [B x H].
///   r = sigmoid(x Wr^T + h Ur^T + br),  u = sigmoid(x Wz^T + h Uz^T + bz)
///   zc = x Wc^T + (r * h) Uc^T + bc,    h' = (1 - u) * h + u * tanh(zc)
template <std::floating_point T>
GruStep<T> gru_step(Graph<T>& g, Var<T> x, Var<T> h_prev, const GruParams& p);

/// GRU step on the noisy path. The clean step runs on the noisy input and the
/// un-noised carry. Under RN with sigma > 0 the candidate preactivation is
/// shifted by fresh noise n and the output recomputed with the clean gates:
/// h~ = (1 - u) * carry + u * tanh(zc + n). The carry returned is always the
/// clean h.
template <std::floating_point T>
NoisyGruStep<T> gru_step_noisy(Graph<T>& g, Var<T> x_noisy, Var<T> carry,
                               const GruParams& p, const NoiseScheme& scheme, Rng& rng);

/// v + N(0, sigma^2) noise of v's shape; returns v itself when sigma == 0.
template <std::floating_point T>
Var<T> add_noise(Var<T> v, double sigma, Rng& rng);

}  // namespace rln
