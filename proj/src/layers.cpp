// Copyright 2026 The RLN Authors
// SPDX-License-Identifier: Apache-2.0

#include "rln/layers.hpp"

#include <cmath>

namespace rln {

namespace {

template <std::floating_point T>
Tensor<T> scaled_normal(Shape shape, std::size_t fan_in, Rng& rng) {
  return gaussian<T>(std::move(shape), 1.0 / std::sqrt(static_cast<double>(fan_in)), rng);
}

template <std::floating_point T>
void require_width(Var<T> x, std::size_t width, const std::string& who) {
  if (x.value().rank() != 2 || x.value().cols() != width) {
    throw DimensionError(who + ": expected rows of width " + std::to_string(width) +
                         ", got " + shape_string(x.shape()));
  }
}

}  // namespace

template <std::floating_point T>
void init_dense(ParameterStore<T>& store, const DenseParams& p, Rng& rng) {
  store.add(p.weight(), scaled_normal<T>(Shape{p.out, p.in}, p.in, rng));
  store.add(p.bias(), Tensor<T>(Shape{p.out}));
}

template <std::floating_point T>
void init_gru(ParameterStore<T>& store, const GruParams& p, Rng& rng) {
  for (const char* gate : {"Wz", "Wr", "Wc"}) {
    store.add(p.name(gate), scaled_normal<T>(Shape{p.hidden, p.input}, p.input, rng));
  }
  for (const char* gate : {"Uz", "Ur", "Uc"}) {
    store.add(p.name(gate), scaled_normal<T>(Shape{p.hidden, p.hidden}, p.hidden, rng));
  }
  for (const char* gate : {"bz", "br", "bc"}) {
    store.add(p.name(gate), Tensor<T>(Shape{p.hidden}));
  }
}

template <std::floating_point T>
Var<T> add_noise(Var<T> v, double sigma, Rng& rng) {
  if (sigma < 0.0) throw std::invalid_argument("noise sigma must be non-negative");
  if (sigma == 0.0) return v;
  return v + v.graph().constant(gaussian<T>(v.shape(), sigma, rng));
}

template <std::floating_point T>
LayerOutput<T> dense_forward(Graph<T>& g, Var<T> x, const DenseParams& p,
                             const NoiseSource& noise) {
  require_width(x, p.in, p.prefix);
  Var<T> z = add_row(matmul_transposed(x, g.parameter(p.weight())), g.parameter(p.bias()));
  if (noise.sigma > 0.0) {
    if (!noise.rng) throw std::invalid_argument("dense_forward: noise without rng");
    z = add_noise(z, noise.sigma, *noise.rng);
  } else if (noise.sigma < 0.0) {
    throw std::invalid_argument("noise sigma must be non-negative");
  }
  switch (p.activation) {
    case Activation::kLinear: return {z, z};
    case Activation::kTanh: return {z, tanh(z)};
    case Activation::kSoftmax: return {z, softmax_rows(z)};
  }
  return {z, z};
}

template <std::floating_point T>
GruStep<T> gru_step(Graph<T>& g, Var<T> x, Var<T> h_prev, const GruParams& p) {
  require_width(x, p.input, p.prefix);
  require_width(h_prev, p.hidden, p.prefix);
  if (x.value().rows() != h_prev.value().rows()) {
    throw DimensionError(p.prefix + ": batch of input and state differ");
  }
  auto gate = [&](const char* w, const char* u, const char* b) {
    return sigmoid(add_row(matmul_transposed(x, g.parameter(p.name(w))) +
                               matmul_transposed(h_prev, g.parameter(p.name(u))),
                           g.parameter(p.name(b))));
  };
  Var<T> reset = gate("Wr", "Ur", "br");
  Var<T> update = gate("Wz", "Uz", "bz");
  Var<T> zc = add_row(matmul_transposed(x, g.parameter(p.name("Wc"))) +
                          matmul_transposed(reset * h_prev, g.parameter(p.name("Uc"))),
                      g.parameter(p.name("bc")));
  Var<T> h = one_minus(update) * h_prev + update * tanh(zc);
  return {zc, h, update};
}

template <std::floating_point T>
NoisyGruStep<T> gru_step_noisy(Graph<T>& g, Var<T> x_noisy, Var<T> carry,
                               const GruParams& p, const NoiseScheme& scheme, Rng& rng) {
  if (scheme.sigma < 0.0) throw std::invalid_argument("noise sigma must be non-negative");
  GruStep<T> clean = gru_step(g, x_noisy, carry, p);
  if (scheme.variant == NoiseVariant::kFeedForward || scheme.sigma == 0.0) {
    return {clean.z, clean.h, clean.h};
  }
  Var<T> z_noisy = add_noise(clean.z, scheme.sigma, rng);
  Var<T> h_noisy = one_minus(clean.update) * carry + clean.update * tanh(z_noisy);
  return {z_noisy, h_noisy, clean.h};
}

#define RLN_INSTANTIATE(T)                                                                \
  template void init_dense(ParameterStore<T>&, const DenseParams&, Rng&);                  \
  template void init_gru(ParameterStore<T>&, const GruParams&, Rng&);                      \
  template Var<T> add_noise(Var<T>, double, Rng&);                                         \
  template LayerOutput<T> dense_forward(Graph<T>&, Var<T>, const DenseParams&,             \
                                        const NoiseSource&);                               \
  template GruStep<T> gru_step(Graph<T>&, Var<T>, Var<T>, const GruParams&);               \
  template NoisyGruStep<T> gru_step_noisy(Graph<T>&, Var<T>, Var<T>, const GruParams&,     \
                                          const NoiseScheme&, Rng&);

RLN_INSTANTIATE(float)
RLN_INSTANTIATE(double)

#undef RLN_INSTANTIATE

}  // namespace rln
