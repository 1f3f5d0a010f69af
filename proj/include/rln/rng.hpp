// Copyright 2026 The RLN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include "rln/errors.hpp"
#include "rln/tensor.hpp"

namespace rln {

/// Deterministic random source.
///
/// Bits come from std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Uniform doubles take the top 53 bits. Gaussian samples use the
/// Box-Muller transform on two uniforms, returning the cosine branch first and
/// caching the sine branch for the next call. None of the std distributions
/// are used because their algorithms are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);

  /// Standard normal sample.
  double normal();

  /// Serialized engine state including the cached Gaussian.
  std::string state() const;
  void restore(const std::string& state);

  bool operator==(const Rng& other) const {
    return engine_ == other.engine_ && has_cached_ == other.has_cached_ &&
           (!has_cached_ || cached_ == other.cached_);
  }

 private:
  std::mt19937_64 engine_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

/// Fisher-Yates shuffle driven by Rng::uniform_index.
template <typename Container>
void shuffle(Container& c, Rng& rng) {
  for (std::size_t i = c.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_index(i));
    std::swap(c[i - 1], c[j]);
  }
}

/// I.i.d. N(0, sigma^2) samples. sigma == 0 yields exact zeros and leaves the
/// generator untouched.
template <std::floating_point T>
Tensor<T> gaussian(Shape shape, double sigma, Rng& rng) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("gaussian: negative sigma");
  Tensor<T> out(std::move(shape));
  if (sigma == 0.0) return out;
  for (auto& v : out.values()) v = static_cast<T>(sigma * rng.normal());
  return out;
}

}  // namespace rln
