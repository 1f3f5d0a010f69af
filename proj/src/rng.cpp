// Copyright 2026 The RLN Authors
// SPDX-License-Identifier: Apache-2.0

#include "rln/rng.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "rln/errors.hpp"

namespace rln {

std::uint64_t Rng::uniform_index(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: empty range");
  // Rejection sampling keeps the result exactly uniform.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

double Rng::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  double u1;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_ = radius * std::sin(angle);
  has_cached_ = true;
  return radius * std::cos(angle);
}

std::string Rng::state() const {
  std::ostringstream out;
  std::uint64_t bits;
  std::memcpy(&bits, &cached_, sizeof bits);
  out << engine_ << ' ' << (has_cached_ ? 1 : 0) << ' ' << bits;
  return out.str();
}

void Rng::restore(const std::string& state) {
  std::istringstream in(state);
  int cached_flag = 0;
  std::uint64_t bits = 0;
  in >> engine_ >> cached_flag >> bits;
  if (!in) throw FormatError("malformed rng state");
  has_cached_ = cached_flag != 0;
  std::memcpy(&cached_, &bits, sizeof bits);
}

}  // namespace rln
