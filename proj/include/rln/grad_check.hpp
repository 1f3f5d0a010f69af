// Copyright 2026 The RLN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rln/graph.hpp"

namespace rln {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t coordinates = 0;
};

/// Builds a scalar loss on a fresh graph bound to the parameter store. Must be
/// deterministic: any noise has to come from an Rng seeded inside the builder.
using LossBuilder = std::function<Var<double>(Graph<double>&)>;

/// Compares reverse-mode gradients against central differences.
///
/// For every coordinate p of every parameter (or only those listed in `only`),
/// numeric = (f(p + eps) - f(p - eps)) / (2 eps) and the relative error is
/// |analytic - numeric| / max(1e-8, |analytic| + |numeric|). Returns the
/// maximum over coordinates. Parameter values are restored afterwards.
GradCheckResult grad_check(const LossBuilder& loss, ParameterStore<double>& params,
                           double eps = 1e-5, const std::vector<std::string>& only = {});

}  // namespace rln
