// Copyright 2026 The RLN Authors
// SPDX-License-Identifier: Apache-2.0

#include "rln/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace rln {

GradCheckResult grad_check(const LossBuilder& loss, ParameterStore<double>& params,
                           double eps, const std::vector<std::string>& only) {
  std::vector<Tensor<double>> analytic;
  {
    Graph<double> g(&params);
    g.backward(loss(g));
    for (const auto& e : params.entries()) analytic.push_back(e.grad);
  }
  auto evaluate = [&] {
    Graph<double> g(&params);
    return loss(g).value()[0];
  };

  GradCheckResult result;
  auto& entries = params.entries();
  for (std::size_t p = 0; p < entries.size(); ++p) {
    if (!only.empty() && std::find(only.begin(), only.end(), entries[p].name) == only.end()) {
      continue;
    }
    for (std::size_t i = 0; i < entries[p].value.size(); ++i) {
      const double saved = entries[p].value[i];
      entries[p].value[i] = saved + eps;
      const double up = evaluate();
      entries[p].value[i] = saved - eps;
      const double down = evaluate();
      entries[p].value[i] = saved;

      const double numeric = (up - down) / (2.0 * eps);
      const double a = analytic[p][i];
      const double rel = std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
      ++result.coordinates;
      if (rel > result.max_rel_error || result.worst_parameter.empty()) {
        result.max_rel_error = rel;
        result.worst_parameter = entries[p].name;
        result.worst_index = i;
        result.analytic = a;
        result.numeric = numeric;
      }
    }
  }
  // Leave the analytic gradients in the accumulators.
  for (std::size_t p = 0; p < entries.size(); ++p) entries[p].grad = analytic[p];
  return result;
}

}  // namespace rln
