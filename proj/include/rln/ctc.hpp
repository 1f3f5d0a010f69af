// Copyright 2026 The RLN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "rln/graph.hpp"

namespace rln {

/// Class indices in [0, K). The blank is never part of a label sequence.
using LabelSeq = std::vector<std::int32_t>;

/// Frames a CTC alignment of `label` needs: one per symbol plus a separating
/// blank between equal neighbours.
std::size_t ctc_min_frames(const LabelSeq& label);

/// Negative log-likelihood of `label` under per-frame logits [T x (K+1)];
/// column K is the blank. Log-space forward recursion over the blank-extended
/// label. Throws InfeasibleAlignment when T < ctc_min_frames(label).
template <std::floating_point T>
double ctc_loss(const Tensor<T>& logits, const LabelSeq& label);

/// As ctc_loss, and writes d(loss)/d(logits) into `grad` (resized to match).
template <std::floating_point T>
double ctc_loss_with_grad(const Tensor<T>& logits, const LabelSeq& label, Tensor<T>& grad);

/// Likelihood of `label` by summing over every frame-level path that collapses
/// to it. Exponential in T; refuses T > 10. `probs` rows must be distributions.
double ctc_brute_force(const Tensor<double>& probs, const LabelSeq& label);

/// Removes repeated neighbours, then blanks.
LabelSeq ctc_collapse(const std::vector<std::int32_t>& path, std::int32_t blank);

/// Per-frame argmax (ties resolved to the lower index) followed by collapse.
template <std::floating_point T>
LabelSeq best_path_decode(const Tensor<T>& logits);

/// Unit-cost edit distance.
std::size_t levenshtein(const LabelSeq& a, const LabelSeq& b);

/// Sum of edit distances over the sum of reference lengths.
double phoneme_error_rate(const std::vector<LabelSeq>& refs, const std::vector<LabelSeq>& hyps);

/// Mean CTC loss over a padded, time-major batch. `steps[t]` is [B x (K+1)];
/// sequence b uses rows b of steps [0, lengths[b]).
template <std::floating_point T>
Var<T> ctc_loss_batch(const std::vector<Var<T>>& steps, const std::vector<LabelSeq>& labels,
                      const std::vector<std::size_t>& lengths);

}  // namespace rln
