// Copyright 2026 The RLN Authors
// SPDX-License-Identifier: Apache-2.0

#include "rln/ctc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rln {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

/// Row-wise log-softmax in double precision.
template <std::floating_point T>
std::vector<double> log_softmax(const Tensor<T>& logits) {
  const std::size_t frames = logits.rows(), classes = logits.cols();
  std::vector<double> out(frames * classes);
  for (std::size_t t = 0; t < frames; ++t) {
    const auto row = logits.row(t);
    double top = kNegInf;
    for (T v : row) top = std::max(top, static_cast<double>(v));
    double total = 0.0;
    for (T v : row) total += std::exp(static_cast<double>(v) - top);
    const double lse = top + std::log(total);
    for (std::size_t k = 0; k < classes; ++k) out[t * classes + k] = static_cast<double>(row[k]) - lse;
  }
  return out;
}

/// Blank-extended label: blank, l1, blank, l2, ..., blank.
std::vector<std::int32_t> extend(const LabelSeq& label, std::int32_t blank) {
  std::vector<std::int32_t> ext(2 * label.size() + 1, blank);
  for (std::size_t i = 0; i < label.size(); ++i) ext[2 * i + 1] = label[i];
  return ext;
}

void validate(std::size_t frames, std::size_t classes, const LabelSeq& label) {
  if (classes < 2) throw DimensionError("ctc: need at least one class plus blank");
  if (frames == 0) throw InfeasibleAlignment("ctc: sequence has no frames");
  const auto blank = static_cast<std::int32_t>(classes - 1);
  for (auto s : label) {
    if (s < 0 || s >= blank) {
      throw std::out_of_range("ctc: label symbol " + std::to_string(s) + " outside [0, " +
                              std::to_string(blank) + ")");
    }
  }
  const std::size_t need = ctc_min_frames(label);
  if (frames < need) {
    throw InfeasibleAlignment("ctc: label needs " + std::to_string(need) + " frames, have " +
                              std::to_string(frames));
  }
}

struct Lattice {
  std::vector<std::int32_t> ext;
  std::vector<double> alpha;  // [frames x S], includes emission at t
  std::vector<double> beta;   // [frames x S], excludes emission at t
  double log_likelihood = kNegInf;
};

Lattice forward_backward(const std::vector<double>& logp, std::size_t frames, std::size_t classes,
                         const LabelSeq& label, bool with_beta) {
  const auto blank = static_cast<std::int32_t>(classes - 1);
  Lattice lat;
  lat.ext = extend(label, blank);
  const auto& ext = lat.ext;
  const std::size_t states = ext.size();
  auto lp = [&](std::size_t t, std::size_t s) { return logp[t * classes + ext[s]]; };
  auto can_skip = [&](std::size_t s) {  // transition s-2 -> s
    return s >= 2 && ext[s] != blank && ext[s] != ext[s - 2];
  };

  lat.alpha.assign(frames * states, kNegInf);
  auto alpha = [&](std::size_t t, std::size_t s) -> double& { return lat.alpha[t * states + s]; };
  alpha(0, 0) = lp(0, 0);
  if (states > 1) alpha(0, 1) = lp(0, 1);
  for (std::size_t t = 1; t < frames; ++t) {
    for (std::size_t s = 0; s < states; ++s) {
      double acc = alpha(t - 1, s);
      if (s >= 1) acc = log_add(acc, alpha(t - 1, s - 1));
      if (can_skip(s)) acc = log_add(acc, alpha(t - 1, s - 2));
      if (acc != kNegInf) alpha(t, s) = acc + lp(t, s);
    }
  }
  lat.log_likelihood = alpha(frames - 1, states - 1);
  if (states > 1) lat.log_likelihood = log_add(lat.log_likelihood, alpha(frames - 1, states - 2));

  if (!with_beta) return lat;
  lat.beta.assign(frames * states, kNegInf);
  auto beta = [&](std::size_t t, std::size_t s) -> double& { return lat.beta[t * states + s]; };
  beta(frames - 1, states - 1) = 0.0;
  if (states > 1) beta(frames - 1, states - 2) = 0.0;
  for (std::size_t t = frames - 1; t-- > 0;) {
    for (std::size_t s = 0; s < states; ++s) {
      double acc = beta(t + 1, s) + lp(t + 1, s);
      if (s + 1 < states) acc = log_add(acc, beta(t + 1, s + 1) + lp(t + 1, s + 1));
      if (s + 2 < states && can_skip(s + 2)) {
        acc = log_add(acc, beta(t + 1, s + 2) + lp(t + 1, s + 2));
      }
      beta(t, s) = acc;
    }
  }
  return lat;
}

}  // namespace

std::size_t ctc_min_frames(const LabelSeq& label) {
  std::size_t need = label.size();
  for (std::size_t i = 1; i < label.size(); ++i) {
    if (label[i] == label[i - 1]) ++need;
  }
  return need;
}

template <std::floating_point T>
double ctc_loss(const Tensor<T>& logits, const LabelSeq& label) {
  validate(logits.rows(), logits.cols(), label);
  const auto logp = log_softmax(logits);
  return -forward_backward(logp, logits.rows(), logits.cols(), label, false).log_likelihood;
}

template <std::floating_point T>
double ctc_loss_with_grad(const Tensor<T>& logits, const LabelSeq& label, Tensor<T>& grad) {
  const std::size_t frames = logits.rows(), classes = logits.cols();
  validate(frames, classes, label);
  const auto logp = log_softmax(logits);
  const Lattice lat = forward_backward(logp, frames, classes, label, true);
  const std::size_t states = lat.ext.size();

  // d(-log p)/d(logit_tk) = softmax_tk - sum over states s with symbol k of the
  // posterior occupancy exp(alpha_t(s) + beta_t(s) - log p).
  grad = Tensor<T>(logits.shape());
  std::vector<double> occupancy(classes);
  for (std::size_t t = 0; t < frames; ++t) {
    std::fill(occupancy.begin(), occupancy.end(), kNegInf);
    for (std::size_t s = 0; s < states; ++s) {
      const double v = lat.alpha[t * states + s] + lat.beta[t * states + s];
      auto& o = occupancy[static_cast<std::size_t>(lat.ext[s])];
      o = log_add(o, v);
    }
    for (std::size_t k = 0; k < classes; ++k) {
      const double post = occupancy[k] == kNegInf ? 0.0 : std::exp(occupancy[k] - lat.log_likelihood);
      grad(t, k) = static_cast<T>(std::exp(logp[t * classes + k]) - post);
    }
  }
  return -lat.log_likelihood;
}

LabelSeq ctc_collapse(const std::vector<std::int32_t>& path, std::int32_t blank) {
  LabelSeq out;
  for (std::size_t t = 0; t < path.size(); ++t) {
    if (t > 0 && path[t] == path[t - 1]) continue;
    if (path[t] != blank) out.push_back(path[t]);
  }
  return out;
}

double ctc_brute_force(const Tensor<double>& probs, const LabelSeq& label) {
  const std::size_t frames = probs.rows(), classes = probs.cols();
  if (frames > 10) {
    throw std::invalid_argument("ctc_brute_force: refusing to enumerate T = " +
                                std::to_string(frames) + " > 10 frames");
  }
  if (classes < 2) throw DimensionError("ctc_brute_force: need at least one class plus blank");
  const auto blank = static_cast<std::int32_t>(classes - 1);
  std::vector<std::int32_t> path(frames, 0);
  double total = 0.0;
  while (true) {
    if (ctc_collapse(path, blank) == label) {
      double p = 1.0;
      for (std::size_t t = 0; t < frames; ++t) p *= probs(t, static_cast<std::size_t>(path[t]));
      total += p;
    }
    // Odometer increment over (K+1)^T paths.
    std::size_t t = 0;
    while (t < frames && ++path[t] == static_cast<std::int32_t>(classes)) path[t++] = 0;
    if (t == frames) break;
  }
  return total;
}

template <std::floating_point T>
LabelSeq best_path_decode(const Tensor<T>& logits) {
  const std::size_t classes = logits.cols();
  std::vector<std::int32_t> path(logits.rows());
  for (std::size_t t = 0; t < logits.rows(); ++t) {
    const auto row = logits.row(t);
    path[t] = static_cast<std::int32_t>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return ctc_collapse(path, static_cast<std::int32_t>(classes) - 1);
}

std::size_t levenshtein(const LabelSeq& a, const LabelSeq& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double phoneme_error_rate(const std::vector<LabelSeq>& refs, const std::vector<LabelSeq>& hyps) {
  if (refs.size() != hyps.size()) {
    throw std::invalid_argument("phoneme_error_rate: " + std::to_string(refs.size()) +
                                " references but " + std::to_string(hyps.size()) + " hypotheses");
  }
  std::size_t edits = 0, length = 0;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    edits += levenshtein(refs[i], hyps[i]);
    length += refs[i].size();
  }
  if (length == 0) throw std::invalid_argument("phoneme_error_rate: total reference length is zero");
  return static_cast<double>(edits) / static_cast<double>(length);
}

template <std::floating_point T>
Var<T> ctc_loss_batch(const std::vector<Var<T>>& steps, const std::vector<LabelSeq>& labels,
                      const std::vector<std::size_t>& lengths) {
  if (steps.empty()) throw DimensionError("ctc_loss_batch: no frames");
  const std::size_t batch = labels.size();
  if (lengths.size() != batch || steps.front().value().rows() != batch) {
    throw DimensionError("ctc_loss_batch: batch size mismatch");
  }
  if (batch == 0) throw DimensionError("ctc_loss_batch: empty batch");
  const std::size_t classes = steps.front().value().cols();

  std::vector<Tensor<T>> grads(batch);
  double total = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    if (lengths[b] > steps.size()) throw DimensionError("ctc_loss_batch: length exceeds frames");
    Tensor<T> seq(Shape{lengths[b], classes});
    for (std::size_t t = 0; t < lengths[b]; ++t) {
      const auto src = steps[t].value().row(b);
      std::copy(src.begin(), src.end(), seq.row(t).begin());
    }
    total += ctc_loss_with_grad(seq, labels[b], grads[b]);
  }

  std::vector<std::size_t> ids;
  for (const auto& s : steps) ids.push_back(s.id());
  const T inv = T{1} / static_cast<T>(batch);
  return steps.front().graph().emit(
      "ctc_loss", Tensor<T>::scalar(static_cast<T>(total / static_cast<double>(batch))), ids,
      [ids, grads = std::move(grads), lengths, inv](Graph<T>& g, std::size_t self) {
        const T go = g.grad(self)[0] * inv;
        for (std::size_t b = 0; b < grads.size(); ++b) {
          for (std::size_t t = 0; t < lengths[b]; ++t) {
            if (!g.needs_grad(ids[t])) continue;
            auto dst = g.grad(ids[t]).row(b);
            const auto src = grads[b].row(t);
            for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += go * src[k];
          }
        }
      });
}

#define RLN_INSTANTIATE(T)                                                              \
  template double ctc_loss(const Tensor<T>&, const LabelSeq&);                           \
  template double ctc_loss_with_grad(const Tensor<T>&, const LabelSeq&, Tensor<T>&);     \
  template LabelSeq best_path_decode(const Tensor<T>&);                                  \
  template Var<T> ctc_loss_batch(const std::vector<Var<T>>&, const std::vector<LabelSeq>&, \
                                 const std::vector<std::size_t>&);

RLN_INSTANTIATE(float)
RLN_INSTANTIATE(double)

#undef RLN_INSTANTIATE

}  // namespace rln
