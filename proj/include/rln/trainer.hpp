// Copyright 2026 The RLN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rln/data.hpp"
#include "rln/graph.hpp"
#include "rln/ladder.hpp"

namespace rln {

struct AdamConfig {
  double lr = 0.002;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <std::floating_point T>
struct AdamState {
  AdamConfig hyper;
  std::uint64_t step = 0;
  std::vector<Tensor<T>> m;  ///< per parameter, in store order
  std::vector<Tensor<T>> v;
};

/// One Adam update from the gradients held in `params`. Moments are allocated
/// on the first call. Throws NumericError (leaving everything untouched) when
/// a gradient is not finite.
template <std::floating_point T>
void adam_step(ParameterStore<T>& params, AdamState<T>& state);

/// Rescales all gradients so their joint L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
template <std::floating_point T>
double clip_gradients(ParameterStore<T>& params, double max_norm);

/// Training precision.
using Real = float;
using Model = ParameterStore<Real>;

struct TrainConfig {
  std::size_t batch_size = 16;
  std::size_t min_epochs = 100;
  std::size_t max_epochs = 1000;
  std::size_t patience = 10;
  double clip_norm = 0.0;  ///< 0 disables clipping
  AdamConfig adam;
  std::uint64_t seed = 1;
  /// Wall-clock seconds in the metrics; off keeps the CSV byte-reproducible.
  bool log_seconds = false;
};

struct EpochMetrics {
  std::size_t epoch = 0;
  double c_sup = 0;    ///< mean over the epoch's steps
  double c_dae = 0;
  double total = 0;
  double valid_per = 0;
  double seconds = 0;
};

/// Column order of the metrics CSV.
inline constexpr const char* kMetricsHeader = "epoch,c_sup,c_dae,total,valid_per,seconds";
std::string metrics_row(const EpochMetrics& m);

struct Checkpoint {
  LadderConfig model;
  Model params;
  AdamState<Real> adam;
  std::string rng_state;
  std::string cycle_state;
  std::size_t epoch = 0;
  double best_valid_per = 1.0;
  std::size_t best_epoch = 0;
  std::map<std::string, std::string> metadata;
};

/// "LDRCKPT1" binary file, little-endian, trailing FNV-1a 64 checksum.
inline constexpr std::uint32_t kCheckpointVersion = 1;
void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Padded batch of the selected examples; labels are attached when `labeled`.
SequenceBatch<Real> gather_batch(const Dataset& d, const std::vector<std::size_t>& indices, bool labeled);

struct EvalResult {
  double per = 0;
  std::vector<std::size_t> distances;  ///< per example, dataset order
  std::vector<LabelSeq> hypotheses;
  std::size_t reference_length = 0;
};

/// Clean pass, best-path decoding and PER. Throws DataError on unlabeled
/// examples.
EvalResult evaluate(const LadderConfig& config, const Model& params, const Dataset& d,
                    std::size_t batch_size = 32);

struct TrainResult {
  Checkpoint best;  ///< lowest validation PER seen (earliest on ties)
  Checkpoint last;
  std::vector<EpochMetrics> metrics;
};

/// Called after each epoch; return false to stop early.
using EpochCallback = std::function<bool(const EpochMetrics&)>;

/// Semi-supervised training with early stopping on validation PER. When
/// `out_dir` is given, metrics.csv is appended per epoch and best.ckpt /
/// last.ckpt are written.
TrainResult train(const LadderConfig& config, const TrainConfig& train_config, const Dataset& supervised,
                  const Dataset& unsupervised, const Dataset& valid,
                  const std::optional<std::filesystem::path>& out_dir = std::nullopt,
                  const EpochCallback& on_epoch = {});

}  // namespace rln
