// Copyright 2026 The RLN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rln/ctc.hpp"
#include "rln/rng.hpp"
#include "rln/tensor.hpp"

namespace rln {

struct SequenceExample {
  std::string id;
  Tensor<float> features;            ///< [T x D]
  std::optional<LabelSeq> labels;    ///< non-empty when present

  std::size_t frames() const { return features.rows(); }
  bool operator==(const SequenceExample&) const = default;
};

struct Dataset {
  std::vector<SequenceExample> examples;
  std::vector<std::string> class_names;
  /// Free-form provenance, e.g. feature pipeline parameters.
  std::map<std::string, std::string> metadata;

  std::size_t size() const { return examples.size(); }
  std::size_t classes() const { return class_names.size(); }
  /// Feature width; 0 for an empty dataset.
  std::size_t feature_dim() const;
  bool fully_labeled() const;
  /// Label token counts per class.
  std::vector<std::size_t> class_counts() const;
  /// Throws DataError when an invariant is broken.
  void validate() const;

  bool operator==(const Dataset&) const = default;
};

/// Source-phone to class folding, read from "source target|DROP" lines.
class FoldingTable {
 public:
  /// `required_targets` is the number of distinct targets the table must
  /// define (39 for the standard phone set); pass 0 to skip the check.
  static FoldingTable parse(const std::string& text, std::size_t required_targets = 39);
  static FoldingTable load(const std::filesystem::path& path, std::size_t required_targets = 39);

  /// Target classes in order of first appearance; class i has index i.
  const std::vector<std::string>& targets() const { return targets_; }
  bool contains(const std::string& source) const { return map_.contains(source); }
  /// Target index, or nullopt when the source is dropped. Throws DataError
  /// naming the symbol when it is unknown.
  std::optional<std::int32_t> lookup(const std::string& source) const;

 private:
  std::unordered_map<std::string, std::optional<std::int32_t>> map_;
  std::vector<std::string> targets_;
};

/// Maps every symbol, removing dropped ones. Adjacent duplicates are kept.
LabelSeq fold_labels(const std::vector<std::string>& phones, const FoldingTable& table);

/// Number of sequences the subset targets: round(fraction · n), at least 1.
std::size_t subset_target_count(double fraction, std::size_t n);

/// Bounded number of fresh uniform draws tried before extending a draw.
inline constexpr int kSubsetRetries = 100;

/// Uniform sample without replacement of round(fraction · N) labeled examples
/// (or exactly `count` when given) in which every class occurs at least
/// `min_count` times. Draws that miss the coverage are retried up to
/// kSubsetRetries times; after that the last draw is extended along its
/// permutation until coverage holds. Throws DataError when even the full set
/// lacks coverage.
Dataset make_supervised_subset(const Dataset& d, double fraction, std::size_t min_count, Rng& rng,
                               std::optional<std::size_t> count = std::nullopt);

/// Pairs every unlabeled batch of an epoch with a labeled batch of the same
/// size, cycling (and reshuffling at each wrap) the smaller supervised set.
/// One epoch is one shuffled pass over the unsupervised set.
class CyclePair {
 public:
  struct Step {
    std::vector<std::size_t> supervised;    ///< indices into the supervised set
    std::vector<std::size_t> unsupervised;  ///< indices into the unsupervised set
  };

  CyclePair(std::size_t supervised_size, std::size_t unsupervised_size, std::size_t batch_size,
            std::uint64_t seed);

  std::size_t steps_per_epoch() const;
  /// Batches of one epoch, in order.
  std::vector<Step> epoch();

  /// Opaque, restorable position (for checkpoints).
  std::string state() const;
  void restore(const std::string& state);

 private:
  std::size_t take_supervised();

  std::size_t sup_size_, unsup_size_, batch_;
  Rng rng_;
  std::vector<std::size_t> sup_order_;
  std::size_t sup_pos_ = 0;
};

struct SynthConfig {
  std::size_t classes = 8;
  std::size_t sequences = 100;
  std::size_t min_frames = 20;  ///< sequence length range, in frames
  std::size_t max_frames = 40;
  std::size_t dim = 39;
  std::size_t min_run = 3;      ///< frames each symbol occupies
  std::size_t max_run = 8;
  double noise_level = 1.0;     ///< std of per-frame Gaussian noise
  std::uint64_t seed = 1;
};

/// Fixed random class prototypes of a synthetic configuration, [K x dim].
Tensor<double> synth_prototypes(const SynthConfig& config);

/// Sequences of random symbol strings (no immediate repeats) whose symbols
/// are rendered as runs of prototype + noise frames. Deterministic per seed.
Dataset synth_dataset(const SynthConfig& config);

/// First `head` examples and the rest, each keeping class names and metadata.
/// Used to carve a validation set out of one synthetic draw (shared prototypes).
std::pair<Dataset, Dataset> split_dataset(const Dataset& d, std::size_t head);

/// "LDRSEQ1" binary file, little-endian, trailing FNV-1a 64 checksum.
inline constexpr std::uint32_t kDatasetVersion = 1;
void save_dataset(const Dataset& d, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace rln
