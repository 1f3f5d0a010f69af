// Copyright 2026 The RLN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rln/ladder.hpp"
#include "rln/trainer.hpp"

namespace rln {

/// Bad configuration text or value; the message names the line.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct DataConfig {
  std::string train;      ///< dataset file with the labeled pool
  std::string valid;      ///< empty: validate on the supervised subset
  std::string unlabeled;  ///< empty: the full training set
  double label_fraction = 1.0;
  std::size_t label_count = 0;  ///< 0: derived from label_fraction
  std::size_t min_count = 1;
  std::uint64_t seed = 1;  ///< subset draw
};

/// Everything a training run depends on. `model.input_dim` and
/// `model.classes` may be 0, meaning "take them from the training set".
struct RunConfig {
  LadderConfig model;
  TrainConfig train;
  DataConfig data;

  RunConfig();
};

/// Parses `key = value` lines with dotted keys (model.sigma = 0.3). '#'
/// starts a comment. Unknown or repeated keys and malformed values throw
/// ConfigError naming `source` and the line.
RunConfig parse_run_config(const std::string& text, const std::string& source = "config");
RunConfig load_run_config(const std::filesystem::path& path);

/// Applies one `key=value` override on top of `config`.
void apply_override(RunConfig& config, const std::string& assignment);

/// Every key in canonical order, one `key = value` line each. Parsing the
/// result gives back the same configuration.
std::string format_run_config(const RunConfig& config);

/// Names of all accepted keys, in canonical order.
std::vector<std::string> run_config_keys();

/// Supervised subset size for a labeled pool of `n` sequences: `label_count`
/// when set; for the 3696-sequence TIMIT training set the published counts
/// at 25/50/75/100%; otherwise round(fraction · n).
std::size_t resolve_label_count(const DataConfig& data, std::size_t n);

}  // namespace rln
