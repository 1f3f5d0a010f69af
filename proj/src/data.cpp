// Copyright 2026 The RLN Authors
// SPDX-License-Identifier: Apache-2.0

#include "rln/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <system_error>

#include "rln/binary_io.hpp"
#include "rln/errors.hpp"

namespace rln {

std::size_t Dataset::feature_dim() const {
  return examples.empty() ? 0 : examples.front().features.cols();
}

bool Dataset::fully_labeled() const {
  return std::all_of(examples.begin(), examples.end(),
                     [](const SequenceExample& e) { return e.labels.has_value(); });
}

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(classes(), 0);
  for (const auto& e : examples) {
    if (!e.labels) continue;
    for (auto s : *e.labels) {
      if (s < 0 || static_cast<std::size_t>(s) >= counts.size()) {
        throw DataError("example '" + e.id + "': label " + std::to_string(s) + " out of range");
      }
      ++counts[static_cast<std::size_t>(s)];
    }
  }
  return counts;
}

void Dataset::validate() const {
  const std::size_t dim = feature_dim();
  for (const auto& e : examples) {
    if (e.features.rank() != 2 || e.features.cols() != dim) {
      throw DataError("example '" + e.id + "': feature width differs from the dataset's " +
                      std::to_string(dim));
    }
    if (e.frames() == 0) throw DataError("example '" + e.id + "': no frames");
    if (e.labels && e.labels->empty()) throw DataError("example '" + e.id + "': empty label sequence");
  }
  (void)class_counts();
}

FoldingTable FoldingTable::parse(const std::string& text, std::size_t required_targets) {
  FoldingTable t;
  std::unordered_map<std::string, std::int32_t> target_index;
  std::istringstream in(text);
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    // A comment starts at a '#' that begins a token, so symbols like "h#" survive.
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '#' && (i == 0 || std::isspace(static_cast<unsigned char>(line[i - 1])))) {
        line.erase(i);
        break;
      }
    }
    std::istringstream fields(line);
    std::string source, target, extra;
    if (!(fields >> source)) continue;
    if (!(fields >> target) || (fields >> extra)) {
      throw DataError("folding table line " + std::to_string(lineno) + ": expected 'source target|DROP'");
    }
    if (t.map_.contains(source)) {
      throw DataError("folding table line " + std::to_string(lineno) + ": '" + source + "' mapped twice");
    }
    if (target == "DROP") {
      t.map_.emplace(source, std::nullopt);
      continue;
    }
    auto [it, inserted] = target_index.emplace(target, static_cast<std::int32_t>(t.targets_.size()));
    if (inserted) t.targets_.push_back(target);
    t.map_.emplace(source, it->second);
  }
  if (required_targets != 0 && t.targets_.size() != required_targets) {
    throw DataError("folding table defines " + std::to_string(t.targets_.size()) +
                    " target classes, expected " + std::to_string(required_targets));
  }
  return t;
}

FoldingTable FoldingTable::load(const std::filesystem::path& path, std::size_t required_targets) {
  std::ifstream f(path);
  if (!f) throw std::system_error(errno, std::generic_category(), "cannot open " + path.string());
  std::ostringstream text;
  text << f.rdbuf();
  return parse(text.str(), required_targets);
}

std::optional<std::int32_t> FoldingTable::lookup(const std::string& source) const {
  const auto it = map_.find(source);
  if (it == map_.end()) throw DataError("unknown phone symbol '" + source + "'");
  return it->second;
}

LabelSeq fold_labels(const std::vector<std::string>& phones, const FoldingTable& table) {
  LabelSeq out;
  out.reserve(phones.size());
  for (const auto& p : phones) {
    if (const auto target = table.lookup(p)) out.push_back(*target);
  }
  return out;
}

std::size_t subset_target_count(double fraction, std::size_t n) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw std::invalid_argument("label fraction must be in (0, 1]");
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n))));
}

Dataset make_supervised_subset(const Dataset& d, double fraction, std::size_t min_count, Rng& rng,
                               std::optional<std::size_t> count) {
  if (d.size() == 0) throw DataError("supervised subset of an empty dataset");
  if (!d.fully_labeled()) throw DataError("supervised subset needs a fully labeled dataset");
  const std::size_t n = d.size();
  const std::size_t target = count ? *count : subset_target_count(fraction, n);
  if (target == 0 || target > n) {
    throw std::invalid_argument("subset size " + std::to_string(target) + " outside [1, " + std::to_string(n) + "]");
  }
  const std::size_t k = d.classes();
  const auto full = d.class_counts();
  for (std::size_t c = 0; c < k; ++c) {
    if (full[c] < min_count) {
      throw DataError("class '" + d.class_names[c] + "' occurs " + std::to_string(full[c]) +
                      " times in the whole dataset, fewer than min_count " + std::to_string(min_count));
    }
  }

  auto short_classes = [&](const std::vector<std::size_t>& counts) {
    return static_cast<std::size_t>(
        std::count_if(counts.begin(), counts.end(), [&](std::size_t v) { return v < min_count; }));
  };
  std::vector<std::size_t> order(n);
  std::vector<std::size_t> counts(k);
  std::size_t taken = 0;
  for (int attempt = 0; attempt < kSubsetRetries; ++attempt) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle(order, rng);
    std::fill(counts.begin(), counts.end(), 0);
    for (taken = 0; taken < target; ++taken) {
      for (auto s : *d.examples[order[taken]].labels) ++counts[static_cast<std::size_t>(s)];
    }
    if (short_classes(counts) == 0) break;
  }
  // Still uncovered: keep drawing along the last permutation.
  while (short_classes(counts) != 0) {
    for (auto s : *d.examples[order[taken]].labels) ++counts[static_cast<std::size_t>(s)];
    ++taken;
  }

  Dataset out;
  out.class_names = d.class_names;
  out.metadata = d.metadata;
  out.examples.reserve(taken);
  for (std::size_t i = 0; i < taken; ++i) out.examples.push_back(d.examples[order[i]]);
  return out;
}

CyclePair::CyclePair(std::size_t supervised_size, std::size_t unsupervised_size,
                     std::size_t batch_size, std::uint64_t seed)
    : sup_size_(supervised_size), unsup_size_(unsupervised_size), batch_(batch_size), rng_(seed) {
  if (sup_size_ == 0 || unsup_size_ == 0) throw DataError("cycle_pair: empty input set");
  if (batch_ == 0) throw std::invalid_argument("cycle_pair: batch size must be positive");
  sup_order_.resize(sup_size_);
  std::iota(sup_order_.begin(), sup_order_.end(), std::size_t{0});
  sup_pos_ = sup_size_;  // forces a shuffle before the first draw
}

std::size_t CyclePair::steps_per_epoch() const { return (unsup_size_ + batch_ - 1) / batch_; }

std::size_t CyclePair::take_supervised() {
  if (sup_pos_ == sup_size_) {
    shuffle(sup_order_, rng_);
    sup_pos_ = 0;
  }
  return sup_order_[sup_pos_++];
}

std::vector<CyclePair::Step> CyclePair::epoch() {
  std::vector<std::size_t> order(unsup_size_);
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle(order, rng_);
  std::vector<Step> steps;
  steps.reserve(steps_per_epoch());
  for (std::size_t begin = 0; begin < unsup_size_; begin += batch_) {
    Step s;
    const std::size_t end = std::min(unsup_size_, begin + batch_);
    s.unsupervised.assign(order.begin() + static_cast<std::ptrdiff_t>(begin),
                          order.begin() + static_cast<std::ptrdiff_t>(end));
    for (std::size_t i = begin; i < end; ++i) s.supervised.push_back(take_supervised());
    steps.push_back(std::move(s));
  }
  return steps;
}

std::string CyclePair::state() const {
  std::ostringstream out;
  const std::string r = rng_.state();
  out << r.size() << ':' << r << sup_pos_;
  for (auto i : sup_order_) out << ' ' << i;
  return out.str();
}

void CyclePair::restore(const std::string& state) {
  std::istringstream in(state);
  std::size_t len = 0;
  char colon = 0;
  if (!(in >> len >> colon) || colon != ':') throw FormatError("cycle_pair: malformed state");
  std::string r(len, '\0');
  in.read(r.data(), static_cast<std::streamsize>(len));
  std::vector<std::size_t> order;
  std::size_t pos = 0, v = 0;
  if (!(in >> pos)) throw FormatError("cycle_pair: malformed state");
  while (in >> v) order.push_back(v);
  if (order.size() != sup_size_ || pos > sup_size_) throw FormatError("cycle_pair: state does not match set size");
  rng_.restore(r);
  sup_order_ = std::move(order);
  sup_pos_ = pos;
}

namespace {

void check_synth(const SynthConfig& c) {
  if (c.classes < 2) throw std::invalid_argument("synthetic data needs at least 2 classes");
  if (c.sequences == 0) throw std::invalid_argument("synthetic data needs at least 1 sequence");
  if (c.dim == 0) throw std::invalid_argument("synthetic feature dim must be positive");
  if (c.min_frames == 0 || c.min_frames > c.max_frames) throw std::invalid_argument("invalid frame range");
  if (c.min_run == 0 || c.min_run > c.max_run) throw std::invalid_argument("invalid run-length range");
  if (!(c.noise_level >= 0.0)) throw std::invalid_argument("noise level must be non-negative");
}

}  // namespace

Tensor<double> synth_prototypes(const SynthConfig& config) {
  check_synth(config);
  Rng rng(config.seed);
  return gaussian<double>(Shape{config.classes, config.dim}, 1.0, rng);
}

Dataset synth_dataset(const SynthConfig& c) {
  check_synth(c);
  Rng rng(c.seed);
  const Tensor<double> protos = gaussian<double>(Shape{c.classes, c.dim}, 1.0, rng);

  Dataset d;
  for (std::size_t k = 0; k < c.classes; ++k) d.class_names.push_back("c" + std::to_string(k));
  d.metadata = {{"source", "synthetic"},
                {"synth.classes", std::to_string(c.classes)},
                {"synth.sequences", std::to_string(c.sequences)},
                {"synth.frames", std::to_string(c.min_frames) + "-" + std::to_string(c.max_frames)},
                {"synth.runs", std::to_string(c.min_run) + "-" + std::to_string(c.max_run)},
                {"synth.noise_level", std::to_string(c.noise_level)},
                {"synth.seed", std::to_string(c.seed)}};

  for (std::size_t n = 0; n < c.sequences; ++n) {
    const std::size_t frames = c.min_frames + rng.uniform_index(c.max_frames - c.min_frames + 1);
    SequenceExample e;
    e.id = "synth-" + std::to_string(n);
    e.features = Tensor<float>(Shape{frames, c.dim});
    LabelSeq labels;
    std::size_t t = 0;
    while (t < frames) {
      // Uniform over the classes other than the previous symbol.
      auto sym = static_cast<std::int32_t>(rng.uniform_index(labels.empty() ? c.classes : c.classes - 1));
      if (!labels.empty() && sym >= labels.back()) ++sym;
      labels.push_back(sym);
      std::size_t run = c.min_run + rng.uniform_index(c.max_run - c.min_run + 1);
      // A tail too short for a run of its own joins this one.
      if (run >= frames - t || frames - t - run < c.min_run) run = frames - t;
      for (std::size_t i = 0; i < run; ++i, ++t) {
        auto row = e.features.row(t);
        for (std::size_t j = 0; j < c.dim; ++j) {
          const double noise = c.noise_level > 0.0 ? c.noise_level * rng.normal() : 0.0;
          row[j] = static_cast<float>(protos(static_cast<std::size_t>(sym), j) + noise);
        }
      }
    }
    e.labels = std::move(labels);
    d.examples.push_back(std::move(e));
  }
  return d;
}

namespace {
constexpr std::string_view kDatasetMagic = "LDRSEQ1";
}

void save_dataset(const Dataset& d, const std::filesystem::path& path) {
  d.validate();
  io::ByteWriter w;
  w.raw(kDatasetMagic);
  w.u32(kDatasetVersion);
  w.u32(static_cast<std::uint32_t>(d.class_names.size()));
  for (const auto& n : d.class_names) w.str(n);
  w.u32(static_cast<std::uint32_t>(d.metadata.size()));
  for (const auto& [k, v] : d.metadata) {
    w.str(k);
    w.str(v);
  }
  const std::size_t dim = d.feature_dim();
  w.u32(static_cast<std::uint32_t>(dim));
  w.u64(d.examples.size());
  for (const auto& e : d.examples) {
    w.str(e.id);
    w.u32(static_cast<std::uint32_t>(e.frames()));
    w.u8(e.labels ? 1 : 0);
    if (e.labels) {
      w.u32(static_cast<std::uint32_t>(e.labels->size()));
      for (auto s : *e.labels) w.i32(s);
    }
    for (float v : e.features.values()) w.f32(v);
  }
  w.save(path);
}

Dataset load_dataset(const std::filesystem::path& path) {
  auto r = io::ByteReader::open(path, kDatasetMagic);
  const std::uint32_t version = r.u32();
  if (version != kDatasetVersion) {
    throw FormatError(path.string() + ": unsupported dataset version " + std::to_string(version) +
                      " (this build reads version " + std::to_string(kDatasetVersion) + ")");
  }
  Dataset d;
  d.class_names.resize(r.u32());
  for (auto& n : d.class_names) n = r.str();
  const std::uint32_t meta = r.u32();
  for (std::uint32_t i = 0; i < meta; ++i) {
    std::string k = r.str();
    d.metadata[std::move(k)] = r.str();
  }
  const std::size_t dim = r.u32();
  const std::uint64_t count = r.u64();
  if (count > r.remaining()) throw FormatError(path.string() + ": implausible example count");
  d.examples.resize(count);
  for (auto& e : d.examples) {
    e.id = r.str();
    const std::size_t frames = r.u32();
    const std::uint8_t has_labels = r.u8();
    if (has_labels > 1) throw FormatError(path.string() + ": bad label flag");
    if (has_labels) {
      LabelSeq labels(r.u32());
      for (auto& s : labels) s = r.i32();
      e.labels = std::move(labels);
    }
    if (frames * dim * 4 > r.remaining()) throw FormatError(path.string() + ": payload ends unexpectedly");
    e.features = Tensor<float>(Shape{frames, dim});
    for (auto& v : e.features.values()) v = r.f32();
  }
  r.finish();
  try {
    d.validate();
  } catch (const DataError& ex) {
    throw FormatError(path.string() + ": " + ex.what());
  }
  return d;
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& d, std::size_t head) {
  if (head > d.size()) {
    throw DataError("cannot split " + std::to_string(head) + " examples from a set of " + std::to_string(d.size()));
  }
  Dataset a, b;
  a.class_names = b.class_names = d.class_names;
  a.metadata = b.metadata = d.metadata;
  const auto mid = d.examples.begin() + static_cast<std::ptrdiff_t>(head);
  a.examples.assign(d.examples.begin(), mid);
  b.examples.assign(mid, d.examples.end());
  return {std::move(a), std::move(b)};
}

}  // namespace rln
