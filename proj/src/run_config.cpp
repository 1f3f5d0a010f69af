// Copyright 2026 The RLN Authors
// SPDX-License-Identifier: Apache-2.0

#include "rln/run_config.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "rln/errors.hpp"

namespace rln {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::string fmt(double v) {
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return {buf.data(), end};
}

double parse_double(const std::string& s) {
  double v = 0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size() || !std::isfinite(v)) {
    throw std::invalid_argument("expected a number, got '" + s + "'");
  }
  return v;
}

std::uint64_t parse_u64(const std::string& s) {
  std::uint64_t v = 0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size() || s.empty()) {
    throw std::invalid_argument("expected a non-negative integer, got '" + s + "'");
  }
  return v;
}

bool parse_bool(const std::string& s) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw std::invalid_argument("expected true or false, got '" + s + "'");
}

std::optional<double> parse_sigma(const std::string& s) {
  if (s == "inherit") return std::nullopt;
  return parse_double(s);
}

std::array<double, kLadderLayers> parse_lambdas(const std::string& s) {
  std::array<double, kLadderLayers> out{};
  std::stringstream in(s);
  std::string part;
  std::size_t n = 0;
  while (std::getline(in, part, ',')) {
    if (n == kLadderLayers) throw std::invalid_argument("expected 3 comma-separated weights");
    out[n++] = parse_double(trim(part));
  }
  if (n != kLadderLayers) throw std::invalid_argument("expected 3 comma-separated weights");
  return out;
}

struct Key {
  const char* name;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

template <class Field>
Key size_key(const char* name, Field field) {
  return {name, [=](const RunConfig& c) { return std::to_string(field(c)); },
          [=](RunConfig& c, const std::string& v) { field(c) = static_cast<std::size_t>(parse_u64(v)); }};
}

template <class Field>
Key real_key(const char* name, Field field) {
  return {name, [=](const RunConfig& c) { return fmt(field(c)); },
          [=](RunConfig& c, const std::string& v) { field(c) = parse_double(v); }};
}

template <class Field>
Key text_key(const char* name, Field field) {
  return {name, [=](const RunConfig& c) { return field(c); },
          [=](RunConfig& c, const std::string& v) { field(c) = v; }};
}

Key sigma_key(const char* name, std::size_t layer) {
  return {name,
          [=](const RunConfig& c) {
            const auto& s = c.model.layer_sigma[layer];
            return s ? fmt(*s) : std::string("inherit");
          },
          [=](RunConfig& c, const std::string& v) { c.model.layer_sigma[layer] = parse_sigma(v); }};
}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      size_key("model.input_dim", [](auto& c) -> auto& { return c.model.input_dim; }),
      size_key("model.hidden_dim", [](auto& c) -> auto& { return c.model.hidden_dim; }),
      size_key("model.classes", [](auto& c) -> auto& { return c.model.classes; }),
      {"model.decoder", [](const RunConfig& c) { return to_string(c.model.decoder); },
       [](RunConfig& c, const std::string& v) { c.model.decoder = parse_decoder(v); }},
      {"model.noise", [](const RunConfig& c) { return to_string(c.model.noise.variant); },
       [](RunConfig& c, const std::string& v) { c.model.noise.variant = parse_noise_variant(v); }},
      real_key("model.sigma", [](auto& c) -> auto& { return c.model.noise.sigma; }),
      sigma_key("model.sigma_input", 0),
      sigma_key("model.sigma_hidden", 1),
      sigma_key("model.sigma_output", 2),
      {"model.lambdas",
       [](const RunConfig& c) {
         const auto& l = c.model.lambdas;
         return fmt(l[0]) + ", " + fmt(l[1]) + ", " + fmt(l[2]);
       },
       [](RunConfig& c, const std::string& v) { c.model.lambdas = parse_lambdas(v); }},
      size_key("model.combinator_hidden", [](auto& c) -> auto& { return c.model.combinator_hidden; }),
      real_key("train.lr", [](auto& c) -> auto& { return c.train.adam.lr; }),
      real_key("train.beta1", [](auto& c) -> auto& { return c.train.adam.beta1; }),
      real_key("train.beta2", [](auto& c) -> auto& { return c.train.adam.beta2; }),
      real_key("train.eps", [](auto& c) -> auto& { return c.train.adam.eps; }),
      size_key("train.batch", [](auto& c) -> auto& { return c.train.batch_size; }),
      size_key("train.min_epochs", [](auto& c) -> auto& { return c.train.min_epochs; }),
      size_key("train.max_epochs", [](auto& c) -> auto& { return c.train.max_epochs; }),
      size_key("train.patience", [](auto& c) -> auto& { return c.train.patience; }),
      real_key("train.clip_norm", [](auto& c) -> auto& { return c.train.clip_norm; }),
      {"train.seed", [](const RunConfig& c) { return std::to_string(c.train.seed); },
       [](RunConfig& c, const std::string& v) { c.train.seed = parse_u64(v); }},
      {"train.log_seconds", [](const RunConfig& c) { return std::string(c.train.log_seconds ? "true" : "false"); },
       [](RunConfig& c, const std::string& v) { c.train.log_seconds = parse_bool(v); }},
      text_key("data.train", [](auto& c) -> auto& { return c.data.train; }),
      text_key("data.valid", [](auto& c) -> auto& { return c.data.valid; }),
      text_key("data.unlabeled", [](auto& c) -> auto& { return c.data.unlabeled; }),
      real_key("data.label_fraction", [](auto& c) -> auto& { return c.data.label_fraction; }),
      size_key("data.label_count", [](auto& c) -> auto& { return c.data.label_count; }),
      size_key("data.min_count", [](auto& c) -> auto& { return c.data.min_count; }),
      {"data.seed", [](const RunConfig& c) { return std::to_string(c.data.seed); },
       [](RunConfig& c, const std::string& v) { c.data.seed = parse_u64(v); }},
  };
  return table;
}

const Key* find_key(const std::string& name) {
  for (const auto& k : keys())
    if (name == k.name) return &k;
  return nullptr;
}

void check(const RunConfig& c) {
  if (!(c.data.label_fraction > 0.0 && c.data.label_fraction <= 1.0)) {
    throw ConfigError("data.label_fraction must be in (0, 1]");
  }
  if (c.train.batch_size == 0) throw ConfigError("train.batch must be positive");
  if (c.train.max_epochs == 0) throw ConfigError("train.max_epochs must be positive");
  if (!(c.train.adam.lr > 0.0)) throw ConfigError("train.lr must be positive");
  if (c.model.hidden_dim == 0) throw ConfigError("model.hidden_dim must be positive");
}

// Assigns one value, turning value errors into ConfigError with `where`.
void assign(RunConfig& c, const std::string& key, const std::string& value, const std::string& where) {
  const Key* k = find_key(key);
  if (!k) throw ConfigError(where + ": unknown key '" + key + "'");
  try {
    k->set(c, value);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + key + ": " + e.what());
  }
}

}  // namespace

RunConfig::RunConfig() {
  model.input_dim = 0;
  model.classes = 0;
}

RunConfig parse_run_config(const std::string& text, const std::string& source) {
  RunConfig c;
  std::set<std::string> seen;
  std::stringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = source + " line " + std::to_string(lineno);
    // '#' opens a comment only at the start of a token, so values may contain it.
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '#' && (i == 0 || line[i - 1] == ' ' || line[i - 1] == '\t')) {
        line.erase(i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    if (!seen.insert(key).second) throw ConfigError(where + ": '" + key + "' set twice");
    assign(c, key, trim(line.substr(eq + 1)), where);
  }
  check(c);
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config '" + path.string() + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_run_config(ss.str(), path.string());
}

void apply_override(RunConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "': expected key=value");
  assign(config, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)), "override");
  check(config);
}

std::string format_run_config(const RunConfig& config) {
  std::string out;
  for (const auto& k : keys()) out += std::string(k.name) + " = " + k.get(config) + "\n";
  return out;
}

std::vector<std::string> run_config_keys() {
  std::vector<std::string> out;
  for (const auto& k : keys()) out.emplace_back(k.name);
  return out;
}

std::size_t resolve_label_count(const DataConfig& data, std::size_t n) {
  if (data.label_count > 0) {
    if (data.label_count > n) {
      throw DataError("data.label_count " + std::to_string(data.label_count) + " exceeds the " +
                      std::to_string(n) + " available sequences");
    }
    return data.label_count;
  }
  // Published subset sizes for the 3696-sequence TIMIT training set; they are
  // not round(fraction · 3696) (which gives 924, 1848, 2772).
  if (n == 3696) {
    static constexpr std::array<std::pair<double, std::size_t>, 4> kPublished = {
        {{0.25, 940}, {0.5, 1856}, {0.75, 2754}, {1.0, 3696}}};
    for (const auto& [f, count] : kPublished)
      if (data.label_fraction == f) return count;
  }
  return subset_target_count(data.label_fraction, n);
}

}  // namespace rln
