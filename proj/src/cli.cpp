// Copyright 2026 The RLN Authors
// SPDX-License-Identifier: Apache-2.0

#include "rln/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "rln/data.hpp"
#include "rln/errors.hpp"
#include "rln/features.hpp"
#include "rln/run_config.hpp"
#include "rln/trainer.hpp"

namespace rln::cli {
namespace {

namespace fs = std::filesystem;

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    f << text;
    if (!f.flush()) throw DataError("cannot write '" + path.string() + "'");
  }
  fs::rename(tmp, path);
}

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(part, &used));
      if (part.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw ConfigError(std::string(what) + ": cannot parse '" + part + "'");
    }
  }
  if (out.empty()) throw ConfigError(std::string(what) + ": empty list");
  return out;
}

// --- featurize --------------------------------------------------------------

struct FeaturizeArgs {
  std::string wav_dir, transcripts, folding, out;
  std::string stats_out, stats_in;
  bool per_utterance = false;
};

// "id phone phone ..." per line, from one file or every *.txt in a directory.
std::map<std::string, std::vector<std::string>> read_transcripts(const fs::path& where) {
  std::vector<fs::path> files;
  if (fs::is_directory(where)) {
    for (const auto& e : fs::directory_iterator(where))
      if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path());
    std::sort(files.begin(), files.end());
  } else if (fs::is_regular_file(where)) {
    files.push_back(where);
  } else {
    throw DataError("transcripts '" + where.string() + "' not found");
  }
  std::map<std::string, std::vector<std::string>> out;
  for (const auto& file : files) {
    std::ifstream f(file);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(f, line)) {
      ++lineno;
      std::istringstream tokens(line);
      std::string id, phone;
      if (!(tokens >> id) || id[0] == '#') continue;
      std::vector<std::string> phones;
      while (tokens >> phone) phones.push_back(phone);
      if (!out.emplace(id, std::move(phones)).second) {
        throw DataError(file.string() + " line " + std::to_string(lineno) + ": transcript '" + id +
                        "' given twice");
      }
    }
  }
  return out;
}

int featurize(const FeaturizeArgs& a, std::ostream& out) {
  if (!a.stats_in.empty() && !a.stats_out.empty()) throw ConfigError("--stats-in and --stats-out exclude each other");
  if (a.per_utterance && !a.stats_in.empty()) throw ConfigError("--per-utterance takes no --stats-in");
  if (!fs::is_directory(a.wav_dir)) throw DataError("'" + a.wav_dir + "' is not a directory");
  std::vector<fs::path> wavs;
  for (const auto& e : fs::directory_iterator(a.wav_dir))
    if (e.is_regular_file() && e.path().extension() == ".wav") wavs.push_back(e.path());
  std::sort(wavs.begin(), wavs.end());
  if (wavs.empty()) throw DataError("no .wav files in '" + a.wav_dir + "'");

  const auto transcripts = read_transcripts(a.transcripts);
  const FoldingTable table = FoldingTable::load(a.folding);
  for (const auto& [id, phones] : transcripts) {
    const bool has_wav = std::any_of(wavs.begin(), wavs.end(), [&](const fs::path& p) { return p.stem() == id; });
    if (!has_wav) throw DataError("transcript '" + id + "' has no matching .wav file");
  }

  const FeatureConfig fc;
  Dataset d;
  d.class_names = table.targets();
  std::vector<Tensor<double>> feats;
  int sample_rate = 0;
  for (const auto& wav : wavs) {
    const std::string id = wav.stem().string();
    const auto t = transcripts.find(id);
    if (t == transcripts.end()) throw DataError("'" + wav.filename().string() + "' has no transcript");
    const Waveform w = read_wav(wav);
    if (sample_rate == 0) sample_rate = w.sample_rate;
    if (w.sample_rate != sample_rate) {
      throw DataError("'" + wav.filename().string() + "': sample rate " + std::to_string(w.sample_rate) +
                      " differs from " + std::to_string(sample_rate));
    }
    LabelSeq labels = fold_labels(t->second, table);
    if (labels.empty()) throw DataError("transcript '" + id + "' is empty after folding");
    feats.push_back(featurize(w, fc));
    d.examples.push_back({id, {}, std::move(labels)});
  }

  std::string mode;
  if (a.per_utterance) {
    normalize_per_utterance(feats);
    mode = "per-utterance";
  } else if (!a.stats_in.empty()) {
    normalize(feats, load_feature_stats(a.stats_in));
    mode = "corpus-applied";
  } else {
    const FeatureStats stats = normalize(feats);
    if (!a.stats_out.empty()) save_feature_stats(stats, a.stats_out);
    mode = "corpus-fit";
  }
  for (std::size_t i = 0; i < feats.size(); ++i) {
    const auto& f = feats[i];
    Tensor<float> t(f.shape());
    for (std::size_t k = 0; k < f.size(); ++k) t[k] = static_cast<float>(f[k]);
    d.examples[i].features = std::move(t);
  }
  d.metadata["features.sample_rate"] = std::to_string(sample_rate);
  d.metadata["features.frame_ms"] = fixed(fc.frame_ms, 1);
  d.metadata["features.hop_ms"] = fixed(fc.hop_ms, 1);
  d.metadata["features.n_mels"] = std::to_string(fc.n_mels);
  d.metadata["features.n_coeffs"] = std::to_string(fc.n_coeffs);
  d.metadata["features.delta_width"] = std::to_string(fc.delta_width);
  d.metadata["features.normalization"] = mode;
  d.validate();
  save_dataset(d, a.out);
  out << "wrote " << d.size() << " sequences (" << d.feature_dim() << " features, " << d.classes()
      << " classes) to " << a.out << "\n";
  return kOk;
}

// --- synth ------------------------------------------------------------------

int synth(SynthConfig sc, std::size_t valid, const std::string& out_path, const std::string& valid_path,
          std::ostream& out) {
  if (valid > 0 && valid_path.empty()) throw ConfigError("--valid needs --valid-out");
  if (valid == 0 && !valid_path.empty()) throw ConfigError("--valid-out needs --valid");
  const std::size_t n = sc.sequences;
  sc.sequences += valid;
  auto [train_set, valid_set] = split_dataset(synth_dataset(sc), n);
  save_dataset(train_set, out_path);
  out << "wrote " << train_set.size() << " sequences to " << out_path << "\n";
  if (valid > 0) {
    save_dataset(valid_set, valid_path);
    out << "wrote " << valid_set.size() << " sequences to " << valid_path << "\n";
  }
  return kOk;
}

// --- train ------------------------------------------------------------------

struct RunOutcome {
  std::size_t supervised = 0;
  TrainResult result;
};

void require_dims(const Dataset& d, const LadderConfig& m, const std::string& what) {
  if (d.size() == 0) throw DataError(what + " set is empty");
  if (d.feature_dim() != m.input_dim) {
    throw DataError(what + " set has " + std::to_string(d.feature_dim()) + " features, the model expects " +
                    std::to_string(m.input_dim));
  }
  if (d.classes() != 0 && d.classes() != m.classes) {
    throw DataError(what + " set has " + std::to_string(d.classes()) + " classes, the model expects " +
                    std::to_string(m.classes));
  }
}

// One training run into `dir`: resolves the configuration against the data,
// writes the run header, then trains.
RunOutcome train_run(RunConfig config, const fs::path& dir, bool quiet, std::ostream& out) {
  if (config.data.train.empty()) throw ConfigError("data.train is not set");
  const Dataset pool = load_dataset(config.data.train);
  pool.validate();
  if (!pool.fully_labeled()) throw DataError("training set '" + config.data.train + "' is not fully labeled");
  if (config.model.input_dim == 0) config.model.input_dim = pool.feature_dim();
  if (config.model.classes == 0) config.model.classes = pool.classes();
  try {
    config.model.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  require_dims(pool, config.model, "training");

  const std::size_t count = resolve_label_count(config.data, pool.size());
  config.data.label_count = count;
  Rng subset_rng(config.data.seed);
  const Dataset supervised =
      make_supervised_subset(pool, config.data.label_fraction, config.data.min_count, subset_rng, count);

  Dataset unlabeled_file;
  if (!config.data.unlabeled.empty()) {
    unlabeled_file = load_dataset(config.data.unlabeled);
    require_dims(unlabeled_file, config.model, "unlabeled");
  }
  const Dataset& unsupervised = config.data.unlabeled.empty() ? pool : unlabeled_file;
  Dataset valid_file;
  if (!config.data.valid.empty()) {
    valid_file = load_dataset(config.data.valid);
    require_dims(valid_file, config.model, "validation");
  }
  const Dataset& valid = config.data.valid.empty() ? supervised : valid_file;

  fs::create_directories(dir);
  std::string header = "# Resolved configuration of this run; usable as a config file.\n";
  header += "# variant: " + variant_name(config.model) + "\n";
  header += "# supervised sequences: " + std::to_string(supervised.size()) + "\n";
  header += "# unsupervised sequences: " + std::to_string(unsupervised.size()) + "\n";
  header += "# validation: " + (config.data.valid.empty() ? std::string("supervised subset") : config.data.valid) + "\n";
  header += format_run_config(config);
  write_text(dir / "run.cfg", header);
  std::string ids;
  for (const auto& e : supervised.examples) ids += e.id + "\n";
  write_text(dir / "supervised.ids", ids);
  if (!quiet) {
    out << variant_name(config.model) << ": " << supervised.size() << " supervised / " << unsupervised.size()
        << " unsupervised sequences -> " << dir.string() << "\n";
  }

  EpochCallback progress = [&](const EpochMetrics& m) {
    if (!quiet) {
      out << "epoch " << m.epoch << "  c_sup " << fixed(m.c_sup, 4) << "  c_dae " << fixed(m.c_dae, 4)
          << "  valid PER " << fixed(m.valid_per, 4) << "\n";
      out.flush();
    }
    return true;
  };
  RunOutcome r{supervised.size(), train(config.model, config.train, supervised, unsupervised, valid, dir, progress)};
  out << "best valid PER " << fixed(r.result.best.best_valid_per) << " at epoch " << r.result.best.best_epoch
      << " (" << r.result.metrics.size() << " epochs)\n";
  return r;
}

RunConfig load_with_overrides(const std::string& path, const std::vector<std::string>& overrides) {
  RunConfig c = load_run_config(path);
  for (const auto& o : overrides) apply_override(c, o);
  return c;
}

// --- eval -------------------------------------------------------------------

int eval(const std::string& ckpt_path, const std::string& data_path, const std::string& ids_path,
         std::string out_path, std::size_t batch, std::ostream& out) {
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  Dataset d = load_dataset(data_path);
  if (!ids_path.empty()) {
    std::ifstream f(ids_path);
    if (!f) throw DataError("cannot read '" + ids_path + "'");
    std::map<std::string, const SequenceExample*> by_id;
    for (const auto& e : d.examples) by_id[e.id] = &e;
    std::vector<SequenceExample> picked;
    for (std::string id; std::getline(f, id);) {
      if (id.empty()) continue;
      const auto it = by_id.find(id);
      if (it == by_id.end()) throw DataError("id '" + id + "' not in '" + data_path + "'");
      picked.push_back(*it->second);
    }
    d.examples = std::move(picked);
  }
  require_dims(d, ckpt.model, "evaluation");
  const EvalResult r = evaluate(ckpt.model, ckpt.params, d, batch);
  std::size_t distance = 0;
  for (auto v : r.distances) distance += v;
  out << "PER " << fixed(r.per) << " (" << distance << " edits / " << r.reference_length << " reference labels, "
      << d.size() << " sequences)\n";

  if (out_path.empty()) out_path = ckpt_path + ".eval.csv";
  std::string csv = "id,distance,reference_length,hypothesis\n";
  for (std::size_t i = 0; i < d.size(); ++i) {
    csv += d.examples[i].id + "," + std::to_string(r.distances[i]) + "," +
           std::to_string(d.examples[i].labels->size()) + ",";
    for (std::size_t k = 0; k < r.hypotheses[i].size(); ++k) {
      const auto c = static_cast<std::size_t>(r.hypotheses[i][k]);
      csv += (k ? " " : "") + (c < d.class_names.size() ? d.class_names[c] : std::to_string(c));
    }
    csv += "\n";
  }
  write_text(out_path, csv);
  return kOk;
}

// --- sweep ------------------------------------------------------------------

int sweep(const RunConfig& base, const fs::path& dir, const std::string& sigmas_text,
          const std::string& fractions_text, std::ostream& out) {
  const auto sigmas = sigmas_text.empty() ? std::vector<double>{base.model.noise.sigma}
                                          : parse_list(sigmas_text, "--sigmas");
  const auto fractions = fractions_text.empty() ? std::vector<double>{base.data.label_fraction}
                                                 : parse_list(fractions_text, "--fractions");
  fs::create_directories(dir);
  std::string summary = "sigma,fraction,supervised,best_epoch,best_valid_per,epochs\n";
  for (double f : fractions) {
    for (double s : sigmas) {
      RunConfig c = base;
      c.model.noise.sigma = s;
      c.data.label_fraction = f;
      if (!(f > 0.0 && f <= 1.0)) throw ConfigError("--fractions: " + std::to_string(f) + " outside (0, 1]");
      const std::string cell = "sigma-" + fixed(s, 3) + "_fraction-" + fixed(f, 3);
      out << "== " << cell << "\n";
      const RunOutcome r = train_run(c, dir / cell, true, out);
      summary += fixed(s, 3) + "," + fixed(f, 3) + "," + std::to_string(r.supervised) + "," +
                 std::to_string(r.result.best.best_epoch) + "," + fixed(r.result.best.best_valid_per) + "," +
                 std::to_string(r.result.metrics.size()) + "\n";
      write_text(dir / "summary.csv", summary);
    }
  }
  out << "wrote " << (dir / "summary.csv").string() << "\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Recurrent ladder networks: features, synthetic data, training and evaluation", "rln"};
  app.require_subcommand(0, 1);
  bool dump_defaults = false;
  app.add_flag("--dump-defaults", dump_defaults, "Print every configuration key with its default and exit");

  FeaturizeArgs fa;
  auto* featurize_cmd = app.add_subcommand("featurize", "WAV + transcripts -> normalised MFCC dataset");
  featurize_cmd->add_option("--wav-dir", fa.wav_dir, "Directory of 16-bit mono .wav files")->required();
  featurize_cmd->add_option("--transcripts", fa.transcripts, "File or directory of 'id phone phone ...' lines")
      ->required();
  featurize_cmd->add_option("--folding", fa.folding, "Phone folding table ('source target|DROP')")->required();
  featurize_cmd->add_option("--out", fa.out, "Dataset file to write")->required();
  featurize_cmd->add_option("--stats-out", fa.stats_out, "Write the fitted normalisation statistics");
  featurize_cmd->add_option("--stats-in", fa.stats_in, "Normalise with statistics fitted on another set");
  featurize_cmd->add_flag("--per-utterance", fa.per_utterance, "Normalise each utterance by its own statistics");

  SynthConfig sc;
  std::size_t synth_valid = 0;
  std::string synth_out, synth_valid_out;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic labeled dataset");
  synth_cmd->add_option("--classes", sc.classes, "Number of symbol classes (>= 2)")->capture_default_str();
  synth_cmd->add_option("--sequences", sc.sequences, "Sequences in the main set")->capture_default_str();
  synth_cmd->add_option("--seed", sc.seed, "Generator seed (also fixes the prototypes)")->capture_default_str();
  synth_cmd->add_option("--dim", sc.dim, "Feature width")->capture_default_str();
  synth_cmd->add_option("--min-frames", sc.min_frames, "Shortest sequence")->capture_default_str();
  synth_cmd->add_option("--max-frames", sc.max_frames, "Longest sequence")->capture_default_str();
  synth_cmd->add_option("--min-run", sc.min_run, "Fewest frames per symbol")->capture_default_str();
  synth_cmd->add_option("--max-run", sc.max_run, "Most frames per symbol")->capture_default_str();
  synth_cmd->add_option("--noise", sc.noise_level, "Per-frame noise std")->capture_default_str();
  synth_cmd->add_option("--valid", synth_valid, "Extra sequences from the same prototypes for validation");
  synth_cmd->add_option("--valid-out", synth_valid_out, "Where to write the validation sequences");
  synth_cmd->add_option("--out", synth_out, "Dataset file to write")->required();

  std::string config_path, out_dir;
  std::vector<std::string> overrides;
  bool quiet = false;
  auto* train_cmd = app.add_subcommand("train", "Train one model from a config file");
  train_cmd->add_option("config", config_path, "Config file (key = value)")->required();
  train_cmd->add_option("--out", out_dir, "Run directory")->required();
  train_cmd->add_option("--set", overrides, "Override one key, e.g. --set model.sigma=0.5");
  train_cmd->add_flag("--quiet", quiet, "No per-epoch progress");

  std::string ckpt_path, data_path, ids_path, eval_out;
  std::size_t eval_batch = 32;
  auto* eval_cmd = app.add_subcommand("eval", "PER of a checkpoint on a dataset");
  eval_cmd->add_option("checkpoint", ckpt_path, "Checkpoint file")->required();
  eval_cmd->add_option("dataset", data_path, "Labeled dataset file")->required();
  eval_cmd->add_option("--ids", ids_path, "Only the sequences listed (one id per line)");
  eval_cmd->add_option("--out", eval_out, "Per-sequence CSV (default: <checkpoint>.eval.csv)");
  eval_cmd->add_option("--batch", eval_batch, "Evaluation batch size")->capture_default_str();

  std::string sigmas, fractions;
  auto* sweep_cmd = app.add_subcommand("sweep", "Train over a grid of noise levels x label fractions");
  sweep_cmd->add_option("config", config_path, "Base config file")->required();
  sweep_cmd->add_option("--out", out_dir, "Sweep directory (one run directory per cell)")->required();
  sweep_cmd->add_option("--sigmas", sigmas, "Comma-separated noise levels (default: model.sigma)");
  sweep_cmd->add_option("--fractions", fractions, "Comma-separated label fractions (default: data.label_fraction)");
  sweep_cmd->add_option("--set", overrides, "Override one key of the base config");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (dump_defaults) {
      out << "# Defaults. model.input_dim / model.classes = 0 take the value from the training set;\n"
             "# data.label_count = 0 derives the count from data.label_fraction.\n"
          << format_run_config(RunConfig{});
      return kOk;
    }
    if (*featurize_cmd) return featurize(fa, out);
    if (*synth_cmd) return synth(sc, synth_valid, synth_out, synth_valid_out, out);
    if (*train_cmd) {
      train_run(load_with_overrides(config_path, overrides), out_dir, quiet, out);
      return kOk;
    }
    if (*eval_cmd) return eval(ckpt_path, data_path, ids_path, eval_out, eval_batch, out);
    if (*sweep_cmd) return sweep(load_with_overrides(config_path, overrides), out_dir, sigmas, fractions, out);
    err << app.help();
    return kUsage;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kData;
  } catch (const FormatError& e) {
    err << "data error: " << e.what() << "\n";
    return kData;
  } catch (const std::system_error& e) {
    err << "data error: " << e.what() << "\n";
    return kData;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
}

}  // namespace rln::cli
