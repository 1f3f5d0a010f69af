// Copyright 2026 The RLN Authors
// SPDX-License-Identifier: Apache-2.0

// MFCC front end: 13 cepstra plus first and second differences (39 dims) over
// 20 ms frames with a 10 ms hop, z-normalised with corpus statistics.

#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "rln/tensor.hpp"

namespace rln {

struct Waveform {
  std::vector<float> samples;  ///< mono, in [-1, 1]
  int sample_rate = 16000;
};

/// 16-bit PCM mono RIFF/WAVE only; samples scaled by 1/32768.
Waveform read_wav(const std::filesystem::path& path);
/// Inverse of read_wav for samples on the 1/32768 grid.
void write_wav(const std::filesystem::path& path, const Waveform& w);

struct FeatureConfig {
  double frame_ms = 20.0;
  double hop_ms = 10.0;
  std::size_t n_mels = 40;
  std::size_t n_coeffs = 13;
  std::size_t delta_width = 2;
  double log_floor = 1e-10;

  std::size_t feature_dim() const { return 3 * n_coeffs; }
};

/// Samples per frame and per hop at `sample_rate`.
std::size_t frame_length(double ms, int sample_rate);

/// [count x frame_length] with count = 1 + floor((N - flen) / hop); the tail
/// remainder is dropped. Throws DataError when N < flen.
Tensor<double> frame_signal(const Waveform& w, double frame_ms = 20.0, double hop_ms = 10.0);

/// Smallest power of two >= n.
std::size_t fft_size(std::size_t n);

/// Triangular HTK-mel filters, [n_mels x (nfft/2 + 1)], spanning 0 Hz to sr/2.
Tensor<double> mel_filterbank(std::size_t n_mels, std::size_t nfft, int sample_rate);

/// Orthonormal DCT-II, first `rows` rows of the n x n matrix.
Tensor<double> dct_matrix(std::size_t rows, std::size_t n);

/// Periodic Hann window.
std::vector<double> hann_window(std::size_t n);

/// Per frame: Hann window, power spectrum, mel filterbank, log (floored),
/// DCT-II; returns [T x n_coeffs].
Tensor<double> mfcc(const Tensor<double>& frames, int sample_rate, std::size_t n_mels = 40,
                    std::size_t n_coeffs = 13, double log_floor = 1e-10);

/// Regression deltas with edge replication:
/// d_t = sum_k k (c_{t+k} - c_{t-k}) / (2 sum_k k^2).
Tensor<double> deltas(const Tensor<double>& c, std::size_t width = 2);

/// [c, Δc, ΔΔc] side by side.
Tensor<double> stack_deltas(const Tensor<double>& c, std::size_t width = 2);

/// Unnormalised [T x 3·n_coeffs] features of one waveform.
Tensor<double> featurize(const Waveform& w, const FeatureConfig& config = {});

struct FeatureStats {
  std::vector<double> mean;
  std::vector<double> stddev;  ///< population std, floored at kFeatureStdFloor
};

inline constexpr double kFeatureStdFloor = 1e-6;

/// Per-dimension statistics over every frame of the corpus.
FeatureStats fit_feature_stats(const std::vector<Tensor<double>>& corpus);

/// (x - mean) / std per dimension. Fits the statistics on `corpus` when `stats`
/// is empty; returns the statistics used.
FeatureStats normalize(std::vector<Tensor<double>>& corpus,
                       const std::optional<FeatureStats>& stats = std::nullopt);

/// "LDRSTAT1" binary file, little-endian, trailing FNV-1a 64 checksum.
void save_feature_stats(const FeatureStats& stats, const std::filesystem::path& path);
FeatureStats load_feature_stats(const std::filesystem::path& path);

/// Alternative mode: each utterance normalised by its own statistics.
void normalize_per_utterance(std::vector<Tensor<double>>& corpus);

}  // namespace rln
