// Copyright 2026 The RLN Authors
// SPDX-License-Identifier: Apache-2.0

#include "rln/features.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>
#include <numbers>
#include <system_error>

#include "rln/binary_io.hpp"
#include "rln/errors.hpp"

namespace rln {

namespace {

std::uint32_t le(const std::uint8_t* p, int n) {
  std::uint32_t v = 0;
  for (int i = 0; i < n; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

void put_le(std::string& out, std::uint32_t v, int n) {
  for (int i = 0; i < n; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
double mel_to_hz(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

}  // namespace

Waveform read_wav(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::system_error(errno, std::generic_category(), "cannot open " + path.string());
  const std::vector<std::uint8_t> b((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  const std::string name = path.string();
  if (b.size() < 12 || std::memcmp(b.data(), "RIFF", 4) != 0 || std::memcmp(b.data() + 8, "WAVE", 4) != 0) {
    throw FormatError(name + ": not a RIFF/WAVE file");
  }
  Waveform w;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= b.size()) {
    const std::uint8_t* id = b.data() + pos;
    const std::size_t size = le(b.data() + pos + 4, 4);
    pos += 8;
    if (size > b.size() - pos) throw FormatError(name + ": truncated chunk");
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (size < 16) throw FormatError(name + ": short fmt chunk");
      const std::uint32_t format = le(b.data() + pos, 2);
      const std::uint32_t channels = le(b.data() + pos + 2, 2);
      const std::uint32_t bits = le(b.data() + pos + 14, 2);
      if (format != 1 || channels != 1 || bits != 16) {
        throw FormatError(name + ": unsupported encoding (need 16-bit PCM mono; got format " +
                          std::to_string(format) + ", " + std::to_string(channels) + " channel(s), " +
                          std::to_string(bits) + " bits)");
      }
      w.sample_rate = static_cast<int>(le(b.data() + pos + 4, 4));
      if (w.sample_rate <= 0) throw FormatError(name + ": sample rate must be positive");
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      if (!have_fmt) throw FormatError(name + ": data chunk before fmt chunk");
      if (size % 2 != 0) throw FormatError(name + ": odd data size for 16-bit samples");
      w.samples.resize(size / 2);
      for (std::size_t i = 0; i < w.samples.size(); ++i) {
        const auto s = static_cast<std::int16_t>(le(b.data() + pos + 2 * i, 2));
        w.samples[i] = static_cast<float>(s) / 32768.0f;
      }
      return w;
    }
    pos += size + (size & 1);
  }
  throw FormatError(name + (have_fmt ? ": no data chunk" : ": no fmt chunk"));
}

void write_wav(const std::filesystem::path& path, const Waveform& w) {
  if (w.sample_rate <= 0) throw std::invalid_argument("write_wav: sample rate must be positive");
  const auto data_bytes = static_cast<std::uint32_t>(2 * w.samples.size());
  std::string out = "RIFF";
  put_le(out, 36 + data_bytes, 4);
  out += "WAVEfmt ";
  put_le(out, 16, 4);
  put_le(out, 1, 2);  // PCM
  put_le(out, 1, 2);  // mono
  put_le(out, static_cast<std::uint32_t>(w.sample_rate), 4);
  put_le(out, static_cast<std::uint32_t>(w.sample_rate) * 2, 4);
  put_le(out, 2, 2);
  put_le(out, 16, 2);
  out += "data";
  put_le(out, data_bytes, 4);
  for (float s : w.samples) {
    const double v = std::clamp(std::round(static_cast<double>(s) * 32768.0), -32768.0, 32767.0);
    put_le(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(v)), 2);
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::system_error(errno, std::generic_category(), "cannot write " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

std::size_t frame_length(double ms, int sample_rate) {
  return static_cast<std::size_t>(std::lround(ms * sample_rate / 1000.0));
}

Tensor<double> frame_signal(const Waveform& w, double frame_ms, double hop_ms) {
  const std::size_t flen = frame_length(frame_ms, w.sample_rate);
  const std::size_t hop = frame_length(hop_ms, w.sample_rate);
  if (flen == 0 || hop == 0) throw std::invalid_argument("frame_signal: frame and hop must be positive");
  const std::size_t n = w.samples.size();
  if (n < flen) {
    throw DataError("signal of " + std::to_string(n) + " samples is shorter than one frame (" +
                    std::to_string(flen) + ")");
  }
  const std::size_t count = 1 + (n - flen) / hop;
  Tensor<double> frames(Shape{count, flen});
  for (std::size_t t = 0; t < count; ++t) {
    std::copy_n(w.samples.begin() + static_cast<std::ptrdiff_t>(t * hop), flen, frames.row(t).begin());
  }
  return frames;
}

std::size_t fft_size(std::size_t n) { return std::bit_ceil(std::max<std::size_t>(n, 1)); }

Tensor<double> mel_filterbank(std::size_t n_mels, std::size_t nfft, int sample_rate) {
  const std::size_t bins = nfft / 2 + 1;
  const double top = hz_to_mel(sample_rate / 2.0);
  std::vector<double> edges(n_mels + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(top * static_cast<double>(i) / static_cast<double>(n_mels + 1));
  }
  Tensor<double> fb(Shape{n_mels, bins});
  for (std::size_t m = 0; m < n_mels; ++m) {
    const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / static_cast<double>(nfft);
      double v = 0.0;
      if (f > lo && f <= mid) v = (f - lo) / (mid - lo);
      else if (f > mid && f < hi) v = (hi - f) / (hi - mid);
      fb(m, k) = v;
    }
  }
  return fb;
}

Tensor<double> dct_matrix(std::size_t rows, std::size_t n) {
  if (rows > n) throw std::invalid_argument("dct_matrix: more rows than inputs");
  Tensor<double> m(Shape{rows, n});
  const double nn = static_cast<double>(n);
  for (std::size_t k = 0; k < rows; ++k) {
    const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / nn);
    for (std::size_t i = 0; i < n; ++i) {
      m(k, i) = scale * std::cos(std::numbers::pi * static_cast<double>(k) * (2.0 * static_cast<double>(i) + 1.0) / (2.0 * nn));
    }
  }
  return m;
}

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
  }
  return w;
}

Tensor<double> mfcc(const Tensor<double>& frames, int sample_rate, std::size_t n_mels,
                    std::size_t n_coeffs, double log_floor) {
  if (frames.rows() == 0 || frames.cols() == 0) throw DataError("mfcc: no frames");
  const std::size_t flen = frames.cols();
  const std::size_t nfft = fft_size(flen);
  const std::size_t bins = nfft / 2 + 1;
  const Tensor<double> fb = mel_filterbank(n_mels, nfft, sample_rate);
  const Tensor<double> dct = dct_matrix(n_coeffs, n_mels);
  const std::vector<double> window = hann_window(flen);

  struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
  };
  std::unique_ptr<double, FftwFree> in(fftw_alloc_real(nfft));
  std::unique_ptr<fftw_complex, FftwFree> out(fftw_alloc_complex(bins));
  // FFTW_ESTIMATE picks the plan without timing runs, so results are reproducible.
  fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(nfft), in.get(), out.get(), FFTW_ESTIMATE);
  std::unique_ptr<std::remove_pointer_t<fftw_plan>, decltype(&fftw_destroy_plan)> guard(plan, &fftw_destroy_plan);

  Tensor<double> coeffs(Shape{frames.rows(), n_coeffs});
  std::vector<double> power(bins), logmel(n_mels);
  for (std::size_t t = 0; t < frames.rows(); ++t) {
    const auto row = frames.row(t);
    std::fill_n(in.get(), nfft, 0.0);
    for (std::size_t i = 0; i < flen; ++i) in.get()[i] = row[i] * window[i];
    fftw_execute(plan);
    for (std::size_t k = 0; k < bins; ++k) {
      power[k] = out.get()[k][0] * out.get()[k][0] + out.get()[k][1] * out.get()[k][1];
    }
    for (std::size_t m = 0; m < n_mels; ++m) {
      double e = 0.0;
      for (std::size_t k = 0; k < bins; ++k) e += fb(m, k) * power[k];
      logmel[m] = std::log(std::max(e, log_floor));
    }
    for (std::size_t c = 0; c < n_coeffs; ++c) {
      double acc = 0.0;
      for (std::size_t m = 0; m < n_mels; ++m) acc += dct(c, m) * logmel[m];
      coeffs(t, c) = acc;
    }
  }
  return coeffs;
}

Tensor<double> deltas(const Tensor<double>& c, std::size_t width) {
  if (width == 0) throw std::invalid_argument("deltas: width must be positive");
  const std::size_t T = c.rows(), D = c.cols();
  if (T == 0) throw DataError("deltas: empty input");
  double denom = 0.0;
  for (std::size_t k = 1; k <= width; ++k) denom += static_cast<double>(k * k);
  denom *= 2.0;
  Tensor<double> d(Shape{T, D});
  const auto clamp_row = [&](std::ptrdiff_t t) {
    return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(t, 0, static_cast<std::ptrdiff_t>(T) - 1));
  };
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t j = 0; j < D; ++j) {
      double acc = 0.0;
      for (std::size_t k = 1; k <= width; ++k) {
        const auto ti = static_cast<std::ptrdiff_t>(t), ki = static_cast<std::ptrdiff_t>(k);
        acc += static_cast<double>(k) * (c(clamp_row(ti + ki), j) - c(clamp_row(ti - ki), j));
      }
      d(t, j) = acc / denom;
    }
  }
  return d;
}

Tensor<double> stack_deltas(const Tensor<double>& c, std::size_t width) {
  const Tensor<double> d1 = deltas(c, width);
  const Tensor<double> d2 = deltas(d1, width);
  const std::size_t T = c.rows(), D = c.cols();
  Tensor<double> out(Shape{T, 3 * D});
  for (std::size_t t = 0; t < T; ++t) {
    auto r = out.row(t);
    std::copy_n(c.row(t).begin(), D, r.begin());
    std::copy_n(d1.row(t).begin(), D, r.begin() + static_cast<std::ptrdiff_t>(D));
    std::copy_n(d2.row(t).begin(), D, r.begin() + static_cast<std::ptrdiff_t>(2 * D));
  }
  return out;
}

Tensor<double> featurize(const Waveform& w, const FeatureConfig& config) {
  const Tensor<double> frames = frame_signal(w, config.frame_ms, config.hop_ms);
  const Tensor<double> c = mfcc(frames, w.sample_rate, config.n_mels, config.n_coeffs, config.log_floor);
  return stack_deltas(c, config.delta_width);
}

FeatureStats fit_feature_stats(const std::vector<Tensor<double>>& corpus) {
  std::size_t frames = 0, dim = 0;
  for (const auto& m : corpus) {
    if (m.rows() == 0) continue;
    if (dim == 0) dim = m.cols();
    if (m.cols() != dim) throw DimensionError("normalize: feature widths differ across utterances");
    frames += m.rows();
  }
  if (frames == 0) throw DataError("normalize: empty corpus");
  FeatureStats s{std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)};
  for (const auto& m : corpus) {
    for (std::size_t t = 0; t < m.rows(); ++t)
      for (std::size_t j = 0; j < dim; ++j) s.mean[j] += m(t, j);
  }
  for (auto& v : s.mean) v /= static_cast<double>(frames);
  for (const auto& m : corpus) {
    for (std::size_t t = 0; t < m.rows(); ++t) {
      for (std::size_t j = 0; j < dim; ++j) {
        const double d = m(t, j) - s.mean[j];
        s.stddev[j] += d * d;
      }
    }
  }
  for (auto& v : s.stddev) v = std::max(std::sqrt(v / static_cast<double>(frames)), kFeatureStdFloor);
  return s;
}

FeatureStats normalize(std::vector<Tensor<double>>& corpus, const std::optional<FeatureStats>& stats) {
  FeatureStats s = stats ? *stats : fit_feature_stats(corpus);
  for (auto& m : corpus) {
    if (m.rows() > 0 && m.cols() != s.mean.size()) {
      throw DimensionError("normalize: statistics have " + std::to_string(s.mean.size()) +
                           " dims, features " + std::to_string(m.cols()));
    }
    for (std::size_t t = 0; t < m.rows(); ++t)
      for (std::size_t j = 0; j < m.cols(); ++j) m(t, j) = (m(t, j) - s.mean[j]) / s.stddev[j];
  }
  return s;
}

void normalize_per_utterance(std::vector<Tensor<double>>& corpus) {
  for (auto& m : corpus) {
    std::vector<Tensor<double>> one{std::move(m)};
    normalize(one);
    m = std::move(one.front());
  }
}

void save_feature_stats(const FeatureStats& stats, const std::filesystem::path& path) {
  if (stats.mean.size() != stats.stddev.size()) throw DimensionError("feature stats: mean and stddev sizes differ");
  io::ByteWriter w;
  w.raw("LDRSTAT1");
  w.u32(1);
  w.u32(static_cast<std::uint32_t>(stats.mean.size()));
  for (double v : stats.mean) w.f64(v);
  for (double v : stats.stddev) w.f64(v);
  w.save(path);
}

FeatureStats load_feature_stats(const std::filesystem::path& path) {
  auto r = io::ByteReader::open(path, "LDRSTAT1");
  if (const auto version = r.u32(); version != 1) {
    throw FormatError("unsupported feature stats version " + std::to_string(version));
  }
  FeatureStats s;
  const std::size_t dim = r.u32();
  s.mean.resize(dim);
  s.stddev.resize(dim);
  for (auto& v : s.mean) v = r.f64();
  for (auto& v : s.stddev) {
    v = r.f64();
    if (!(v > 0.0)) throw FormatError("feature stats: non-positive standard deviation");
  }
  r.finish();
  return s;
}

}  // namespace rln
