// Copyright 2026 The RLN Authors
// SPDX-License-Identifier: Apache-2.0

// Little-endian byte streams shared by the dataset and checkpoint formats.
// Both formats end in the FNV-1a 64 hash of every preceding byte.

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "rln/errors.hpp"

namespace rln::io {

std::uint64_t fnv1a64(const std::uint8_t* data, std::size_t size);

class ByteWriter {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void raw(std::string_view s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s);
  }

  /// Appends the checksum and writes the file atomically (temp + rename).
  void save(const std::filesystem::path& path);

  const std::vector<std::uint8_t>& bytes() const { return bytes_; }

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  /// Reads a whole file, checks `magic` (FormatError) and the trailing
  /// checksum (ChecksumError). The cursor starts just after the magic.
  static ByteReader open(const std::filesystem::path& path, std::string_view magic);

  std::uint8_t u8() { return take(1)[0]; }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str();

  /// Bytes left before the checksum.
  std::size_t remaining() const { return end_ - pos_; }
  /// Throws FormatError unless the payload was consumed exactly.
  void finish() const;

 private:
  const std::uint8_t* take(std::size_t n);
  std::uint64_t get(int n) {
    const std::uint8_t* p = take(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
  }

  std::string name_;
  std::vector<std::uint8_t> bytes_;
  std::size_t pos_ = 0;
  std::size_t end_ = 0;
};

}  // namespace rln::io
