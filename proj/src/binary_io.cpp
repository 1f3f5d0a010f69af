// Copyright 2026 The RLN Authors
// SPDX-License-Identifier: Apache-2.0

#include "rln/binary_io.hpp"

#include <fstream>
#include <iterator>
#include <system_error>

namespace rln::io {

std::uint64_t fnv1a64(const std::uint8_t* data, std::size_t size) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= data[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

void ByteWriter::save(const std::filesystem::path& path) {
  std::vector<std::uint8_t> out = bytes_;
  const std::uint64_t sum = fnv1a64(out.data(), out.size());
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(sum >> (8 * i)));

  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::system_error(errno, std::generic_category(), "cannot write " + tmp.string());
    f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
    if (!f) throw std::system_error(errno, std::generic_category(), "write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

ByteReader ByteReader::open(const std::filesystem::path& path, std::string_view magic) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::system_error(errno, std::generic_category(), "cannot open " + path.string());
  ByteReader r;
  r.name_ = path.string();
  r.bytes_.assign(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());

  if (r.bytes_.size() < magic.size() ||
      std::memcmp(r.bytes_.data(), magic.data(), magic.size()) != 0) {
    throw FormatError(r.name_ + ": not a " + std::string(magic) + " file (bad magic)");
  }
  if (r.bytes_.size() < magic.size() + 8) throw ChecksumError(r.name_ + ": truncated file");
  const std::size_t body = r.bytes_.size() - 8;
  std::uint64_t stored = 0;
  for (int i = 0; i < 8; ++i) stored |= static_cast<std::uint64_t>(r.bytes_[body + i]) << (8 * i);
  if (stored != fnv1a64(r.bytes_.data(), body)) {
    throw ChecksumError(r.name_ + ": checksum mismatch (corrupt or truncated file)");
  }
  r.pos_ = magic.size();
  r.end_ = body;
  return r;
}

std::string ByteReader::str() {
  const std::size_t n = u32();
  const std::uint8_t* p = take(n);
  return {reinterpret_cast<const char*>(p), n};
}

void ByteReader::finish() const {
  if (pos_ != end_) throw FormatError(name_ + ": trailing bytes after payload");
}

const std::uint8_t* ByteReader::take(std::size_t n) {
  if (n > end_ - pos_) throw FormatError(name_ + ": payload ends unexpectedly");
  const std::uint8_t* p = bytes_.data() + pos_;
  pos_ += n;
  return p;
}

}  // namespace rln::io
