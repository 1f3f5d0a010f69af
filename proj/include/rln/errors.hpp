// Copyright 2026 The RLN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace rln {

/// Shapes of operands disagree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A non-finite value appeared where finite values are required.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed file content: bad magic, truncation, unsupported version.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Stored checksum does not match the payload.
class ChecksumError : public FormatError {
 public:
  using FormatError::FormatError;
};

/// Data or configuration cannot satisfy a requested constraint.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// No CTC alignment of the label fits into the available frames.
class InfeasibleAlignment : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace rln
