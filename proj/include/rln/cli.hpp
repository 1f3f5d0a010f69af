// Copyright 2026 The RLN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace rln::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,    ///< bad arguments or configuration
  kData = 2,     ///< unreadable, inconsistent or corrupt data
  kNumeric = 3,  ///< training diverged (NaN / Inf)
};

/// Runs `rln <args...>` (args excludes the program name). Normal output goes
/// to `out`, diagnostics to `err`; returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rln::cli
