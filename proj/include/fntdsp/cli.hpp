// Copyright 2026 The fntdsp Authors
// SPDX-License-Identifier: Apache-2.0

// Batch front end. Subcommands:
//   selftest    golden vectors, round trips and oracle convolutions
//   transform   FNT / inverse FNT of an integer list
//   convolve    real or complex cyclic convolution through the FNT
//   sweep       link-simulation BER sweep to CSV
//   complexity  real-multiplication table and reductions
//
// Exit codes: 0 success, 1 failure (self-test, budget or runtime error),
// 2 usage or configuration error, 3 completed with warnings.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "fntdsp/config.hpp"

namespace fntdsp::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kUsage = 2, kWarnings = 3 };

std::string sha256_hex(std::string_view data);

/// Provenance of one run. The digest covers the tool version, the command
/// and the resolved configuration (which includes seed and schemes); paths
/// are recorded but not hashed, so output bytes do not depend on where the
/// config lives or where results go.
struct RunManifest {
  std::string command;
  std::string config_path;
  std::uint64_t seed = 0;
  std::vector<std::string> schemes;
  std::string out_dir;
  std::string version;
  std::string config_json;  // canonical serialization

  std::string digest() const;
  /// Comment lines for CSV and text outputs, each starting with "# ".
  std::string header() const;
  /// Full manifest including paths, as JSON.
  std::string to_json() const;
};

/// Whitespace-separated signed integers; '#' starts a comment.
/// Throws ConfigError on anything else.
std::vector<std::int64_t> parse_int_list(std::istream& in);

struct SuiteResult {
  std::string name;
  std::size_t passed = 0;
  std::size_t total = 0;
  bool ok() const noexcept { return passed == total; }
};

struct SelftestOptions {
  std::uint64_t seed = 1;
  std::size_t vectors = 100;  // random cases per plan and suite
  // Corrupts one twiddle exponent in every plan the suites use.
  bool inject_fault = false;
};

std::vector<SuiteResult> run_selftest(const SelftestOptions& options);

/// Entry point; argv[0] is the program name.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fntdsp::cli
