// Copyright 2026 The fntdsp Authors
// SPDX-License-Identifier: Apache-2.0

// Run configuration: one JSON document (comments allowed) holding the link
// settings, the schemes to compare, and the complexity workload. Unknown
// keys are rejected so that a typo never silently falls back to a default.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fntdsp/complexity.hpp"
#include "fntdsp/linksim.hpp"

namespace fntdsp {

struct RunConfig {
  std::uint64_t seed = 1;
  linksim::LinkConfig link;
  std::vector<linksim::Scheme> schemes{linksim::reference_scheme(), linksim::fnt_scheme()};
  complexity::MeasureOptions complexity;

  /// Pushes the top-level seed into the link and complexity settings.
  void apply_seed(std::uint64_t s);
  /// Throws ConfigError on inconsistent settings.
  void validate() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Throws ConfigError on malformed JSON, unknown keys or wrong types.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Canonical JSON with every field spelled out; parse_config of the result
/// reproduces the same RunConfig.
std::string serialize_config(const RunConfig& config);

}  // namespace fntdsp
