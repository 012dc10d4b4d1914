// Copyright 2026 The fntdsp Authors
// SPDX-License-Identifier: Apache-2.0

// Real-multiplication accounting for the CDC and AEQ schemes: closed-form
// per-symbol costs, costs measured with the instrumentation counter, and
// the reductions that follow from both.
//
// CDC costs are per dual-polarization output sample of the 2 Sa/symbol
// stream; AEQ costs are per output symbol of the 4x4 equalizer. A complex
// floating multiplication counts as 4 real multiplications.

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fntdsp/op_counter.hpp"

namespace fntdsp::complexity {

enum class SchemeId { kFntCdc, kFdCdc, kTdCdc, kFntAeq, kFdAeq, kTdAeq };

std::string to_string(SchemeId s);
/// Accepts the names produced by to_string, e.g. "FNT-CDC".
SchemeId scheme_id_from_string(const std::string& s);

/// Closed-form real multiplications per symbol at length n:
/// FNT-CDC 8, FD-CDC 12 log2 n + 12, TD-CDC 6n,
/// FNT-AEQ 64, FD-AEQ 24 log2 n + 32, TD-AEQ 16n.
/// Throws ConfigError unless n is a power of two >= 2.
double formula_mults(SchemeId s, std::size_t n);

struct SchemeCost {
  SchemeId scheme = SchemeId::kFntCdc;
  std::size_t n = 0;
  double formula = 0;
  double measured = 0;  // counter total / emitted symbols
};

struct MeasureOptions {
  std::size_t cdc_n = 64;      // FNT and FD block length
  std::size_t aeq_n = 32;
  std::size_t td_cdc_taps = 32;
  std::size_t td_aeq_taps = 16;
  std::size_t symbols = 4096;  // per workload; a multiple of both hops
  std::uint64_t seed = 1;

  friend bool operator==(const MeasureOptions&, const MeasureOptions&) = default;
};

/// Runs each implementation on random data with the counter scoped to its
/// forward path. Throws ConfigError on unsupported lengths.
std::vector<SchemeCost> measure(const MeasureOptions& options = {});

/// Cost of a finished run from its tally.
SchemeCost cost_from_tally(SchemeId s, std::size_t n, std::uint64_t mults,
                           std::uint64_t symbols);

struct Reduction {
  std::string label;        // e.g. "FNT-CDC vs FD-CDC"
  double formula_pct = 0;   // 100 * (1 - proposed / baseline)
  double measured_pct = 0;
  std::optional<double> stated_pct;  // figure quoted alongside, if any
};

struct ReductionReport {
  std::vector<SchemeCost> costs;
  std::vector<Reduction> reductions;
};

/// Pairwise FNT-vs-FD reductions for CDC and AEQ and the combined
/// 1 - (FNT-CDC + FNT-AEQ) / (FD-CDC + FD-AEQ). Needs all four costs;
/// throws ConfigError otherwise.
ReductionReport reduction_report(const std::vector<SchemeCost>& costs);

/// Aligned text table followed by the reductions.
void write_text(std::ostream& os, const ReductionReport& report);
/// "scheme,n,formula,measured" rows, then "reduction,formula_pct,
/// measured_pct,stated_pct" rows.
void write_csv(std::ostream& os, const ReductionReport& report);

}  // namespace fntdsp::complexity
