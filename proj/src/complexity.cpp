// Copyright 2026 The fntdsp Authors
// SPDX-License-Identifier: Apache-2.0

#include "fntdsp/complexity.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <random>

#include "fntdsp/aeq.hpp"
#include "fntdsp/cdc.hpp"
#include "fntdsp/errors.hpp"

namespace fntdsp::complexity {

namespace {

constexpr SchemeId kAll[] = {SchemeId::kFntCdc, SchemeId::kFdCdc,  SchemeId::kTdCdc,
                             SchemeId::kFntAeq, SchemeId::kFdAeq, SchemeId::kTdAeq};

// Rounded reference figures for the same comparisons, printed beside the
// values recomputed from the closed forms.
constexpr double kStatedCdcPct = 89;
constexpr double kStatedAeqPct = 58;
constexpr double kStatedCombinedPct = 68;

void check_length(std::size_t n, const char* what) {
  if (n < 2 || !std::has_single_bit(n)) {
    throw ConfigError(std::string(what) + " must be a power of two >= 2");
  }
}

std::vector<cplx> random_complex(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g(0, 0.3);
  std::vector<cplx> v(n);
  for (auto& x : v) x = {g(rng), g(rng)};
  return v;
}

RailArray<std::vector<double>> random_rails(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g(0, 0.3);
  RailArray<std::vector<double>> r;
  for (auto& v : r) {
    v.resize(n);
    for (auto& x : v) x = g(rng);
  }
  return r;
}

// A single-polarization CDC run doubled to a dual-polarization sample.
double dual_pol(std::uint64_t mults, std::size_t samples) {
  return 2.0 * static_cast<double>(mults) / static_cast<double>(samples);
}

double per_symbol(std::uint64_t mults, std::size_t symbols) {
  return static_cast<double>(mults) / static_cast<double>(symbols);
}

const SchemeCost* find(const std::vector<SchemeCost>& costs, SchemeId s) {
  for (const auto& c : costs)
    if (c.scheme == s) return &c;
  return nullptr;
}

double pct(double proposed, double baseline) { return 100.0 * (1.0 - proposed / baseline); }

}  // namespace

std::string to_string(SchemeId s) {
  switch (s) {
    case SchemeId::kFntCdc: return "FNT-CDC";
    case SchemeId::kFdCdc: return "FD-CDC";
    case SchemeId::kTdCdc: return "TD-CDC";
    case SchemeId::kFntAeq: return "FNT-AEQ";
    case SchemeId::kFdAeq: return "FD-AEQ";
    case SchemeId::kTdAeq: return "TD-AEQ";
  }
  return "?";
}

SchemeId scheme_id_from_string(const std::string& s) {
  for (SchemeId id : kAll)
    if (to_string(id) == s) return id;
  throw ConfigError("unknown complexity scheme '" + s + "'");
}

double formula_mults(SchemeId s, std::size_t n) {
  check_length(n, "length");
  const double lg = std::log2(static_cast<double>(n));
  const double nd = static_cast<double>(n);
  switch (s) {
    case SchemeId::kFntCdc: return 8;
    case SchemeId::kFdCdc: return 12 * lg + 12;
    case SchemeId::kTdCdc: return 6 * nd;
    case SchemeId::kFntAeq: return 64;
    case SchemeId::kFdAeq: return 24 * lg + 32;
    case SchemeId::kTdAeq: return 16 * nd;
  }
  throw ConfigError("unknown complexity scheme");
}

SchemeCost cost_from_tally(SchemeId s, std::size_t n, std::uint64_t mults,
                           std::uint64_t symbols) {
  if (symbols == 0) throw ConfigError("cost needs at least one symbol");
  return {s, n, formula_mults(s, n),
          static_cast<double>(mults) / static_cast<double>(symbols)};
}

std::vector<SchemeCost> measure(const MeasureOptions& o) {
  check_length(o.cdc_n, "CDC block length");
  check_length(o.aeq_n, "AEQ block length");
  check_length(o.td_cdc_taps, "TD-CDC length");
  check_length(o.td_aeq_taps, "TD-AEQ length");
  if (o.cdc_n != 64) throw ConfigError("the FNT CDC runs on 64-point blocks");
  if (o.aeq_n != 32) throw ConfigError("the FNT AEQ runs on 32-point blocks");
  const std::size_t n = o.symbols;
  if (n == 0 || n % 32 != 0) throw ConfigError("symbols must be a positive multiple of 32");

  std::mt19937_64 rng(o.seed);
  std::vector<SchemeCost> out;

  {  // FNT-CDC
    std::uniform_int_distribution<std::int32_t> tap(-31, 31);
    QuantizedTaps q;
    for (std::size_t k = 0; k < o.cdc_n / 2; ++k) {
      q.re.push_back(tap(rng));
      q.im.push_back(tap(rng));
    }
    q.spec = QuantSpec::make(6, 31);
    const QuantSpec sig = QuantSpec::make(5, 10);
    const QuantizedBlock x = quantize(random_complex(rng, n), sig);
    std::optional<CdcEngine> eng;
    {
      const SetupScope setup;
      eng.emplace(q, sig);
    }
    const ScopedTally t;
    eng->process_stream(x);
    out.push_back({SchemeId::kFntCdc, o.cdc_n, formula_mults(SchemeId::kFntCdc, o.cdc_n),
                   dual_pol(t.count(), n)});
  }
  {  // FD-CDC
    const auto taps = random_complex(rng, o.cdc_n / 2);
    const auto x = random_complex(rng, n);
    const ScopedTally t;
    fd_cdc_float(x, taps, o.cdc_n);
    out.push_back({SchemeId::kFdCdc, o.cdc_n, formula_mults(SchemeId::kFdCdc, o.cdc_n),
                   dual_pol(t.count(), n)});
  }
  {  // TD-CDC
    const auto taps = random_complex(rng, o.td_cdc_taps);
    const auto x = random_complex(rng, n);
    const ScopedTally t;
    td_cdc_float(x, taps);
    out.push_back({SchemeId::kTdCdc, o.td_cdc_taps,
                   formula_mults(SchemeId::kTdCdc, o.td_cdc_taps), dual_pol(t.count(), n)});
  }
  {  // FNT-AEQ, forward path only
    AeqConfig cfg;
    cfg.mu = 0;
    std::optional<FntAeq> eq;
    RailArray<std::vector<std::int32_t>> q;
    {
      const SetupScope setup;
      eq.emplace(cfg);
      const auto x = random_rails(rng, n);
      for (int r = 0; r < kRails; ++r) q[r] = quantize(x[r], cfg.sig_spec).values;
      RailArray<std::vector<std::int32_t>> prime;
      for (auto& v : prime) v.assign(eq->hop(), 0);
      eq->process(prime, false);  // builds the tap spectra
    }
    const ScopedTally t;
    eq->process(q, false);
    out.push_back({SchemeId::kFntAeq, o.aeq_n, formula_mults(SchemeId::kFntAeq, o.aeq_n),
                   per_symbol(t.count(), n)});
  }
  {  // FD-AEQ
    AeqConfig cfg;
    cfg.mu = 0;
    cfg.block_n = o.aeq_n;
    cfg.l_taps = o.aeq_n / 2;
    const TdAeqFloat taps(cfg);
    const auto x = random_rails(rng, n);
    const ScopedTally t;
    fd_aeq_forward_float(x, taps, cfg.l_taps, cfg.block_n);
    out.push_back({SchemeId::kFdAeq, o.aeq_n, formula_mults(SchemeId::kFdAeq, o.aeq_n),
                   per_symbol(t.count(), n)});
  }
  {  // TD-AEQ
    AeqConfig cfg;
    cfg.mu = 0;
    cfg.block_n = 2 * o.td_aeq_taps;
    cfg.l_taps = o.td_aeq_taps;
    TdAeqFloat eq(cfg);
    const auto x = random_rails(rng, n);
    const ScopedTally t;
    eq.process(x, false);
    out.push_back({SchemeId::kTdAeq, o.td_aeq_taps,
                   formula_mults(SchemeId::kTdAeq, o.td_aeq_taps), per_symbol(t.count(), n)});
  }
  return out;
}

ReductionReport reduction_report(const std::vector<SchemeCost>& costs) {
  const SchemeCost* fc = find(costs, SchemeId::kFntCdc);
  const SchemeCost* dc = find(costs, SchemeId::kFdCdc);
  const SchemeCost* fa = find(costs, SchemeId::kFntAeq);
  const SchemeCost* da = find(costs, SchemeId::kFdAeq);
  if (!fc || !dc || !fa || !da) {
    throw ConfigError("reductions need FNT-CDC, FD-CDC, FNT-AEQ and FD-AEQ costs");
  }
  ReductionReport r;
  r.costs = costs;
  r.reductions.push_back({"FNT-CDC vs FD-CDC", pct(fc->formula, dc->formula),
                          pct(fc->measured, dc->measured), kStatedCdcPct});
  r.reductions.push_back({"FNT-AEQ vs FD-AEQ", pct(fa->formula, da->formula),
                          pct(fa->measured, da->measured), kStatedAeqPct});
  r.reductions.push_back({"FNT-CDC+AEQ vs FD-CDC+AEQ",
                          pct(fc->formula + fa->formula, dc->formula + da->formula),
                          pct(fc->measured + fa->measured, dc->measured + da->measured),
                          kStatedCombinedPct});
  return r;
}

void write_text(std::ostream& os, const ReductionReport& report) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-10s %5s %10s %10s\n", "scheme", "N", "formula", "measured");
  os << buf;
  for (const auto& c : report.costs) {
    std::snprintf(buf, sizeof buf, "%-10s %5zu %10.2f %10.2f\n", to_string(c.scheme).c_str(), c.n,
                  c.formula, c.measured);
    os << buf;
  }
  os << '\n';
  for (const auto& r : report.reductions) {
    std::snprintf(buf, sizeof buf, "%-28s formula %5.1f%%  measured %5.1f%%", r.label.c_str(),
                  r.formula_pct, r.measured_pct);
    os << buf;
    if (r.stated_pct) {
      std::snprintf(buf, sizeof buf, "  stated %.0f%%", *r.stated_pct);
      os << buf;
    }
    os << '\n';
  }
  os << "\nCDC costs are per dual-polarization sample, AEQ costs per symbol.\n"
        "Measured counts take a complex multiplication as 4 real ones; under the\n"
        "3-multiplication form TD-CDC's direct form costs 6N, as in its formula.\n";
}

void write_csv(std::ostream& os, const ReductionReport& report) {
  char buf[160];
  os << "scheme,n,formula,measured\n";
  for (const auto& c : report.costs) {
    std::snprintf(buf, sizeof buf, "%s,%zu,%.4f,%.4f\n", to_string(c.scheme).c_str(), c.n,
                  c.formula, c.measured);
    os << buf;
  }
  os << "reduction,formula_pct,measured_pct,stated_pct\n";
  for (const auto& r : report.reductions) {
    std::snprintf(buf, sizeof buf, "%s,%.4f,%.4f,", r.label.c_str(), r.formula_pct,
                  r.measured_pct);
    os << buf;
    if (r.stated_pct) {
      std::snprintf(buf, sizeof buf, "%.0f", *r.stated_pct);
      os << buf;
    }
    os << '\n';
  }
}

}  // namespace fntdsp::complexity
