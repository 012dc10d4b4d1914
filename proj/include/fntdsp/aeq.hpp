// Copyright 2026 The fntdsp Authors
// SPDX-License-Identifier: Apache-2.0

// 4x4 real-valued MIMO radially directed equalizer.
//
// The four rails XI, XQ, YI, YQ feed sixteen real FIR filters w[s1->s2].
// The forward path runs in the Fermat domain: each 14-bit tap set is split
// into two 7-bit sign-magnitude groups, both groups are convolved with the
// 5-bit input by 32-point FNT overlap-save, and the results recombine as
// 2^7 * high + low. Tap updates run in double precision and are requantized
// once per block.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "fntdsp/fixedpoint.hpp"
#include "fntdsp/fnt.hpp"

namespace fntdsp {

enum Rail : int { kXI = 0, kXQ = 1, kYI = 2, kYQ = 3 };
inline constexpr int kRails = 4;

template <typename T>
using RailArray = std::array<T, kRails>;

/// Ring radii of unit-energy 16QAM: sqrt(2/10), sqrt(10/10), sqrt(18/10).
std::vector<double> qam16_radii();

/// R^2 - (y_i^2 + y_q^2) with R the ring radius nearest to |y|.
double rde_error(double y_i, double y_q, std::span<const double> radii);

struct AeqConfig {
  std::size_t block_n = 32;
  std::size_t l_taps = 16;
  double mu = 1.0 / 1024.0;
  std::vector<double> radii = qam16_radii();
  int tap_bits = 14;        // magnitude bits; the sign is extra
  int group_bits = 7;
  double tap_scale = 8192;  // integer tap units per 1.0
  QuantSpec sig_spec{5, 10.0};
  // Start-up: the first cma_symbols adapt against the single constant-modulus
  // radius, which escapes the mixed-polarization saddle that RDE sits on.
  std::size_t cma_symbols = 16384;
  double cma_radius = 1.1489125293076057;  // sqrt(E|s|^4 / E|s|^2) = sqrt(1.32)
  double cma_mu_scale = 4.0;               // step size multiplier during start-up
  // Gain, relative to mu, of the start-up term that pushes the four output
  // rails apart; without it two outputs can lock onto the same source rail,
  // at the same or a different delay. Off once start-up ends.
  double decorrelation = 1.0;
  std::size_t decorrelation_lags = 8;

  /// Radii in force after `symbols` adapted symbols.
  std::span<const double> radii_at(std::size_t symbols) const;
  double mu_at(std::size_t symbols) const noexcept {
    return symbols < cma_symbols ? mu * cma_mu_scale : mu;
  }
  double decorrelation_at(std::size_t symbols) const noexcept {
    return symbols < cma_symbols ? decorrelation : 0.0;
  }

  /// Throws ConfigError on inconsistent settings.
  void validate() const;
};

/// Sixteen real filters with a double-precision accumulator, its 14-bit
/// requantization and the matching 7-bit split groups.
class RvMimoTaps {
 public:
  RvMimoTaps(std::size_t l_taps, int tap_bits, int group_bits, double tap_scale);

  std::size_t l_taps() const noexcept { return l_taps_; }
  double tap_scale() const noexcept { return tap_scale_; }
  std::int32_t max_magnitude() const noexcept { return max_mag_; }

  /// Diagonal filters get 1.0 at the center tap, everything else zero.
  void center_spike();
  void clear();

  double value(int s1, int s2, std::size_t k) const { return accum_[index(s1, s2, k)]; }
  /// All accumulator values laid out as [s1][s2][k].
  std::span<const double> values() const noexcept { return accum_; }
  std::int32_t quantized(int s1, int s2, std::size_t k) const { return master_[index(s1, s2, k)]; }
  std::span<const std::int32_t> filter(int s1, int s2) const {
    return {master_.data() + index(s1, s2, 0), l_taps_};
  }
  const SplitTaps& split(int s1, int s2) const { return split_[filter_index(s1, s2)]; }

  /// Sets one tap in physical units; returns true if it saturated.
  bool set(int s1, int s2, std::size_t k, double v);
  /// Adds a block of increments laid out as [s1][s2][k]; returns the number
  /// of taps that saturated at the 14-bit limit.
  std::size_t apply_delta(std::span<const double> delta);

  /// Bumped whenever the quantized taps change.
  std::uint64_t version() const noexcept { return version_; }

  std::size_t center() const noexcept { return l_taps_ / 2; }

 private:
  static std::size_t filter_index(int s1, int s2) {
    return static_cast<std::size_t>(s1 * kRails + s2);
  }
  std::size_t index(int s1, int s2, std::size_t k) const {
    return filter_index(s1, s2) * l_taps_ + k;
  }
  bool requantize(std::size_t i);
  void resplit(int s1, int s2);

  std::size_t l_taps_;
  int group_bits_;
  double tap_scale_;
  std::int32_t max_mag_;
  std::vector<double> accum_;
  std::vector<std::int32_t> master_;
  std::vector<SplitTaps> split_;
  std::uint64_t version_ = 0;
};

struct AeqBlockOutput {
  RailArray<std::vector<double>> y;         // physical units
  RailArray<std::vector<std::int64_t>> raw;  // exact integer outputs
};

/// Accumulates output cross-correlations c[a][b][d] = sum y_b[n] y_a[n-d]
/// for 0 <= d <= max_lag, then turns them into tap increments that remove
/// from each output the delayed copies of the others.
class OutputDecorrelator {
 public:
  explicit OutputDecorrelator(std::size_t max_lag);

  void push(const RailArray<double>& y);
  /// delta[s1][b][k] -= step * sum_{a != b, d} c * w[s1][a][k -+ d], using
  /// the taps w laid out as [s1][s2][k]. Clears the accumulated sums.
  void apply(std::span<const double> w, double step, std::size_t l, std::span<double> delta);

 private:
  std::size_t lags_;
  RailArray<std::vector<double>> hist_;  // circular, newest at pos_
  std::size_t pos_ = 0;
  std::vector<double> corr_;
};

/// FNT-domain equalizer state: taps, per-rail overlap history, error trace.
class FntAeq {
 public:
  /// Throws BudgetError if a 7-bit group against the signal grid can
  /// overflow, ConfigError on an invalid configuration.
  explicit FntAeq(AeqConfig config);

  const AeqConfig& config() const noexcept { return config_; }
  const BudgetReport& budget() const noexcept { return budget_; }
  RvMimoTaps& taps() noexcept { return taps_; }
  const RvMimoTaps& taps() const noexcept { return taps_; }
  std::size_t hop() const noexcept { return config_.block_n / 2; }

  /// Consumes hop() new quantized samples per rail, returns hop() outputs
  /// per rail.
  AeqBlockOutput equalize_block(const RailArray<std::span<const std::int32_t>>& in);

  /// RDE update from the block most recently passed to equalize_block;
  /// returns the number of saturated taps.
  std::size_t update_taps(const AeqBlockOutput& out);

  /// Equalizes whole rails (length a multiple of hop()), adapting after
  /// every block when `adapt` is set.
  RailArray<std::vector<double>> process(const RailArray<std::vector<std::int32_t>>& rails,
                                         bool adapt = true);

  /// Mean |e| over both polarizations, one entry per updated block.
  const std::vector<double>& error_trace() const noexcept { return error_trace_; }
  std::size_t symbols_processed() const noexcept { return symbols_; }
  std::size_t saturations() const noexcept { return saturations_; }

 private:
  void refresh_spectra();

  AeqConfig config_;
  TransformPlan plan_;
  RvMimoTaps taps_;
  BudgetReport budget_;
  std::uint64_t spectra_version_ = ~std::uint64_t{0};
  // [s1][s2][group] -> N residues; group 0 = high, 1 = low
  std::vector<FermatVector> tap_spectra_;
  RailArray<FermatVector> window_;
  RailArray<std::vector<double>> window_float_;
  FermatVector scratch_;
  std::vector<double> delta_;
  OutputDecorrelator decorrelator_;
  std::vector<double> error_trace_;
  std::size_t symbols_ = 0;
  std::size_t saturations_ = 0;
};

/// Floating-point direct-form 4x4 RDE with per-symbol updates.
class TdAeqFloat {
 public:
  explicit TdAeqFloat(AeqConfig config);
  /// Starts from the dequantized values of existing taps.
  TdAeqFloat(AeqConfig config, const RvMimoTaps& taps);

  double tap(int s1, int s2, std::size_t k) const {
    return w_[(static_cast<std::size_t>(s1 * kRails + s2)) * config_.l_taps + k];
  }

  /// One symbol in, one out.
  RailArray<double> step(const RailArray<double>& x, bool adapt = true);
  RailArray<std::vector<double>> process(const RailArray<std::vector<double>>& rails,
                                         bool adapt = true);

  const std::vector<double>& error_trace() const noexcept { return error_trace_; }

 private:
  AeqConfig config_;
  std::vector<double> w_;
  std::vector<double> delta_;
  OutputDecorrelator decorrelator_;
  RailArray<std::vector<double>> hist_;  // circular, newest at pos_
  std::size_t pos_ = 0;
  std::vector<double> error_trace_;
  double err_acc_ = 0;
  std::size_t err_n_ = 0;
  std::size_t symbols_ = 0;
};

/// CSV snapshot "in,out,k,value,quantized" with rail names XI/XQ/YI/YQ.
void write_taps_csv(std::ostream& os, const RvMimoTaps& taps);
/// CSV "block,mean_abs_error".
void write_error_trace_csv(std::ostream& os, std::span<const double> trace);

const char* rail_name(int rail);

RailArray<std::vector<double>> td_aeq_float(const RailArray<std::vector<double>>& rails,
                                            const AeqConfig& config, bool adapt = true);

/// Forward-only floating overlap-save 4x4 filter with block_n-point FFTs;
/// used to measure the frequency-domain cost.
RailArray<std::vector<double>> fd_aeq_forward_float(const RailArray<std::vector<double>>& rails,
                                                    const TdAeqFloat& taps,
                                                    std::size_t l_taps, std::size_t block_n);

}  // namespace fntdsp
