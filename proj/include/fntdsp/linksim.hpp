// Copyright 2026 The fntdsp Authors
// SPDX-License-Identifier: Apache-2.0

// Desk-scale coherent link: DP-16QAM transmitter, dispersive fiber with
// polarization and IQ impairments, AWGN noise loading, and a receiver that
// hosts the CDC and AEQ implementations under comparison.
//
// All waveforms are circular frames at 2 samples per symbol. Symbols sit on
// even samples; every filter in the chain is zero-phase or has its delay
// removed, so symbol m of the transmitter appears at sample 2m throughout.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fntdsp/aeq.hpp"
#include "fntdsp/cdc.hpp"
#include "fntdsp/fft.hpp"

namespace fntdsp::linksim {

/// Hard-decision FEC threshold used for every penalty figure.
inline constexpr double kHdFecBer = 3.8e-3;

inline constexpr int kPols = 2;
template <typename T>
using PolArray = std::array<T, kPols>;

enum class AeqScheme { kFnt, kTdFloat };
std::string to_string(AeqScheme s);
AeqScheme aeq_scheme_from_string(const std::string& s);

struct Scheme {
  CdcScheme cdc = CdcScheme::kFnt;
  AeqScheme aeq = AeqScheme::kFnt;

  /// "<cdc>+<aeq>", e.g. "fnt+fnt" or "fd-float+td-float".
  std::string name() const;
  static Scheme parse(const std::string& s);
  /// True if any stage runs on quantized integers.
  bool quantized() const noexcept { return cdc == CdcScheme::kFnt || aeq == AeqScheme::kFnt; }

  friend bool operator==(const Scheme&, const Scheme&) = default;
};

/// FNT chain and the all-floating reference it is compared against.
Scheme fnt_scheme();
Scheme reference_scheme();

struct LinkConfig {
  double baud = 40e9;
  std::size_t n_symbols = std::size_t{1} << 17;  // power of two
  double rolloff = 0.1;
  FiberParams fiber;  // z_km = transmission length
  std::vector<double> snr_db{12, 13, 14, 15, 16, 17, 18, 19, 20};

  double pol_rotation_deg = 45.0;
  double dgd_symbols = 0.2;
  double iq_skew_samples = 0.1;
  double iq_phase_deg = 0.0;  // receiver quadrature error

  std::uint64_t seed = 1;
  std::size_t discard_symbols = 20000;

  // CDC: compensated length. nullopt picks the longest length (up to the
  // fiber length) whose least-squares fit stays within cdc_ls_target_db of
  // in-band error, or with truncated taps whose dispersion support fits
  // cdc_fit_fill * n_taps samples. The AEQ absorbs the remainder.
  std::optional<double> cdc_z_km;
  CdTapMethod cdc_tap_method = CdTapMethod::kLeastSquares;
  double cdc_ls_regularization = 1e-3;
  double cdc_ls_target_db = -28.0;
  double cdc_fit_fill = 1.0;
  // Design the CDC taps over the signal band (1 + rolloff) * baud / 2 only,
  // rather than the whole sampled band.
  bool cdc_signal_band = true;
  std::size_t cdc_taps = 32;
  int cdc_tap_bits = 6;

  /// Tap design settings for a given compensated length.
  CdcConfig cdc_config(double z_km, CdcScheme scheme) const;

  int signal_bits = 5;
  // Quantizer full scale in multiples of the per-rail RMS at each 5-bit
  // stage input.
  double cdc_full_scale_rms = 2.5;
  double aeq_full_scale_rms = 2.0;

  // Band-limit the CDC output before 2:1 decimation.
  bool antialias = true;

  double aeq_mu = 1.0 / 1024.0;
  std::size_t cr_window = 8192;  // symbols per constant-phase estimate
  unsigned threads = 0;          // 0 = hardware concurrency

  double fs() const noexcept { return 2.0 * baud; }
  /// One-sided band edge of the shaped signal.
  double signal_band_hz() const noexcept { return (1 + rolloff) * baud / 2; }
  /// Band handed to the CDC tap design; 0 means the whole sampled band.
  double cdc_design_band_hz() const noexcept { return cdc_signal_band ? signal_band_hz() : 0.0; }
  /// The length handed to the CDC tap design.
  double compensated_km() const;
  /// Throws ConfigError on inconsistent settings.
  void validate() const;

  friend bool operator==(const LinkConfig&, const LinkConfig&) = default;
};

/// Gray-mapped 16QAM; bits b3 b2 select I, b1 b0 select Q.
cplx qam16_map(unsigned nibble) noexcept;
/// Nearest constellation point's nibble.
unsigned qam16_slice(cplx y) noexcept;

struct TxFrame {
  PolArray<std::vector<cplx>> symbols;  // unit average energy
  PolArray<std::vector<std::uint8_t>> nibbles;
  PolArray<std::vector<cplx>> wave;     // 2 Sa/symbol, unit power per pol
};

/// Root-raised-cosine amplitude response at frequency f.
double rrc_response(double f, double baud, double rolloff) noexcept;

TxFrame generate_tx(const LinkConfig& config);

/// Deterministic part of the channel: CD, DGD, rotation, IQ skew and
/// quadrature error, in that order.
PolArray<std::vector<cplx>> apply_impairments(const PolArray<std::vector<cplx>>& wave,
                                              const LinkConfig& config);

/// Adds complex AWGN for the given Es/N0 per polarization, measuring the
/// signal power from the frame itself.
void add_awgn(PolArray<std::vector<cplx>>& wave, double snr_db, double baud, double fs,
              std::uint64_t seed);

/// Full channel: impairments then noise.
PolArray<std::vector<cplx>> apply_channel(const TxFrame& tx, const LinkConfig& config,
                                          double snr_db, std::uint64_t noise_seed);

/// Orthonormalizes the I and Q rails of one polarization, keeping its
/// total power.
void gsop(std::vector<cplx>& pol);

/// Circular RRC matched filter.
void matched_filter(std::vector<cplx>& pol, double baud, double fs, double rolloff);

struct StageReport {
  std::string name;
  double power_in = 0;
  double power_out = 0;
  std::size_t clips = 0;
};

struct FrontendOutput {
  PolArray<std::vector<cplx>> symbols;  // 1 Sa/symbol, unit power per pol
  std::size_t phase = 0;                // chosen decimation phase
  std::vector<StageReport> stages;
  std::uint64_t cdc_mults = 0;
};

/// Matched-filtered 2 Sa/symbol frame -> 1 Sa/symbol streams. Runs 5-bit
/// quantization and the selected CDC scheme, removes the CDC delay, and
/// picks the decimation phase with the larger power.
FrontendOutput rx_frontend(const PolArray<std::vector<cplx>>& filtered, const LinkConfig& config,
                           CdcScheme scheme);

/// GSOP and matched filtering, shared by all schemes.
PolArray<std::vector<cplx>> rx_condition(PolArray<std::vector<cplx>> rx,
                                         const LinkConfig& config);

struct CarrierEstimate {
  std::vector<double> phase_rad;  // one per window
  std::vector<double> gain;
};

/// Constant-phase decision-aided recovery: a fourth-power seed refined by
/// least squares against 16QAM decisions, per window. Also normalizes gain.
CarrierEstimate carrier_recovery(std::vector<cplx>& symbols, std::size_t window);

/// How one real equalizer output rail maps back to a transmitted rail. The
/// 4x4 real equalizer may lock any output rail to any source rail, so the
/// search runs over all four with both signs.
struct RailAlignment {
  int source = 0;          // transmitted rail (XI, XQ, YI, YQ)
  int sign = 1;
  std::ptrdiff_t lag = 0;  // output index - source index
  double correlation = 0;  // normalized magnitude
};

RailAlignment align_rail(const std::vector<double>& out,
                         const RailArray<std::vector<double>>& tx_rails, std::size_t from,
                         std::size_t count, std::ptrdiff_t max_lag);

struct Metrics {
  std::string scheme;
  double snr_db = 0;
  double ber = 0;
  double evm_db = 0;
  double est_snr_db = 0;
  double q_factor_db = 0;
  std::uint64_t bits = 0;
  std::uint64_t errors = 0;
  bool converged = true;
  double penalty_db = 0;  // filled by sweep; NaN when undefined
  double cdc_mults_per_symbol = 0;  // per dual-pol CDC output sample
  double aeq_mults_per_symbol = 0;
  std::vector<StageReport> stages;
  std::string note;
};

/// 20 log10 of the Gaussian Q argument matching the BER.
double q_factor_db(double ber);

/// One SNR point for several schemes sharing the same noise realization.
std::vector<Metrics> run_point(const LinkConfig& config, const TxFrame& tx,
                               const PolArray<std::vector<cplx>>& impaired,
                               const std::vector<Scheme>& schemes, std::size_t snr_index);

/// Convenience for a single scheme and SNR.
Metrics run_link(const LinkConfig& config, const Scheme& scheme, double snr_db);

/// SNR at which the BER curve crosses `target`, by linear interpolation of
/// log10(BER) between bracketing points. nullopt if it never crosses.
std::optional<double> snr_at_ber(const std::vector<double>& snr_db,
                                 const std::vector<double>& ber, double target = kHdFecBer);

struct SweepResult {
  std::vector<Metrics> rows;  // ordered by scheme then SNR
  std::vector<std::string> schemes;
  std::vector<std::optional<double>> threshold_snr_db;  // per scheme
  std::vector<std::optional<double>> penalty_db;        // vs the first scheme
  bool all_converged = true;
};

/// Runs every scheme at every SNR point. The first scheme is the penalty
/// reference. Points run in parallel; results do not depend on thread count.
SweepResult sweep(const LinkConfig& config, const std::vector<Scheme>& schemes);

/// Frozen column order:
/// scheme,snr_db,ber,evm_db,est_snr_db,q_factor,bits,errors,converged,penalty_db
void write_csv(std::ostream& os, const SweepResult& result, const std::string& header_comment);

}  // namespace fntdsp::linksim
