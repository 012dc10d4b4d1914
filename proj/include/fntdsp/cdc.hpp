// Copyright 2026 The fntdsp Authors
// SPDX-License-Identifier: Apache-2.0

// Chromatic dispersion compensation.
//
// The FNT engine runs 50% overlap-save on 64-point blocks of 5-bit complex
// samples against 6-bit complex taps, with the complex product folded into
// two general Fermat multiplications per bin. The floating FD and TD
// versions implement the same linear convolution and serve as references.

#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fntdsp/fft.hpp"
#include "fntdsp/fixedpoint.hpp"
#include "fntdsp/fnt.hpp"

namespace fntdsp {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

struct FiberParams {
  double d_ps_nm_km = 17.0;  // dispersion parameter
  double lambda_nm = 1550.0;
  double z_km = 0.0;

  friend bool operator==(const FiberParams&, const FiberParams&) = default;
};

/// pi * lambda^2 * D * z / c in rad/Hz^2; the channel response is
/// exp(-j k f^2) and the compensator exp(+j k f^2).
double cd_phase_coefficient(const FiberParams& fiber) noexcept;

/// Number of samples spanned by the dispersed impulse response,
/// |D| lambda^2 z W fs / c, where W is the occupied bandwidth: 2 * band_hz,
/// or fs when band_hz is 0.
double cd_support_samples(const FiberParams& fiber, double fs, double band_hz = 0) noexcept;

/// Fiber length whose dispersion support is `fill` * n_taps samples.
double cd_fit_length_km(const FiberParams& fiber, double fs, std::size_t n_taps, double fill,
                        double band_hz = 0) noexcept;

/// Multiplies a whole circular frame by exp(sign * j k f^2) in the
/// frequency domain. sign = -1 is the channel, +1 the ideal compensator.
void apply_cd_allpass(std::span<cplx> frame, const FiberParams& fiber, double fs, int sign);

enum class CdcScheme { kFnt, kFdFloat, kTdFloat };

/// kTruncated cuts the inverse all-pass impulse response to n_taps.
/// kLeastSquares fits n_taps to the inverse response over the design band
/// only, with ridge regularization bounding the out-of-band gain.
enum class CdTapMethod { kTruncated, kLeastSquares };

std::string to_string(CdTapMethod m);
CdTapMethod cd_tap_method_from_string(const std::string& s);

std::string to_string(CdcScheme s);
CdcScheme cdc_scheme_from_string(const std::string& s);

struct CdcConfig {
  FiberParams fiber;          // z_km is the length being compensated
  double fs = 80e9;           // Sa/s
  std::size_t n_taps = 32;
  int tap_bits = 6;
  std::size_t block_n = 64;
  CdcScheme scheme = CdcScheme::kFnt;
  // When positive, the compensator is specified only on |f| <= design_band_hz
  // and is zero outside; its response is then shorter for the same length.
  double design_band_hz = 0;
  CdTapMethod method = CdTapMethod::kTruncated;
  double ls_regularization = 1e-3;  // ridge weight per unit band-average gain
};

struct CdTapDesign {
  std::vector<cplx> taps;        // unit energy
  std::size_t center = 0;        // index of the zero-delay tap
  double support_energy = 1.0;   // energy captured before normalization
  bool short_support = false;    // < 90% of the response energy captured
  double inband_error_db = 0;    // gain-matched error over the design band
  std::string warning;
};

/// n_taps approximation of the inverse dispersion all-pass (band limited to
/// design_band_hz when set), centered at n_taps/2 and normalized to unit
/// energy. kLeastSquares requires a design band.
CdTapDesign design_cd_taps(const CdcConfig& config);

struct QuantizedTaps {
  std::vector<std::int32_t> re;
  std::vector<std::int32_t> im;
  QuantSpec spec;
  std::size_t center = 0;

  std::size_t size() const noexcept { return re.size(); }
  /// max(|re|, |im|) per tap, the input to check_overflow.
  std::vector<std::int64_t> magnitudes() const;
};

/// Scales so that the largest component lands on the grid's max level.
QuantizedTaps quantize_taps(std::span<const cplx> taps, int bits, std::size_t center);
std::vector<cplx> dequantize(const QuantizedTaps& taps);

/// Plain-text tap list: "# bits=<b> scale=<s> center=<c>" then one "re im"
/// integer pair per line.
void write_taps(std::ostream& os, const QuantizedTaps& taps);
QuantizedTaps read_taps(std::istream& is);

/// Stateful FNT overlap-save engine for one polarization.
class CdcEngine {
 public:
  /// Throws BudgetError when the taps and signal grid can overflow the
  /// signed residue range, std::invalid_argument when the taps do not fit
  /// the block (n_taps > N/2 + 1).
  CdcEngine(QuantizedTaps taps, QuantSpec sig_spec,
            TransformPlan plan = TransformPlan::f65537_sqrt2_n64());

  const BudgetReport& budget() const noexcept { return budget_; }
  const QuantizedTaps& taps() const noexcept { return taps_; }
  std::size_t block_n() const noexcept { return plan_.size(); }
  /// New samples consumed (and outputs produced) per block.
  std::size_t hop() const noexcept { return plan_.size() / 2; }
  /// Integer output units per unit of physical amplitude.
  double output_scale() const noexcept { return sig_spec_.scale * taps_.spec.scale; }

  /// Consumes hop() new samples and writes hop() exact integer outputs.
  void process_block(std::span<const std::int32_t> new_re, std::span<const std::int32_t> new_im,
                     std::span<std::int64_t> out_re, std::span<std::int64_t> out_im);

  /// Streams a whole block through the engine; the tail is zero-padded to a
  /// whole number of hops and the output has the input's length.
  std::vector<cplx> process_stream(const QuantizedBlock& in);

  void reset();

 private:
  TransformPlan plan_;
  QuantizedTaps taps_;
  QuantSpec sig_spec_;
  BudgetReport budget_;
  ComplexConvolver conv_;
  FermatVector win_re_, win_im_, out_re_, out_im_;
};

/// Direct-form complex FIR, y[t] = sum_k h[k] x[t-k] with zero history.
std::vector<cplx> td_cdc_float(std::span<const cplx> stream, std::span<const cplx> taps);

/// Floating overlap-save with block_n-point FFTs; same output as
/// td_cdc_float up to rounding.
std::vector<cplx> fd_cdc_float(std::span<const cplx> stream, std::span<const cplx> taps,
                               std::size_t block_n = 64);

}  // namespace fntdsp
