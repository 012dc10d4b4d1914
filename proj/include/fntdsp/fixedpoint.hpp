// Copyright 2026 The fntdsp Authors
// SPDX-License-Identifier: Apache-2.0

// Quantization to narrow signed grids, the transform overflow budget, and
// the sign-magnitude split of wide taps into two narrow groups.

#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fntdsp/fermat_ring.hpp"

namespace fntdsp {

/// Signed grid of `bit_width` bits with symmetric range
/// [-(2^(bit_width-1) - 1), 2^(bit_width-1) - 1]. `scale` maps a physical
/// amplitude to grid units.
struct QuantSpec {
  int bit_width = 5;
  double scale = 1.0;

  static QuantSpec make(int bit_width, double scale);

  std::int32_t max_level() const noexcept { return (std::int32_t{1} << (bit_width - 1)) - 1; }

  friend bool operator==(const QuantSpec&, const QuantSpec&) = default;
};

/// Round half away from zero, then clip. Sets *clipped when clipping occurred.
std::int32_t quantize_value(double v, const QuantSpec& spec, bool* clipped = nullptr) noexcept;

struct QuantizedBlock {
  std::vector<std::int32_t> re;
  std::vector<std::int32_t> im;
  QuantSpec spec;
  std::size_t clip_count = 0;  // clipped real components

  std::size_t size() const noexcept { return re.size(); }
};

QuantizedBlock quantize(std::span<const std::complex<double>> samples, const QuantSpec& spec);

struct QuantizedReal {
  std::vector<std::int32_t> values;
  QuantSpec spec;
  std::size_t clip_count = 0;
};

QuantizedReal quantize(std::span<const double> samples, const QuantSpec& spec);

enum class ConvKind { kReal, kComplex };

/// Outcome of the overflow check max|x| * sum|h| (x2 for complex) <= (F-1)/2.
struct BudgetReport {
  ConvKind kind = ConvKind::kReal;
  std::int64_t max_signal = 0;
  std::int64_t tap_sum = 0;
  std::int64_t bound = 0;
  std::int64_t limit = 0;
  bool pass = false;

  std::int64_t margin() const noexcept { return limit - bound; }
  /// One line, e.g. "complex: 2*15*992 = 29760 <= 32768 (margin 3008) pass".
  std::string describe() const;
};

/// `tap_mags` holds per-tap magnitudes; only nonzero taps contribute, which
/// is the zero-padding relaxation for linear convolution via cyclic
/// convolution. For complex taps pass max(|re|, |im|) per tap.
BudgetReport check_overflow(std::span<const std::int64_t> tap_mags, const QuantSpec& sig_spec,
                            const FermatParams& params, ConvKind kind);

/// Wide tap split into two narrow groups: w = sign * (high * 2^group_bits + low)
/// with the sign applied to both groups.
struct SplitTaps {
  std::vector<std::int32_t> high;
  std::vector<std::int32_t> low;
  int group_bits = 7;
};

/// |w| < 2^(2 * group_bits), otherwise RangeError.
SplitTaps split_taps(std::span<const std::int32_t> w, int group_bits = 7);

inline std::int64_t recombine(std::int64_t conv_high, std::int64_t conv_low,
                              int group_bits = 7) noexcept {
  return conv_high * (std::int64_t{1} << group_bits) + conv_low;
}

std::vector<std::int64_t> recombine(std::span<const std::int64_t> conv_high,
                                    std::span<const std::int64_t> conv_low, int group_bits = 7);

}  // namespace fntdsp
