// Copyright 2026 The fntdsp Authors
// SPDX-License-Identifier: Apache-2.0

#include "fntdsp/fixedpoint.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

#include "fntdsp/errors.hpp"

namespace fntdsp {

QuantSpec QuantSpec::make(int bit_width, double scale) {
  if (bit_width < 2 || bit_width > 31) {
    throw std::invalid_argument("quantizer bit width must be in [2, 31], got " +
                                std::to_string(bit_width));
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw std::invalid_argument("quantizer scale must be positive and finite");
  }
  return QuantSpec{bit_width, scale};
}

std::int32_t quantize_value(double v, const QuantSpec& spec, bool* clipped) noexcept {
  const double level = static_cast<double>(spec.max_level());
  const double x = std::round(v * spec.scale);  // half away from zero
  if (clipped) *clipped = std::abs(x) > level;
  if (x > level) return spec.max_level();
  if (x < -level) return -spec.max_level();
  return static_cast<std::int32_t>(x);
}

QuantizedBlock quantize(std::span<const std::complex<double>> samples, const QuantSpec& spec) {
  QuantizedBlock out;
  out.spec = spec;
  out.re.reserve(samples.size());
  out.im.reserve(samples.size());
  for (const auto& s : samples) {
    bool c_re = false;
    bool c_im = false;
    out.re.push_back(quantize_value(s.real(), spec, &c_re));
    out.im.push_back(quantize_value(s.imag(), spec, &c_im));
    out.clip_count += static_cast<std::size_t>(c_re) + static_cast<std::size_t>(c_im);
  }
  return out;
}

QuantizedReal quantize(std::span<const double> samples, const QuantSpec& spec) {
  QuantizedReal out;
  out.spec = spec;
  out.values.reserve(samples.size());
  for (double s : samples) {
    bool c = false;
    out.values.push_back(quantize_value(s, spec, &c));
    out.clip_count += static_cast<std::size_t>(c);
  }
  return out;
}

std::string BudgetReport::describe() const {
  std::ostringstream os;
  os << (kind == ConvKind::kComplex ? "complex: 2*" : "real: ") << max_signal << "*" << tap_sum
     << " = " << bound << (pass ? " <= " : " > ") << limit << " (margin " << margin() << ") "
     << (pass ? "pass" : "FAIL");
  return os.str();
}

BudgetReport check_overflow(std::span<const std::int64_t> tap_mags, const QuantSpec& sig_spec,
                            const FermatParams& params, ConvKind kind) {
  BudgetReport r;
  r.kind = kind;
  r.max_signal = sig_spec.max_level();
  for (auto m : tap_mags) r.tap_sum += std::llabs(m);
  r.bound = r.max_signal * r.tap_sum * (kind == ConvKind::kComplex ? 2 : 1);
  r.limit = static_cast<std::int64_t>(params.signed_limit());
  r.pass = r.bound <= r.limit;
  return r;
}

SplitTaps split_taps(std::span<const std::int32_t> w, int group_bits) {
  if (group_bits < 1 || group_bits > 15) {
    throw std::invalid_argument("group width must be in [1, 15]");
  }
  const std::int32_t radix = std::int32_t{1} << group_bits;
  const std::int32_t limit = radix * radix;
  SplitTaps out;
  out.group_bits = group_bits;
  out.high.reserve(w.size());
  out.low.reserve(w.size());
  for (auto v : w) {
    const std::int32_t m = std::abs(v);
    if (m >= limit) {
      throw RangeError("tap " + std::to_string(v) + " needs more than " +
                       std::to_string(2 * group_bits) + " magnitude bits");
    }
    const std::int32_t sign = v < 0 ? -1 : 1;
    out.high.push_back(sign * (m / radix));
    out.low.push_back(sign * (m % radix));
  }
  return out;
}

std::vector<std::int64_t> recombine(std::span<const std::int64_t> conv_high,
                                    std::span<const std::int64_t> conv_low, int group_bits) {
  if (conv_high.size() != conv_low.size()) {
    throw std::invalid_argument("recombine: group lengths differ");
  }
  std::vector<std::int64_t> out(conv_high.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = recombine(conv_high[i], conv_low[i], group_bits);
  }
  return out;
}

}  // namespace fntdsp
