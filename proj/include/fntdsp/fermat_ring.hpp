// Copyright 2026 The fntdsp Authors
// SPDX-License-Identifier: Apache-2.0

// Arithmetic modulo a Fermat prime F_t = 2^(2^t) + 1.
//
// With b = 2^t we have 2^b = -1 (mod F), so a double-width value
// v = hi * 2^b + lo reduces to lo - hi, and multiplying by any power of two
// is a shift followed by the same fold. Only mul() is a general product;
// it is the operation tallied by the complexity counters.

#pragma once

#include <cassert>
#include <cstdint>
#include <string>

#include "fntdsp/op_counter.hpp"

namespace fntdsp {

struct FermatParams {
  unsigned t = 4;
  unsigned bits = 16;          // b = 2^t
  std::uint64_t modulus = 65537;  // F = 2^b + 1

  /// t must be in [0, 4]; F_0..F_4 are the Fermat primes.
  static FermatParams from_index(unsigned t);
  static FermatParams from_modulus(std::uint64_t modulus);

  /// Largest magnitude representable as a signed residue, (F - 1) / 2.
  std::uint64_t signed_limit() const noexcept { return (modulus - 1) / 2; }

  friend bool operator==(const FermatParams&, const FermatParams&) = default;
};

/// Canonical representative in [0, F). The value 2^b (that is, -1) is a
/// legal residue; no diminished-one encoding is used.
struct Residue {
  std::uint64_t value = 0;

  friend bool operator==(Residue, Residue) = default;
};

class FermatRing {
 public:
  explicit FermatRing(FermatParams params) noexcept
      : params_(params), low_mask_((std::uint64_t{1} << params.bits) - 1) {}

  const FermatParams& params() const noexcept { return params_; }
  std::uint64_t modulus() const noexcept { return params_.modulus; }
  unsigned bits() const noexcept { return params_.bits; }

  /// v mod F for v < F^2, using the split v = hi * 2^b + lo.
  Residue reduce(std::uint64_t v) const noexcept {
    assert(v < params_.modulus * params_.modulus);
    const auto hi = static_cast<std::int64_t>(v >> params_.bits);
    const auto lo = static_cast<std::int64_t>(v & low_mask_);
    const auto f = static_cast<std::int64_t>(params_.modulus);
    std::int64_t d = lo - hi;
    if (d < 0) d += f;
    if (d < 0) d += f;  // hi can exceed 2^b by two when v is near F^2
    return Residue{static_cast<std::uint64_t>(d)};
  }

  /// |v| <= (F - 1) / 2, otherwise RangeError.
  Residue encode_signed(std::int64_t v) const;

  std::int64_t decode_signed(Residue r) const noexcept {
    return r.value <= params_.signed_limit()
               ? static_cast<std::int64_t>(r.value)
               : static_cast<std::int64_t>(r.value) -
                     static_cast<std::int64_t>(params_.modulus);
  }

  Residue add(Residue a, Residue b) const noexcept {
    std::uint64_t s = a.value + b.value;
    if (s >= params_.modulus) s -= params_.modulus;
    return Residue{s};
  }

  Residue sub(Residue a, Residue b) const noexcept {
    return Residue{a.value >= b.value ? a.value - b.value
                                      : a.value + params_.modulus - b.value};
  }

  Residue neg(Residue a) const noexcept {
    return Residue{a.value == 0 ? 0 : params_.modulus - a.value};
  }

  /// a * 2^s for any integer s. Negative shifts use 2^(2b) = 1.
  Residue mul_pow2(Residue a, std::int64_t s) const noexcept {
    const std::int64_t period = 2 * static_cast<std::int64_t>(params_.bits);
    std::int64_t k = s % period;
    if (k < 0) k += period;
    if (k >= static_cast<std::int64_t>(params_.bits)) {
      a = neg(a);
      k -= params_.bits;
    }
    return reduce(a.value << k);
  }

  /// a * sqrt(2) as two shifts and a subtraction: sqrt(2) = 2^(3b/4) - 2^(b/4).
  /// Requires b >= 4.
  Residue mul_sqrt2(Residue a) const noexcept {
    assert(params_.bits >= 4);
    return sub(mul_pow2(a, 3 * params_.bits / 4), mul_pow2(a, params_.bits / 4));
  }

  /// General product; tallied as one real multiplication.
  Residue mul(Residue a, Residue b) const noexcept {
    complexity::tally();
    return mul_untallied(a, b);
  }

  /// Product used for plan construction and other setup work that is not
  /// part of the per-sample cost model.
  Residue mul_untallied(Residue a, Residue b) const noexcept {
    return reduce(a.value * b.value);
  }

  Residue pow(Residue a, std::uint64_t e) const noexcept;

  /// Multiplicative inverse by Fermat's little theorem. a must be nonzero.
  Residue inverse(Residue a) const noexcept { return pow(a, params_.modulus - 2); }

  /// 2^(b/4) * (2^(b/2) - 1) mod F, a square root of 2. Requires b >= 4.
  Residue sqrt2() const;

  /// Multiplicative order of a (a nonzero).
  std::uint64_t order(Residue a) const noexcept;

 private:
  FermatParams params_;
  std::uint64_t low_mask_;
};

std::string to_string(const FermatParams& p);

}  // namespace fntdsp
