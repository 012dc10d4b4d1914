// Copyright 2026 The fntdsp Authors
// SPDX-License-Identifier: Apache-2.0

// Radix-2 Fermat number transform and fast cyclic convolution.
//
// A plan fixes (F, alpha, N). Every supported radix is either 2^s or
// sqrt(2) * 2^s, so each twiddle alpha^e is applied with shifts, adds and at
// most one shift-subtract; the butterflies never call FermatRing::mul.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fntdsp/fermat_ring.hpp"

namespace fntdsp {

using FermatVector = std::vector<Residue>;

class TransformPlan {
 public:
  /// Validates alpha^N = 1 and alpha^(N/2) = -1 (order exactly N) and that
  /// alpha is a shift-add radix. Throws InvalidPlan / UnsupportedParameter.
  static TransformPlan make(FermatParams params, Residue alpha, std::size_t n);

  /// 8-point, radix 2, modulus 17.
  static TransformPlan f17_radix2_n8();
  /// 32-point, radix 2, modulus 65537 (adaptive equalizer).
  static TransformPlan f65537_radix2_n32();
  /// 64-point, radix sqrt(2) = 4080, modulus 65537 (dispersion compensation).
  static TransformPlan f65537_sqrt2_n64();
  /// Looks up one of the shipped plans by id() string.
  static TransformPlan by_id(const std::string& id);
  static std::vector<std::string> shipped_ids();

  const FermatRing& ring() const noexcept { return ring_; }
  const FermatParams& params() const noexcept { return ring_.params(); }
  std::size_t size() const noexcept { return n_; }
  unsigned log2_size() const noexcept { return log2n_; }
  Residue alpha() const noexcept { return alpha_; }
  Residue alpha_inv() const noexcept { return alpha_inv_; }
  Residue n_inv() const noexcept { return n_inv_; }
  const std::string& id() const noexcept { return id_; }

  std::span<const std::uint32_t> bit_reversal() const noexcept { return bitrev_; }
  /// Twiddle exponents (powers of alpha) used by butterfly stage s, whose
  /// span is 2^(s+1).
  std::span<const std::uint32_t> stage_exponents(unsigned stage) const noexcept {
    return twiddles_[stage];
  }

  /// x * alpha^e using shifts and adds only.
  Residue apply_twiddle(Residue x, std::uint32_t e) const noexcept {
    e %= static_cast<std::uint32_t>(n_);
    std::int64_t shift = static_cast<std::int64_t>(e) * pow2_shift_;
    if (sqrt2_radix_) {
      shift += e / 2;
      if (e & 1) x = ring_.mul_sqrt2(x);
    }
    return ring_.mul_pow2(x, shift);
  }

  /// Copy of this plan with one twiddle exponent altered. Used by the
  /// self-test's fault-injection mode; never produces a correct transform.
  TransformPlan with_twiddle_fault(unsigned stage, std::size_t index) const;

 private:
  TransformPlan(FermatParams params) : ring_(params) {}

  FermatRing ring_;
  std::size_t n_ = 0;
  unsigned log2n_ = 0;
  Residue alpha_, alpha_inv_, n_inv_;
  bool sqrt2_radix_ = false;
  std::int64_t pow2_shift_ = 0;  // alpha = 2^shift or sqrt(2) * 2^shift
  std::vector<std::uint32_t> bitrev_;
  std::vector<std::vector<std::uint32_t>> twiddles_;
  std::string id_;
};

/// X(k) = sum_n x(n) alpha^(nk) mod F. Decimation in time with a
/// bit-reversal pre-permutation.
void fnt_inplace(const TransformPlan& plan, std::span<Residue> x);
/// x(n) = N^-1 sum_k X(k) alpha^(-nk) mod F. N^-1 is applied as a shift.
void ifnt_inplace(const TransformPlan& plan, std::span<Residue> x);

FermatVector fnt(const TransformPlan& plan, std::span<const Residue> x);
FermatVector ifnt(const TransformPlan& plan, std::span<const Residue> x);

/// Encodes a signed integer sequence; throws RangeError outside (F-1)/2.
FermatVector encode(const FermatRing& ring, std::span<const std::int64_t> v);
std::vector<std::int64_t> decode(const FermatRing& ring, std::span<const Residue> r);

/// ifnt(fnt(x) o fnt(h)). Equals the integer cyclic convolution of the
/// decoded inputs whenever the overflow budget holds.
FermatVector cyclic_convolve_real(const TransformPlan& plan, std::span<const Residue> x,
                                  std::span<const Residue> h);

struct ComplexFermatVector {
  FermatVector re;
  FermatVector im;
};

/// Complex cyclic convolution with two general products per bin, using
/// j = 2^(b/2) (j^2 = -1) to fold each complex operand into one residue:
///   U+- = (X +- j Xh)(Y +- j Yh)
///   re  = -2^(b-1)   * IFNT(U+ + U-)
///   im  = -2^(b/2-1) * IFNT(U+ - U-)
ComplexFermatVector cyclic_convolve_complex(const TransformPlan& plan,
                                            std::span<const Residue> x_re,
                                            std::span<const Residue> x_im,
                                            std::span<const Residue> y_re,
                                            std::span<const Residue> y_im);

/// Real convolution against a fixed kernel whose spectrum is cached.
class RealConvolver {
 public:
  RealConvolver(const TransformPlan& plan, std::span<const Residue> h);

  const TransformPlan& plan() const noexcept { return plan_; }
  void set_kernel(std::span<const Residue> h);
  /// Convolves with a spectrum that is already in the Fermat domain.
  void convolve_spectrum(std::span<const Residue> x_spectrum, std::span<Residue> out) const;
  FermatVector convolve(std::span<const Residue> x) const;

 private:
  TransformPlan plan_;
  FermatVector kernel_spectrum_;
};

/// Complex convolution against a fixed complex kernel; caches Y +- j Yh.
class ComplexConvolver {
 public:
  ComplexConvolver(const TransformPlan& plan, std::span<const Residue> h_re,
                   std::span<const Residue> h_im);

  const TransformPlan& plan() const noexcept { return plan_; }
  /// Writes N outputs to out_re / out_im.
  void convolve(std::span<const Residue> x_re, std::span<const Residue> x_im,
                std::span<Residue> out_re, std::span<Residue> out_im) const;

 private:
  TransformPlan plan_;
  FermatVector kernel_plus_;
  FermatVector kernel_minus_;
  mutable FermatVector scratch_re_, scratch_im_;
};

}  // namespace fntdsp
