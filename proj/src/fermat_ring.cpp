// Copyright 2026 The fntdsp Authors
// SPDX-License-Identifier: Apache-2.0

#include "fntdsp/fermat_ring.hpp"

#include <cstdlib>

#include "fntdsp/errors.hpp"

namespace fntdsp {

FermatParams FermatParams::from_index(unsigned t) {
  if (t > 4) {
    throw UnsupportedParameter("Fermat index t=" + std::to_string(t) +
                               " is not prime; supported t are 0..4");
  }
  FermatParams p;
  p.t = t;
  p.bits = 1u << t;
  p.modulus = (std::uint64_t{1} << p.bits) + 1;
  return p;
}

FermatParams FermatParams::from_modulus(std::uint64_t modulus) {
  for (unsigned t = 0; t <= 4; ++t) {
    FermatParams p = from_index(t);
    if (p.modulus == modulus) return p;
  }
  throw UnsupportedParameter("modulus " + std::to_string(modulus) +
                             " is not one of the Fermat primes 3, 5, 17, 257, 65537");
}

Residue FermatRing::encode_signed(std::int64_t v) const {
  const auto limit = static_cast<std::int64_t>(params_.signed_limit());
  if (v > limit || v < -limit) {
    throw RangeError("value " + std::to_string(v) + " outside signed residue range [-" +
                     std::to_string(limit) + ", " + std::to_string(limit) + "]");
  }
  return Residue{v >= 0 ? static_cast<std::uint64_t>(v)
                        : params_.modulus - static_cast<std::uint64_t>(-v)};
}

Residue FermatRing::pow(Residue a, std::uint64_t e) const noexcept {
  Residue result{1 % params_.modulus};
  while (e != 0) {
    if (e & 1) result = mul_untallied(result, a);
    a = mul_untallied(a, a);
    e >>= 1;
  }
  return result;
}

Residue FermatRing::sqrt2() const {
  if (params_.bits < 4) {
    throw UnsupportedParameter("sqrt(2) as a shift-add constant needs b >= 4, got b=" +
                               std::to_string(params_.bits));
  }
  const Residue root = mul_sqrt2(Residue{1});
  // Postcondition: root^2 == 2.
  if (mul_untallied(root, root).value != 2) std::abort();
  return root;
}

std::uint64_t FermatRing::order(Residue a) const noexcept {
  // The group has order 2^b, so the order of a is a power of two.
  std::uint64_t n = 1;
  Residue x = a;
  while (x.value != 1) {
    x = mul_untallied(x, x);
    n <<= 1;
    if (n > params_.modulus) return 0;  // a == 0
  }
  return n;
}

std::string to_string(const FermatParams& p) {
  return "F_" + std::to_string(p.t) + "=" + std::to_string(p.modulus);
}

}  // namespace fntdsp
