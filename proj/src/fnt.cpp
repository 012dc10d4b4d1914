// Copyright 2026 The fntdsp Authors
// SPDX-License-Identifier: Apache-2.0

#include "fntdsp/fnt.hpp"

#include <algorithm>
#include <utility>

#include "fntdsp/errors.hpp"

namespace fntdsp {
namespace {

bool is_power_of_two(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

void check_length(const TransformPlan& plan, std::size_t got, const char* what) {
  if (got != plan.size()) {
    throw std::invalid_argument(std::string(what) + ": length " + std::to_string(got) +
                                " does not match plan length " +
                                std::to_string(plan.size()));
  }
}

// Shared DIT butterfly network. `inverse` walks the twiddles as alpha^-e.
void butterflies(const TransformPlan& plan, std::span<Residue> a, bool inverse) {
  const FermatRing& ring = plan.ring();
  const std::size_t n = plan.size();
  const auto rev = plan.bit_reversal();
  for (std::size_t i = 0; i < n; ++i) {
    if (i < rev[i]) std::swap(a[i], a[rev[i]]);
  }
  const auto n32 = static_cast<std::uint32_t>(n);
  for (unsigned s = 0; s < plan.log2_size(); ++s) {
    const std::size_t half = std::size_t{1} << s;
    const auto exps = plan.stage_exponents(s);
    for (std::size_t base = 0; base < n; base += 2 * half) {
      for (std::size_t j = 0; j < half; ++j) {
        const std::uint32_t e = inverse ? (n32 - exps[j]) % n32 : exps[j];
        const Residue u = a[base + j];
        const Residue v = plan.apply_twiddle(a[base + j + half], e);
        a[base + j] = ring.add(u, v);
        a[base + j + half] = ring.sub(u, v);
      }
    }
  }
}

}  // namespace

TransformPlan TransformPlan::make(FermatParams params, Residue alpha, std::size_t n) {
  if (!is_power_of_two(n)) {
    throw InvalidPlan("transform length " + std::to_string(n) +
                      " is not a power of two >= 2");
  }
  TransformPlan plan(params);
  const FermatRing& ring = plan.ring_;
  if (alpha.value >= params.modulus) {
    throw InvalidPlan("radix " + std::to_string(alpha.value) + " is not a canonical residue");
  }

  const Residue minus_one{params.modulus - 1};
  if (ring.pow(alpha, n) != Residue{1}) {
    throw InvalidPlan("alpha^N != 1 (mod F): alpha=" + std::to_string(alpha.value) +
                      ", N=" + std::to_string(n) + ", F=" + std::to_string(params.modulus) +
                      "; order of alpha is " + std::to_string(ring.order(alpha)));
  }
  if (ring.pow(alpha, n / 2) != minus_one) {
    throw InvalidPlan("alpha^(N/2) != -1 (mod F): alpha=" + std::to_string(alpha.value) +
                      ", N=" + std::to_string(n) + ", F=" + std::to_string(params.modulus) +
                      "; order of alpha is " + std::to_string(ring.order(alpha)));
  }

  // Identify alpha as 2^s or sqrt(2) * 2^s.
  bool found = false;
  const std::int64_t period = 2 * static_cast<std::int64_t>(params.bits);
  for (std::int64_t s = 0; s < period && !found; ++s) {
    if (ring.mul_pow2(Residue{1}, s) == alpha) {
      plan.pow2_shift_ = s;
      found = true;
    } else if (params.bits >= 4 && ring.mul_pow2(ring.sqrt2(), s) == alpha) {
      plan.pow2_shift_ = s;
      plan.sqrt2_radix_ = true;
      found = true;
    }
  }
  if (!found) {
    throw UnsupportedParameter("radix " + std::to_string(alpha.value) +
                               " is neither 2^s nor sqrt(2)*2^s; its twiddles would need "
                               "general multiplications");
  }

  plan.n_ = n;
  while ((std::size_t{1} << plan.log2n_) < n) ++plan.log2n_;
  plan.alpha_ = alpha;
  plan.alpha_inv_ = ring.inverse(alpha);
  plan.n_inv_ = ring.mul_pow2(Residue{1}, -static_cast<std::int64_t>(plan.log2n_));
  if (ring.mul_untallied(plan.n_inv_, Residue{n % params.modulus}) != Residue{1}) {
    throw InvalidPlan("N has no inverse modulo F");
  }

  plan.bitrev_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t r = 0;
    for (unsigned b = 0; b < plan.log2n_; ++b) r |= ((i >> b) & 1u) << (plan.log2n_ - 1 - b);
    plan.bitrev_[i] = r;
  }
  plan.twiddles_.resize(plan.log2n_);
  for (unsigned s = 0; s < plan.log2n_; ++s) {
    const std::size_t half = std::size_t{1} << s;
    const std::size_t step = n / (2 * half);
    auto& t = plan.twiddles_[s];
    t.resize(half);
    for (std::size_t j = 0; j < half; ++j) t[j] = static_cast<std::uint32_t>(j * step);
  }
  plan.id_ = "f" + std::to_string(params.modulus) + "-a" + std::to_string(alpha.value) +
             "-n" + std::to_string(n);
  return plan;
}

TransformPlan TransformPlan::f17_radix2_n8() {
  return make(FermatParams::from_index(2), Residue{2}, 8);
}

TransformPlan TransformPlan::f65537_radix2_n32() {
  return make(FermatParams::from_index(4), Residue{2}, 32);
}

TransformPlan TransformPlan::f65537_sqrt2_n64() {
  const auto p = FermatParams::from_index(4);
  return make(p, FermatRing(p).sqrt2(), 64);
}

std::vector<std::string> TransformPlan::shipped_ids() {
  return {f17_radix2_n8().id(), f65537_radix2_n32().id(), f65537_sqrt2_n64().id()};
}

TransformPlan TransformPlan::by_id(const std::string& id) {
  for (auto plan : {f17_radix2_n8(), f65537_radix2_n32(), f65537_sqrt2_n64()}) {
    if (plan.id() == id) return plan;
  }
  std::string known;
  for (const auto& s : shipped_ids()) known += " " + s;
  throw UnsupportedParameter("unknown plan id '" + id + "'; shipped plans:" + known);
}

TransformPlan TransformPlan::with_twiddle_fault(unsigned stage, std::size_t index) const {
  TransformPlan faulty = *this;
  auto& t = faulty.twiddles_.at(stage);
  t.at(index) = (t.at(index) + 1) % static_cast<std::uint32_t>(n_);
  faulty.id_ += "-faulty";
  return faulty;
}

void fnt_inplace(const TransformPlan& plan, std::span<Residue> x) {
  check_length(plan, x.size(), "fnt");
  butterflies(plan, x, false);
}

void ifnt_inplace(const TransformPlan& plan, std::span<Residue> x) {
  check_length(plan, x.size(), "ifnt");
  butterflies(plan, x, true);
  const auto shift = -static_cast<std::int64_t>(plan.log2_size());
  for (auto& v : x) v = plan.ring().mul_pow2(v, shift);
}

FermatVector fnt(const TransformPlan& plan, std::span<const Residue> x) {
  FermatVector out(x.begin(), x.end());
  fnt_inplace(plan, out);
  return out;
}

FermatVector ifnt(const TransformPlan& plan, std::span<const Residue> x) {
  FermatVector out(x.begin(), x.end());
  ifnt_inplace(plan, out);
  return out;
}

FermatVector encode(const FermatRing& ring, std::span<const std::int64_t> v) {
  FermatVector out;
  out.reserve(v.size());
  for (auto x : v) out.push_back(ring.encode_signed(x));
  return out;
}

std::vector<std::int64_t> decode(const FermatRing& ring, std::span<const Residue> r) {
  std::vector<std::int64_t> out;
  out.reserve(r.size());
  for (auto x : r) out.push_back(ring.decode_signed(x));
  return out;
}

FermatVector cyclic_convolve_real(const TransformPlan& plan, std::span<const Residue> x,
                                  std::span<const Residue> h) {
  return RealConvolver(plan, h).convolve(x);
}

ComplexFermatVector cyclic_convolve_complex(const TransformPlan& plan,
                                            std::span<const Residue> x_re,
                                            std::span<const Residue> x_im,
                                            std::span<const Residue> y_re,
                                            std::span<const Residue> y_im) {
  ComplexConvolver conv(plan, y_re, y_im);
  ComplexFermatVector out{FermatVector(plan.size()), FermatVector(plan.size())};
  conv.convolve(x_re, x_im, out.re, out.im);
  return out;
}

RealConvolver::RealConvolver(const TransformPlan& plan, std::span<const Residue> h)
    : plan_(plan) {
  set_kernel(h);
}

void RealConvolver::set_kernel(std::span<const Residue> h) {
  check_length(plan_, h.size(), "convolution kernel");
  kernel_spectrum_ = fnt(plan_, h);
}

void RealConvolver::convolve_spectrum(std::span<const Residue> x_spectrum,
                                      std::span<Residue> out) const {
  check_length(plan_, x_spectrum.size(), "convolution input spectrum");
  check_length(plan_, out.size(), "convolution output");
  const FermatRing& ring = plan_.ring();
  for (std::size_t k = 0; k < plan_.size(); ++k) {
    out[k] = ring.mul(x_spectrum[k], kernel_spectrum_[k]);
  }
  ifnt_inplace(plan_, out);
}

FermatVector RealConvolver::convolve(std::span<const Residue> x) const {
  const FermatVector spectrum = fnt(plan_, x);
  FermatVector out(plan_.size());
  convolve_spectrum(spectrum, out);
  return out;
}

ComplexConvolver::ComplexConvolver(const TransformPlan& plan, std::span<const Residue> h_re,
                                   std::span<const Residue> h_im)
    : plan_(plan), scratch_re_(plan.size()), scratch_im_(plan.size()) {
  if (plan.params().bits < 2) {
    throw UnsupportedParameter("complex convolution needs b >= 2 so that 2^(b/2) is an "
                               "imaginary unit; got " + to_string(plan.params()));
  }
  check_length(plan_, h_re.size(), "complex kernel (re)");
  check_length(plan_, h_im.size(), "complex kernel (im)");
  const FermatRing& ring = plan_.ring();
  const FermatVector y = fnt(plan_, h_re);
  const FermatVector y_hat = fnt(plan_, h_im);
  const std::int64_t j_shift = plan_.params().bits / 2;
  kernel_plus_.resize(plan_.size());
  kernel_minus_.resize(plan_.size());
  for (std::size_t k = 0; k < plan_.size(); ++k) {
    const Residue jy = ring.mul_pow2(y_hat[k], j_shift);
    kernel_plus_[k] = ring.add(y[k], jy);
    kernel_minus_[k] = ring.sub(y[k], jy);
  }
}

void ComplexConvolver::convolve(std::span<const Residue> x_re, std::span<const Residue> x_im,
                                std::span<Residue> out_re, std::span<Residue> out_im) const {
  check_length(plan_, x_re.size(), "complex input (re)");
  check_length(plan_, x_im.size(), "complex input (im)");
  check_length(plan_, out_re.size(), "complex output (re)");
  check_length(plan_, out_im.size(), "complex output (im)");
  const FermatRing& ring = plan_.ring();
  const unsigned b = plan_.params().bits;
  const std::int64_t j_shift = b / 2;

  std::copy(x_re.begin(), x_re.end(), scratch_re_.begin());
  std::copy(x_im.begin(), x_im.end(), scratch_im_.begin());
  fnt_inplace(plan_, scratch_re_);
  fnt_inplace(plan_, scratch_im_);

  for (std::size_t k = 0; k < plan_.size(); ++k) {
    const Residue jx = ring.mul_pow2(scratch_im_[k], j_shift);
    const Residue u_plus = ring.mul(ring.add(scratch_re_[k], jx), kernel_plus_[k]);
    const Residue u_minus = ring.mul(ring.sub(scratch_re_[k], jx), kernel_minus_[k]);
    out_re[k] = ring.add(u_plus, u_minus);
    out_im[k] = ring.sub(u_plus, u_minus);
  }
  ifnt_inplace(plan_, out_re);
  ifnt_inplace(plan_, out_im);
  for (std::size_t n = 0; n < plan_.size(); ++n) {
    out_re[n] = ring.neg(ring.mul_pow2(out_re[n], static_cast<std::int64_t>(b) - 1));
    out_im[n] = ring.neg(ring.mul_pow2(out_im[n], j_shift - 1));
  }
}

}  // namespace fntdsp
