// Copyright 2026 The fntdsp Authors
// SPDX-License-Identifier: Apache-2.0

#include "fntdsp/fft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

#include "fntdsp/op_counter.hpp"

namespace fntdsp {

Fft::Fft(std::size_t n) : n_(n) {
  if (n < 2 || (n & (n - 1)) != 0) {
    throw std::invalid_argument("FFT length must be a power of two >= 2, got " +
                                std::to_string(n));
  }
  while ((std::size_t{1} << log2n_) < n) ++log2n_;
  bitrev_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = 0;
    for (unsigned b = 0; b < log2n_; ++b) r |= ((i >> b) & 1u) << (log2n_ - 1 - b);
    bitrev_[i] = r;
  }
  roots_.resize(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k) {
    const double a = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    roots_[k] = {std::cos(a), std::sin(a)};
  }
}

void Fft::forward(std::span<cplx> x) const { run(x, false); }

void Fft::inverse(std::span<cplx> x) const { run(x, true); }

void Fft::inverse_scaled(std::span<cplx> x) const {
  run(x, true);
  const double s = 1.0 / static_cast<double>(n_);
  for (auto& v : x) v *= s;
}

void Fft::run(std::span<cplx> x, bool inverse) const {
  if (x.size() != n_) {
    throw std::invalid_argument("FFT input length " + std::to_string(x.size()) +
                                " != " + std::to_string(n_));
  }
  for (std::size_t i = 0; i < n_; ++i) {
    if (i < bitrev_[i]) std::swap(x[i], x[bitrev_[i]]);
  }
  for (std::size_t half = 1; half < n_; half <<= 1) {
    const std::size_t stride = n_ / (2 * half);
    for (std::size_t base = 0; base < n_; base += 2 * half) {
      for (std::size_t j = 0; j < half; ++j) {
        cplx w = roots_[j * stride];
        if (inverse) w = std::conj(w);
        const cplx u = x[base + j];
        const cplx v = x[base + j + half] * w;
        x[base + j] = u + v;
        x[base + j + half] = u - v;
      }
    }
  }
  complexity::tally(4 * (n_ / 2) * log2n_);
}

double bin_frequency(std::size_t k, std::size_t n, double fs) noexcept {
  const auto sk = static_cast<double>(k);
  const auto sn = static_cast<double>(n);
  return (k < n / 2 ? sk : sk - sn) * fs / sn;
}

}  // namespace fntdsp
