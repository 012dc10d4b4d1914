// Copyright 2026 The fntdsp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace fntdsp {

using cplx = std::complex<double>;

/// Iterative radix-2 complex FFT. Each butterfly's twiddle product is
/// tallied as one complex multiplication (4 real), trivial twiddles
/// included, so a length-N transform costs 2 N log2 N real multiplications.
class Fft {
 public:
  explicit Fft(std::size_t n);

  std::size_t size() const noexcept { return n_; }

  /// X(k) = sum x(n) exp(-2 pi i nk / N).
  void forward(std::span<cplx> x) const;
  /// Unscaled inverse: sum X(k) exp(+2 pi i nk / N).
  void inverse(std::span<cplx> x) const;
  /// Inverse including the 1/N factor (the scaling is not tallied).
  void inverse_scaled(std::span<cplx> x) const;

 private:
  void run(std::span<cplx> x, bool inverse) const;

  std::size_t n_;
  unsigned log2n_ = 0;
  std::vector<std::size_t> bitrev_;
  std::vector<cplx> roots_;  // exp(-2 pi i k / N), k < N/2
};

/// Frequency in Hz of FFT bin k for a length-n transform at sample rate fs,
/// mapped to [-fs/2, fs/2).
double bin_frequency(std::size_t k, std::size_t n, double fs) noexcept;

}  // namespace fntdsp
