// Copyright 2026 The fntdsp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

namespace fntdsp::complexity {

namespace detail {
inline thread_local std::uint64_t real_mults = 0;
}  // namespace detail

// Each thread accumulates its own count; callers that fan work out to
// several threads sum the per-run tallies they collect.
inline void tally(std::uint64_t n = 1) noexcept { detail::real_mults += n; }

inline std::uint64_t tally_total() noexcept { return detail::real_mults; }

/// Counts real multiplications issued on this thread while alive.
class ScopedTally {
 public:
  ScopedTally() noexcept : start_(detail::real_mults) {}
  std::uint64_t count() const noexcept { return detail::real_mults - start_; }

 private:
  std::uint64_t start_;
};

/// Work done inside this scope (tap spectra, plan tables) is not tallied.
class SetupScope {
 public:
  SetupScope() noexcept : saved_(detail::real_mults) {}
  ~SetupScope() { detail::real_mults = saved_; }
  SetupScope(const SetupScope&) = delete;
  SetupScope& operator=(const SetupScope&) = delete;

 private:
  std::uint64_t saved_;
};

}  // namespace fntdsp::complexity
