// Copyright 2026 The fntdsp Authors
// SPDX-License-Identifier: Apache-2.0

#include "fntdsp/fixedpoint.hpp"

#include <gtest/gtest.h>

#include <random>

#include "fntdsp/errors.hpp"
#include "fntdsp/fnt.hpp"
#include "oracles.hpp"

namespace fntdsp {
namespace {

const FermatParams kF4 = FermatParams::from_index(4);

TEST(Quantize, Basics) {
  const QuantSpec s5 = QuantSpec::make(5, 15.0);
  EXPECT_EQ(s5.max_level(), 15);
  EXPECT_EQ(quantize_value(0.0, s5), 0);
  EXPECT_EQ(quantize_value(1.0, s5), 15);
  EXPECT_EQ(quantize_value(-1.0, s5), -15);
  bool clipped = false;
  EXPECT_EQ(quantize_value(1.2, s5, &clipped), 15);
  EXPECT_TRUE(clipped);
  EXPECT_EQ(quantize_value(-7.0, s5, &clipped), -15);
  EXPECT_TRUE(clipped);
  // ties go away from zero
  const QuantSpec unit = QuantSpec::make(8, 1.0);
  EXPECT_EQ(quantize_value(2.5, unit), 3);
  EXPECT_EQ(quantize_value(-2.5, unit), -3);
  EXPECT_THROW(QuantSpec::make(1, 1.0), std::invalid_argument);
  EXPECT_THROW(QuantSpec::make(5, 0.0), std::invalid_argument);
}

TEST(Quantize, BlockReportsClipsAndStaysInRange) {
  const QuantSpec s = QuantSpec::make(5, 10.0);
  const std::vector<std::complex<double>> v{{0.1, -0.2}, {2.0, 0.0}, {0.0, -3.0}};
  const QuantizedBlock q = quantize(v, s);
  EXPECT_EQ(q.re, (std::vector<std::int32_t>{1, 15, 0}));
  EXPECT_EQ(q.im, (std::vector<std::int32_t>{-2, 0, -15}));
  EXPECT_EQ(q.clip_count, 2u);
}

TEST(Quantize, GaussianAtThreeSigmaClipsRarely) {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(100000);
  for (auto& x : v) x = g(rng);
  const QuantSpec s = QuantSpec::make(5, 15.0 / 3.0);
  const QuantizedReal q = quantize(v, s);
  EXPECT_LT(static_cast<double>(q.clip_count) / v.size(), 0.01);
  for (auto x : q.values) ASSERT_LE(std::abs(x), 15);
}

TEST(Quantize, Monotone) {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  const QuantSpec s = QuantSpec::make(5, 7.3);
  for (int i = 0; i < 10000; ++i) {
    double a = u(rng), b = u(rng);
    if (a > b) std::swap(a, b);
    ASSERT_LE(quantize_value(a, s), quantize_value(b, s));
  }
}

TEST(Budget, ShippedConfigurations) {
  const QuantSpec sig = QuantSpec::make(5, 1.0);
  const std::vector<std::int64_t> cdc(32, 31);
  const BudgetReport c = check_overflow(cdc, sig, kF4, ConvKind::kComplex);
  EXPECT_EQ(c.bound, 29760);
  EXPECT_EQ(c.limit, 32768);
  EXPECT_EQ(c.margin(), 3008);
  EXPECT_TRUE(c.pass);
  EXPECT_EQ(c.describe(), "complex: 2*15*992 = 29760 <= 32768 (margin 3008) pass");

  const std::vector<std::int64_t> aeq(16, 127);
  const BudgetReport a = check_overflow(aeq, sig, kF4, ConvKind::kReal);
  EXPECT_EQ(a.bound, 30480);
  EXPECT_TRUE(a.pass);

  const std::vector<std::int64_t> big_taps(64, 127);
  const BudgetReport b = check_overflow(big_taps, sig, kF4, ConvKind::kReal);
  EXPECT_EQ(b.bound, 121920);
  EXPECT_FALSE(b.pass);
  EXPECT_LT(b.margin(), 0);
}

TEST(Budget, SignsDoNotMatter) {
  const QuantSpec sig = QuantSpec::make(5, 1.0);
  const std::vector<std::int64_t> pos{3, 4, 0, 5}, mixed{-3, 4, 0, -5};
  EXPECT_EQ(check_overflow(pos, sig, kF4, ConvKind::kReal).bound,
            check_overflow(mixed, sig, kF4, ConvKind::kReal).bound);
}

TEST(Budget, PassingConfigIsExactUnderWorstCase) {
  // all signal samples at +-15, all 16 taps at +-127 in a 32-point real FNT
  const auto plan = TransformPlan::f65537_radix2_n32();
  const FermatRing& ring = plan.ring();
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 200; ++trial) {
    auto x = testing::extreme_ints(rng, 32, 15);
    auto h = testing::extreme_ints(rng, 16, 127);
    h.resize(32, 0);
    const auto got = decode(ring, cyclic_convolve_real(plan, encode(ring, x), encode(ring, h)));
    const auto ref = testing::cyclic_conv(x, h);
    for (std::size_t i = 0; i < 32; ++i) ASSERT_EQ(testing::big(got[i]), ref[i]);
  }
  // aligned signs reach the bound itself
  std::vector<std::int64_t> x(32, 15), h(32, 0);
  std::fill(h.begin(), h.begin() + 16, 127);
  const auto got = decode(ring, cyclic_convolve_real(plan, encode(ring, x), encode(ring, h)));
  EXPECT_EQ(got[0], 30480);
}

TEST(SplitTaps, Examples) {
  const std::vector<std::int32_t> w{0, -129, 16383, -16383, 127, 128};
  const SplitTaps s = split_taps(w);
  EXPECT_EQ(s.high, (std::vector<std::int32_t>{0, -1, 127, -127, 0, 1}));
  EXPECT_EQ(s.low, (std::vector<std::int32_t>{0, -1, 127, -127, 127, 0}));
  EXPECT_EQ(recombine(-1, -1), -129);
  const std::vector<std::int32_t> too_big{16384};
  EXPECT_THROW(split_taps(too_big), RangeError);
}

TEST(SplitTaps, RecombinesEveryValue) {
  std::vector<std::int32_t> all;
  for (std::int32_t v = -16383; v <= 16383; ++v) all.push_back(v);
  const SplitTaps s = split_taps(all);
  for (std::size_t i = 0; i < all.size(); ++i) {
    ASSERT_LE(std::abs(s.high[i]), 127);
    ASSERT_LE(std::abs(s.low[i]), 127);
    ASSERT_EQ(recombine(s.high[i], s.low[i]), all[i]);
  }
}

TEST(SplitTaps, GroupConvolutionsRecombineExactly) {
  const auto plan = TransformPlan::f65537_radix2_n32();
  const FermatRing& ring = plan.ring();
  std::mt19937_64 rng(34);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto x = testing::random_ints(rng, 32, 15);
    const auto w64 = testing::random_ints(rng, 16, 16383);
    std::vector<std::int32_t> w(w64.begin(), w64.end());
    const SplitTaps s = split_taps(w);
    std::vector<std::int64_t> hi(32, 0), lo(32, 0), full(32, 0);
    for (std::size_t k = 0; k < 16; ++k) {
      hi[k] = s.high[k];
      lo[k] = s.low[k];
      full[k] = w[k];
    }
    const auto ch = decode(ring, cyclic_convolve_real(plan, encode(ring, x), encode(ring, hi)));
    const auto cl = decode(ring, cyclic_convolve_real(plan, encode(ring, x), encode(ring, lo)));
    const auto got = recombine(ch, cl);
    const auto ref = testing::cyclic_conv(x, full);
    for (std::size_t i = 0; i < 32; ++i) ASSERT_EQ(testing::big(got[i]), ref[i]);
  }
}

}  // namespace
}  // namespace fntdsp
