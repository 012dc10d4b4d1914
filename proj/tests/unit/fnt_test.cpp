// Copyright 2026 The fntdsp Authors
// SPDX-License-Identifier: Apache-2.0

#include "fntdsp/fnt.hpp"

#include <gtest/gtest.h>

#include <random>

#include "fntdsp/errors.hpp"
#include "oracles.hpp"

namespace fntdsp {
namespace {

using testing::big;
using testing::big_mod;

std::vector<std::uint64_t> values(const FermatVector& v) {
  std::vector<std::uint64_t> out;
  for (Residue r : v) out.push_back(r.value);
  return out;
}

FermatVector residues(const std::vector<std::uint64_t>& v) {
  FermatVector out;
  for (auto x : v) out.push_back(Residue{x});
  return out;
}

FermatVector random_vector(std::mt19937_64& rng, const TransformPlan& plan) {
  std::uniform_int_distribution<std::uint64_t> d(0, plan.params().modulus - 1);
  FermatVector v(plan.size());
  for (auto& r : v) r.value = d(rng);
  return v;
}

std::vector<TransformPlan> all_plans() {
  std::vector<TransformPlan> plans;
  for (const auto& id : TransformPlan::shipped_ids()) plans.push_back(TransformPlan::by_id(id));
  // extra plans exercising other moduli and the sqrt(2) radix at small b
  plans.push_back(TransformPlan::make(FermatParams::from_index(3), Residue{2}, 16));
  plans.push_back(TransformPlan::make(FermatParams::from_index(3), Residue{60}, 32));
  plans.push_back(TransformPlan::make(FermatParams::from_index(2), Residue{6}, 16));
  plans.push_back(TransformPlan::make(FermatParams::from_index(4), Residue{4}, 16));
  return plans;
}

TEST(TransformPlan, ShippedPlans) {
  const auto ids = TransformPlan::shipped_ids();
  ASSERT_EQ(ids.size(), 3u);
  const auto p8 = TransformPlan::f17_radix2_n8();
  EXPECT_EQ(p8.params().modulus, 17u);
  EXPECT_EQ(p8.size(), 8u);
  EXPECT_EQ(p8.alpha().value, 2u);
  const auto p32 = TransformPlan::f65537_radix2_n32();
  EXPECT_EQ(p32.size(), 32u);
  const auto p64 = TransformPlan::f65537_sqrt2_n64();
  EXPECT_EQ(p64.alpha().value, 4080u);
  EXPECT_EQ(p64.size(), 64u);
  EXPECT_EQ(p64.n_inv().value, 64513u);
  for (const auto& id : ids) EXPECT_EQ(TransformPlan::by_id(id).id(), id);
  EXPECT_THROW(TransformPlan::by_id("nope"), UnsupportedParameter);
}

TEST(TransformPlan, InvariantsHold) {
  for (const auto& plan : all_plans()) {
    const std::uint64_t f = plan.params().modulus;
    const std::uint64_t a = plan.alpha().value;
    EXPECT_EQ(testing::big_pow_mod(a, plan.size(), f), 1u) << plan.id();
    EXPECT_EQ(testing::big_pow_mod(a, plan.size() / 2, f), f - 1) << plan.id();
    EXPECT_EQ(big_mod(big(plan.size()) * plan.n_inv().value, f), 1u);
    EXPECT_EQ(big_mod(big(a) * plan.alpha_inv().value, f), 1u);
    for (std::size_t k = 1; k < plan.size(); ++k) {
      ASSERT_NE(testing::big_pow_mod(a, k, f), 1u);
    }
    // bit reversal is an involutive permutation
    const auto br = plan.bit_reversal();
    for (std::size_t i = 0; i < br.size(); ++i) ASSERT_EQ(br[br[i]], i);
  }
}

TEST(TransformPlan, RejectsWrongOrder) {
  try {
    TransformPlan::make(FermatParams::from_index(4), Residue{2}, 64);
    FAIL() << "expected InvalidPlan";
  } catch (const InvalidPlan& e) {
    EXPECT_NE(std::string(e.what()).find("order of alpha is 32"), std::string::npos) << e.what();
  }
  EXPECT_THROW(TransformPlan::make(FermatParams::from_index(4), Residue{2}, 16), InvalidPlan);
  EXPECT_THROW(TransformPlan::make(FermatParams::from_index(4), Residue{2}, 24), InvalidPlan);
  EXPECT_THROW(TransformPlan::make(FermatParams::from_index(2), Residue{2}, 16), InvalidPlan);
}

TEST(TransformPlan, ApplyTwiddleMatchesPower) {
  for (const auto& plan : all_plans()) {
    const FermatRing& ring = plan.ring();
    for (std::uint32_t e = 0; e < 2 * plan.size(); ++e) {
      const Residue x{plan.params().modulus / 3};
      const std::uint64_t expect = big_mod(
          big(x.value) * testing::big_pow_mod(plan.alpha().value, e, ring.modulus()),
          ring.modulus());
      ASSERT_EQ(plan.apply_twiddle(x, e).value, expect) << plan.id() << " e=" << e;
    }
  }
}

TEST(Fnt, GoldenMod17) {
  const auto plan = TransformPlan::f17_radix2_n8();
  EXPECT_EQ(values(fnt(plan, residues({1, 0, 0, 0, 0, 0, 0, 0}))),
            (std::vector<std::uint64_t>{1, 1, 1, 1, 1, 1, 1, 1}));
  EXPECT_EQ(values(fnt(plan, residues({1, 1, 0, 0, 0, 0, 0, 0}))),
            (std::vector<std::uint64_t>{2, 3, 5, 9, 0, 16, 14, 10}));
  EXPECT_EQ(values(ifnt(plan, residues({2, 3, 5, 9, 0, 16, 14, 10}))),
            (std::vector<std::uint64_t>{1, 1, 0, 0, 0, 0, 0, 0}));
}

TEST(Fnt, AllOnesAndDc) {
  for (const auto& plan : all_plans()) {
    const std::size_t n = plan.size();
    const FermatVector ones(n, Residue{1});
    FermatVector dc(n);
    dc[0] = Residue{n % plan.params().modulus};
    EXPECT_EQ(fnt(plan, ones), dc) << plan.id();
    EXPECT_EQ(ifnt(plan, dc), ones) << plan.id();
  }
}

TEST(Fnt, MatchesDirectEvaluation) {
  std::mt19937_64 rng(21);
  for (const auto& plan : all_plans()) {
    for (int trial = 0; trial < 100; ++trial) {
      const FermatVector x = random_vector(rng, plan);
      const auto direct =
          testing::naive_transform(values(x), plan.alpha().value, plan.params().modulus);
      ASSERT_EQ(values(fnt(plan, x)), direct) << plan.id();
    }
  }
}

TEST(Fnt, InverseMatchesDirectEvaluation) {
  std::mt19937_64 rng(22);
  for (const auto& plan : all_plans()) {
    const std::uint64_t f = plan.params().modulus;
    for (int trial = 0; trial < 20; ++trial) {
      const FermatVector x = random_vector(rng, plan);
      auto direct = testing::naive_transform(values(x), plan.alpha_inv().value, f);
      for (auto& v : direct) v = big_mod(big(v) * plan.n_inv().value, f);
      ASSERT_EQ(values(ifnt(plan, x)), direct) << plan.id();
    }
  }
}

TEST(Fnt, RoundTrip) {
  std::mt19937_64 rng(23);
  for (const auto& plan : all_plans()) {
    for (int trial = 0; trial < 1000; ++trial) {
      const FermatVector x = random_vector(rng, plan);
      ASSERT_EQ(ifnt(plan, fnt(plan, x)), x) << plan.id();
    }
  }
}

TEST(Fnt, Linearity) {
  std::mt19937_64 rng(24);
  for (const auto& plan : all_plans()) {
    const FermatRing& ring = plan.ring();
    for (int trial = 0; trial < 50; ++trial) {
      const FermatVector x = random_vector(rng, plan), y = random_vector(rng, plan);
      const FermatVector ab = random_vector(rng, plan);
      const Residue a = ab[0], b = ab[1];
      FermatVector mix(plan.size());
      for (std::size_t i = 0; i < mix.size(); ++i) {
        mix[i] = ring.add(ring.mul_untallied(a, x[i]), ring.mul_untallied(b, y[i]));
      }
      const FermatVector fx = fnt(plan, x), fy = fnt(plan, y), fm = fnt(plan, mix);
      for (std::size_t k = 0; k < mix.size(); ++k) {
        ASSERT_EQ(fm[k], ring.add(ring.mul_untallied(a, fx[k]), ring.mul_untallied(b, fy[k])));
      }
    }
  }
}

TEST(Fnt, ButterfliesUseNoGeneralMultiplications) {
  std::mt19937_64 rng(25);
  for (const auto& plan : all_plans()) {
    FermatVector x = random_vector(rng, plan);
    complexity::ScopedTally tally;
    fnt_inplace(plan, x);
    ifnt_inplace(plan, x);
    EXPECT_EQ(tally.count(), 0u) << plan.id();
  }
}

TEST(Fnt, LengthMismatchThrows) {
  const auto plan = TransformPlan::f17_radix2_n8();
  FermatVector x(7);
  EXPECT_THROW(fnt_inplace(plan, x), std::invalid_argument);
  EXPECT_THROW(ifnt(plan, x), std::invalid_argument);
}

TEST(Fnt, TwiddleFaultBreaksTransform) {
  std::mt19937_64 rng(26);
  const auto plan = TransformPlan::f65537_sqrt2_n64();
  const auto bad = plan.with_twiddle_fault(plan.log2_size() - 1, 1);
  const FermatVector x = random_vector(rng, plan);
  EXPECT_NE(fnt(bad, x), fnt(plan, x));
}

TEST(Convolution, GoldenMod17) {
  const auto plan = TransformPlan::f17_radix2_n8();
  const FermatRing& ring = plan.ring();
  const std::vector<std::int64_t> x{1, 2, 0, 0, 0, 0, 0, 0}, h{3, 1, 0, 0, 0, 0, 0, 0};
  const auto y = decode(ring, cyclic_convolve_real(plan, encode(ring, x), encode(ring, h)));
  EXPECT_EQ(y, (std::vector<std::int64_t>{3, 7, 2, 0, 0, 0, 0, 0}));
}

TEST(Convolution, ImpulseIdentity) {
  std::mt19937_64 rng(27);
  for (const auto& plan : all_plans()) {
    const FermatRing& ring = plan.ring();
    FermatVector delta(plan.size());
    delta[0] = Residue{1};
    const FermatVector h = random_vector(rng, plan);
    EXPECT_EQ(cyclic_convolve_real(plan, delta, h), h);
  }
  const auto plan = TransformPlan::f65537_sqrt2_n64();
  const FermatRing& ring = plan.ring();
  FermatVector zero(64), one(64), j(64);
  one[0] = Residue{1};
  j[0] = Residue{1};
  const auto yr = testing::random_ints(rng, 64, 100), yi = testing::random_ints(rng, 64, 100);
  const auto z = cyclic_convolve_complex(plan, one, zero, encode(ring, yr), encode(ring, yi));
  EXPECT_EQ(decode(ring, z.re), yr);
  EXPECT_EQ(decode(ring, z.im), yi);
  // i * i = -1
  const auto zz = cyclic_convolve_complex(plan, zero, j, zero, j);
  std::vector<std::int64_t> minus_delta(64, 0);
  minus_delta[0] = -1;
  EXPECT_EQ(decode(ring, zz.re), minus_delta);
  EXPECT_EQ(decode(ring, zz.im), std::vector<std::int64_t>(64, 0));
}

// Magnitude bound so that sum |x||h| stays within the signed residue range.
std::int64_t budget_lim(const TransformPlan& plan, int factor) {
  const double lim = static_cast<double>(plan.params().signed_limit()) /
                     (factor * static_cast<double>(plan.size()));
  return static_cast<std::int64_t>(std::floor(std::sqrt(lim)));
}

TEST(Convolution, RealMatchesOracleAndCommutes) {
  std::mt19937_64 rng(28);
  for (const auto& plan : all_plans()) {
    const FermatRing& ring = plan.ring();
    const std::int64_t lim = budget_lim(plan, 1);
    if (lim < 1) continue;
    for (int trial = 0; trial < 200; ++trial) {
      const auto x = trial % 4 == 0 ? testing::extreme_ints(rng, plan.size(), lim)
                                    : testing::random_ints(rng, plan.size(), lim);
      const auto h = trial % 4 == 0 ? testing::extreme_ints(rng, plan.size(), lim)
                                    : testing::random_ints(rng, plan.size(), lim);
      const auto got = decode(ring, cyclic_convolve_real(plan, encode(ring, x), encode(ring, h)));
      const auto ref = testing::cyclic_conv(x, h);
      for (std::size_t i = 0; i < ref.size(); ++i) ASSERT_EQ(big(got[i]), ref[i]) << plan.id();
      ASSERT_EQ(cyclic_convolve_real(plan, encode(ring, h), encode(ring, x)),
                cyclic_convolve_real(plan, encode(ring, x), encode(ring, h)));
    }
  }
}

TEST(Convolution, ComplexMatchesOracleAndCrossTerms) {
  std::mt19937_64 rng(29);
  for (const auto& plan : all_plans()) {
    const FermatRing& ring = plan.ring();
    const std::int64_t lim = budget_lim(plan, 2);
    if (lim < 1) continue;
    for (int trial = 0; trial < 100; ++trial) {
      const auto xr = testing::random_ints(rng, plan.size(), lim);
      const auto xi = testing::random_ints(rng, plan.size(), lim);
      const auto hr = testing::random_ints(rng, plan.size(), lim);
      const auto hi = testing::random_ints(rng, plan.size(), lim);
      const auto z = cyclic_convolve_complex(plan, encode(ring, xr), encode(ring, xi),
                                             encode(ring, hr), encode(ring, hi));
      const auto ref = testing::cyclic_conv_complex(xr, xi, hr, hi);
      const auto zr = decode(ring, z.re), zi = decode(ring, z.im);
      for (std::size_t i = 0; i < zr.size(); ++i) {
        ASSERT_EQ(big(zr[i]), ref.re[i]) << plan.id();
        ASSERT_EQ(big(zi[i]), ref.im[i]) << plan.id();
      }
      // four real convolutions of the cross terms
      auto rc = [&](const auto& a, const auto& b) {
        return decode(ring, cyclic_convolve_real(plan, encode(ring, a), encode(ring, b)));
      };
      const auto rr = rc(xr, hr), ii = rc(xi, hi), ri = rc(xr, hi), ir = rc(xi, hr);
      for (std::size_t i = 0; i < zr.size(); ++i) {
        ASSERT_EQ(zr[i], rr[i] - ii[i]);
        ASSERT_EQ(zi[i], ri[i] + ir[i]);
      }
    }
  }
}

TEST(Convolution, ComplexCostsTwoMultiplicationsPerBin) {
  const auto plan = TransformPlan::f65537_sqrt2_n64();
  const FermatRing& ring = plan.ring();
  std::mt19937_64 rng(30);
  const auto h = testing::random_ints(rng, 64, 3);
  const ComplexConvolver conv(plan, encode(ring, h), encode(ring, h));
  const auto x = encode(ring, testing::random_ints(rng, 64, 3));
  FermatVector out_re(64), out_im(64);
  complexity::ScopedTally tally;
  conv.convolve(x, x, out_re, out_im);
  EXPECT_EQ(tally.count(), 128u);
}

TEST(Convolution, ComplexNeedsEvenBits) {
  const auto plan = TransformPlan::make(FermatParams::from_index(0), Residue{2}, 2);
  FermatVector v(2);
  EXPECT_THROW(cyclic_convolve_complex(plan, v, v, v, v), UnsupportedParameter);
}

}  // namespace
}  // namespace fntdsp
