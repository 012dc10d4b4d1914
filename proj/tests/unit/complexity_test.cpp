// Copyright 2026 The fntdsp Authors
// SPDX-License-Identifier: Apache-2.0

#include "fntdsp/complexity.hpp"

#include <gtest/gtest.h>

#include <sstream>

#include "fntdsp/errors.hpp"

namespace fntdsp::complexity {
namespace {

const SchemeCost& cost(const std::vector<SchemeCost>& v, SchemeId s) {
  for (const auto& c : v)
    if (c.scheme == s) return c;
  throw std::logic_error("missing scheme");
}

TEST(Formula, TableValuesAtComparedLengths) {
  EXPECT_DOUBLE_EQ(formula_mults(SchemeId::kFntCdc, 64), 8);
  EXPECT_DOUBLE_EQ(formula_mults(SchemeId::kFdCdc, 64), 84);
  EXPECT_DOUBLE_EQ(formula_mults(SchemeId::kTdCdc, 32), 192);
  EXPECT_DOUBLE_EQ(formula_mults(SchemeId::kFntAeq, 32), 64);
  EXPECT_DOUBLE_EQ(formula_mults(SchemeId::kFdAeq, 32), 152);
  EXPECT_DOUBLE_EQ(formula_mults(SchemeId::kTdAeq, 16), 256);
}

TEST(Formula, GrowthWithLength) {
  for (std::size_t n = 2; n <= 1024; n *= 2) {
    EXPECT_DOUBLE_EQ(formula_mults(SchemeId::kFdCdc, 2 * n) - formula_mults(SchemeId::kFdCdc, n),
                     12);
    EXPECT_DOUBLE_EQ(formula_mults(SchemeId::kFdAeq, 2 * n) - formula_mults(SchemeId::kFdAeq, n),
                     24);
    EXPECT_DOUBLE_EQ(formula_mults(SchemeId::kTdCdc, n), 6.0 * static_cast<double>(n));
    EXPECT_DOUBLE_EQ(formula_mults(SchemeId::kFntCdc, n), 8);
  }
  EXPECT_THROW(formula_mults(SchemeId::kFdCdc, 48), ConfigError);
  EXPECT_THROW(formula_mults(SchemeId::kTdAeq, 0), ConfigError);
}

TEST(SchemeNames, RoundTrip) {
  for (auto s : {SchemeId::kFntCdc, SchemeId::kFdCdc, SchemeId::kTdCdc, SchemeId::kFntAeq,
                 SchemeId::kFdAeq, SchemeId::kTdAeq}) {
    EXPECT_EQ(scheme_id_from_string(to_string(s)), s);
  }
  EXPECT_THROW(scheme_id_from_string("FFT-CDC"), ConfigError);
}

TEST(Measure, FntPathsMatchTableConstants) {
  const auto v = measure();
  EXPECT_DOUBLE_EQ(cost(v, SchemeId::kFntCdc).measured, 8.0);
  EXPECT_DOUBLE_EQ(cost(v, SchemeId::kFntAeq).measured, 64.0);
}

TEST(Measure, BaselinesMatchHandCountedConventions) {
  const auto v = measure();
  // direct forms: 32 complex taps per sample and polarization, 4 real
  // multiplications each; sixteen 16-tap real filters per symbol
  EXPECT_DOUBLE_EQ(cost(v, SchemeId::kTdCdc).measured, 2 * 32 * 4);
  EXPECT_DOUBLE_EQ(cost(v, SchemeId::kTdCdc).measured * 3 / 4,
                   formula_mults(SchemeId::kTdCdc, 32));
  EXPECT_DOUBLE_EQ(cost(v, SchemeId::kTdAeq).measured, formula_mults(SchemeId::kTdAeq, 16));
  // overlap-save: radix-2 FFT of length N costs 2 N log2 N; per hop of N/2
  // outputs, CDC runs one forward and one inverse transform plus N bin
  // products, AEQ runs four of each plus 16 N bin products
  const double fft64 = 2 * 64 * 6, fft32 = 2 * 32 * 5;
  EXPECT_DOUBLE_EQ(cost(v, SchemeId::kFdCdc).measured, 2 * (2 * fft64 + 4 * 64) / 32);
  EXPECT_DOUBLE_EQ(cost(v, SchemeId::kFdAeq).measured, (8 * fft32 + 16 * 4 * 32) / 16);
}

TEST(Measure, RejectsUnsupportedLengths) {
  MeasureOptions o;
  o.cdc_n = 128;
  EXPECT_THROW(measure(o), ConfigError);
  o = {};
  o.symbols = 100;
  EXPECT_THROW(measure(o), ConfigError);
}

TEST(Reduction, FormulaLevelPercentages) {
  const ReductionReport r = reduction_report(measure());
  ASSERT_EQ(r.reductions.size(), 3u);
  EXPECT_NEAR(r.reductions[0].formula_pct, 100.0 * (1 - 8.0 / 84), 1e-12);
  EXPECT_NEAR(r.reductions[0].formula_pct, 90.5, 0.05);
  EXPECT_NEAR(r.reductions[1].formula_pct, 57.9, 0.05);
  EXPECT_NEAR(r.reductions[2].formula_pct, 100.0 * (1 - 72.0 / 236), 1e-12);
  EXPECT_NEAR(r.reductions[2].formula_pct, 69.5, 0.05);
  EXPECT_EQ(r.reductions[0].stated_pct, 89.0);
  EXPECT_EQ(r.reductions[1].stated_pct, 58.0);
  EXPECT_EQ(r.reductions[2].stated_pct, 68.0);
  // measured baselines are costlier than their formulas, so the measured
  // reductions are larger
  for (const auto& x : r.reductions) EXPECT_GT(x.measured_pct, x.formula_pct);
}

TEST(Reduction, NeedsAllFourCosts) {
  auto v = measure();
  v.erase(v.begin());
  EXPECT_THROW(reduction_report(v), ConfigError);
}

TEST(Report, TextAndCsv) {
  const ReductionReport r = reduction_report(measure());
  std::ostringstream t;
  write_text(t, r);
  EXPECT_NE(t.str().find("FD-CDC"), std::string::npos);
  EXPECT_NE(t.str().find("90.5%"), std::string::npos);
  EXPECT_NE(t.str().find("stated 89%"), std::string::npos);
  EXPECT_NE(t.str().find("69.5%"), std::string::npos);

  std::ostringstream c;
  write_csv(c, r);
  std::istringstream is(c.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "scheme,n,formula,measured");
  std::getline(is, line);
  EXPECT_EQ(line, "FNT-CDC,64,8.0000,8.0000");
  int rows = 0;
  while (std::getline(is, line) && line.rfind("reduction,", 0) != 0) ++rows;
  EXPECT_EQ(rows, 5);
  EXPECT_EQ(line, "reduction,formula_pct,measured_pct,stated_pct");
  std::getline(is, line);
  EXPECT_EQ(line.substr(0, 26), "FNT-CDC vs FD-CDC,90.4762,");
  EXPECT_EQ(line.substr(line.size() - 3), ",89");
}

TEST(CostFromTally, NormalizesPerSymbol) {
  const SchemeCost c = cost_from_tally(SchemeId::kFntAeq, 32, 6400, 100);
  EXPECT_DOUBLE_EQ(c.measured, 64.0);
  EXPECT_DOUBLE_EQ(c.formula, 64.0);
  EXPECT_THROW(cost_from_tally(SchemeId::kFntAeq, 32, 1, 0), ConfigError);
}

}  // namespace
}  // namespace fntdsp::complexity
