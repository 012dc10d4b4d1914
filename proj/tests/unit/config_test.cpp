// Copyright 2026 The fntdsp Authors
// SPDX-License-Identifier: Apache-2.0

#include "fntdsp/config.hpp"

#include <gtest/gtest.h>

#include <filesystem>

#include "fntdsp/errors.hpp"

namespace fntdsp {
namespace {

TEST(Config, EmptyObjectGivesDefaults) {
  EXPECT_EQ(parse_config("{}"), RunConfig{});
}

TEST(Config, SerializeRoundTrips) {
  RunConfig c;
  c.apply_seed(42);
  c.link.fiber.z_km = 75;
  c.link.cdc_z_km = 70.5;
  c.link.snr_db = {10.5, 11};
  c.link.cdc_full_scale_rms = 3.0;
  c.schemes = {linksim::reference_scheme(), linksim::fnt_scheme(),
               linksim::Scheme::parse("fnt+td-float")};
  c.complexity.symbols = 2048;
  const RunConfig back = parse_config(serialize_config(c));
  EXPECT_EQ(back, c);
  EXPECT_EQ(serialize_config(back), serialize_config(c));
}

TEST(Config, SeedReachesEverySection) {
  const RunConfig c = parse_config(R"({"seed": 9})");
  EXPECT_EQ(c.link.seed, 9u);
  EXPECT_EQ(c.complexity.seed, 9u);
}

TEST(Config, CommentsAllowed) {
  const RunConfig c = parse_config(R"(// header
    { "link": { /* inline */ "baud": 32e9 } })");
  EXPECT_DOUBLE_EQ(c.link.baud, 32e9);
}

TEST(Config, NullCompensatedLengthMeansAutomatic) {
  RunConfig c;
  c.link.cdc_z_km = 10;
  c = parse_config(R"({"link": {"cdc": {"z_km": null}}})");
  EXPECT_FALSE(c.link.cdc_z_km.has_value());
  EXPECT_EQ(parse_config(R"({"link": {"cdc": {"z_km": 12.5}}})").link.cdc_z_km, 12.5);
}

TEST(Config, RejectsUnknownKeysAtEveryLevel) {
  EXPECT_THROW(parse_config(R"({"sede": 1})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"link": {"bawd": 1}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"link": {"fiber": {"length": 1}}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"complexity": {"n": 1}})"), ConfigError);
}

TEST(Config, RejectsBadValues) {
  EXPECT_THROW(parse_config("{"), ConfigError);
  EXPECT_THROW(parse_config(R"({"seed": "one"})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"link": []})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"schemes": []})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"link": {"n_symbols": 1000}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"link": {"cdc": {"tap_method": "magic"}}})"), ConfigError);
  EXPECT_ANY_THROW(parse_config(R"({"schemes": ["fnt+nothing"]})"));
}

TEST(Config, ShippedConfigsLoad) {
  const std::filesystem::path dir = FNTDSP_SOURCE_DIR "/configs";
  const RunConfig fiber = load_config((dir / "default.json").string());
  EXPECT_DOUBLE_EQ(fiber.link.fiber.z_km, 75.0);
  EXPECT_EQ(fiber.schemes.front(), linksim::reference_scheme());
  const RunConfig b2b = load_config((dir / "b2b.json").string());
  EXPECT_DOUBLE_EQ(b2b.link.fiber.z_km, 0.0);
  EXPECT_THROW(load_config((dir / "missing.json").string()), ConfigError);
}

}  // namespace
}  // namespace fntdsp
