// Copyright 2026 The fntdsp Authors
// SPDX-License-Identifier: Apache-2.0

#include "fntdsp/cli.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "fntdsp/errors.hpp"
#include "oracles.hpp"

namespace fntdsp::cli {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out, err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "fntdsp");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class CliFiles : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("fntdsp_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& text) {
    const auto p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path dir_;
};

std::vector<std::int64_t> ints(const std::string& text) {
  std::istringstream in(text);
  return parse_int_list(in);
}

TEST(Sha256, KnownVectors) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(ParseIntList, CommentsAndWhitespace) {
  EXPECT_EQ(ints("1 -2\n# skip 5\n 3\t4 # trailing\n"), (std::vector<std::int64_t>{1, -2, 3, 4}));
  EXPECT_TRUE(ints("").empty());
  EXPECT_THROW(ints("1 2x"), ConfigError);
  EXPECT_THROW(ints("1.5"), ConfigError);
}

TEST(Selftest, PassesOnShippedPlans) {
  for (const auto& s : run_selftest({})) EXPECT_TRUE(s.ok()) << s.name;
  const auto r = invoke({"selftest", "--vectors", "20"});
  EXPECT_EQ(r.code, kOk);
  EXPECT_NE(r.out.find("selftest passed"), std::string::npos);
}

TEST(Selftest, CorruptedTwiddleIsCaught) {
  SelftestOptions o;
  o.inject_fault = true;
  o.vectors = 20;
  bool round_trip_failed = false;
  for (const auto& s : run_selftest(o)) {
    if (s.name == "round-trip") round_trip_failed = !s.ok();
  }
  EXPECT_TRUE(round_trip_failed);
  EXPECT_EQ(invoke({"selftest", "--inject-fault", "--vectors", "5"}).code, kFailure);
}

TEST_F(CliFiles, TransformGoldenAndInverse) {
  const auto in = write("x.txt", "1 1\n");
  auto r = invoke({"transform", "--plan", "f17-a2-n8", "--input", in});
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_EQ(ints(r.out), (std::vector<std::int64_t>{2, 3, 5, 9, 0, 16, 14, 10}));
  const auto spec = write("X.txt", r.out);
  r = invoke({"transform", "--plan", "f17-a2-n8", "--input", spec, "--inverse"});
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_EQ(ints(r.out), (std::vector<std::int64_t>{1, 1, 0, 0, 0, 0, 0, 0}));
}

TEST_F(CliFiles, TransformOfDeltaIsAllOnes) {
  const auto in = write("d.txt", "1\n");
  for (const auto& id : TransformPlan::shipped_ids()) {
    const auto out = path(id + ".txt");
    ASSERT_EQ(invoke({"transform", "--plan", id, "--input", in, "--output", out}).code, kOk);
    const auto v = ints(slurp(out));
    EXPECT_EQ(v, std::vector<std::int64_t>(TransformPlan::by_id(id).size(), 1)) << id;
  }
}

TEST_F(CliFiles, TransformMatchesBigIntegerOracle) {
  const auto plan = TransformPlan::by_id("f65537-a4080-n64");
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::int64_t> d(-32768, 32768);
  std::vector<std::uint64_t> residues;
  std::string text;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const auto v = d(rng);
    residues.push_back(v < 0 ? static_cast<std::uint64_t>(v + 65537) : static_cast<std::uint64_t>(v));
    text += std::to_string(v) + "\n";
  }
  const auto r = invoke({"transform", "--plan", plan.id(), "--input", write("x.txt", text)});
  ASSERT_EQ(r.code, kOk) << r.err;
  const auto want = testing::naive_transform(residues, plan.alpha().value, 65537);
  const auto got = ints(r.out);
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t k = 0; k < want.size(); ++k) EXPECT_EQ(static_cast<std::uint64_t>(got[k]), want[k]);
}

TEST_F(CliFiles, TransformRejectsBadInput) {
  EXPECT_EQ(invoke({"transform", "--plan", "f17-a2-n8", "--input", write("a.txt", "1 x")}).code,
            kUsage);
  EXPECT_EQ(invoke({"transform", "--plan", "f17-a2-n8", "--input", write("b.txt", "1 2 3 4 5 6 7 8 9")})
                .code,
            kUsage);
  EXPECT_EQ(invoke({"transform", "--plan", "f17-a2-n8", "--input", write("c.txt", "17"),
                    "--inverse"})
                .code,
            kUsage);
  EXPECT_EQ(invoke({"transform", "--plan", "nope", "--input", path("a.txt")}).code, kUsage);
  EXPECT_EQ(invoke({"transform", "--plan", "f17-a2-n8", "--input", path("missing.txt")}).code,
            kUsage);
  EXPECT_EQ(invoke({}).code, kUsage);
  EXPECT_EQ(invoke({"--help"}).code, kOk);
}

TEST_F(CliFiles, ConvolveRealAndComplexAgainstOracle) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::int64_t> dx(-15, 15), dh(-31, 31);
  const std::size_t n = 32, taps = 16;
  std::vector<std::int64_t> xr(n), xi(n), hr(n, 0), hi(n, 0);
  std::string real_x, real_h, cx, ch;
  for (std::size_t i = 0; i < n; ++i) {
    xr[i] = dx(rng);
    xi[i] = dx(rng);
    real_x += std::to_string(xr[i]) + "\n";
    cx += std::to_string(xr[i]) + " " + std::to_string(xi[i]) + "\n";
  }
  for (std::size_t i = 0; i < taps; ++i) {
    hr[i] = dh(rng);
    hi[i] = dh(rng);
    real_h += std::to_string(hr[i]) + "\n";
    ch += std::to_string(hr[i]) + " " + std::to_string(hi[i]) + "\n";
  }
  auto r = invoke({"convolve", "--plan", "f65537-a2-n32", "--signal", write("x.txt", real_x),
                   "--kernel", write("h.txt", real_h)});
  ASSERT_EQ(r.code, kOk) << r.err;
  const auto want = testing::cyclic_conv(xr, hr);
  const auto got = ints(r.out);
  ASSERT_EQ(got.size(), n);
  for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(testing::big(got[i]), want[i]);

  r = invoke({"convolve", "--plan", "f65537-a2-n32", "--mode", "complex", "--signal",
              write("cx.txt", cx), "--kernel", write("ch.txt", ch)});
  ASSERT_EQ(r.code, kOk) << r.err;
  const auto wc = testing::cyclic_conv_complex(xr, xi, hr, hi);
  const auto gc = ints(r.out);
  ASSERT_EQ(gc.size(), 2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    EXPECT_EQ(testing::big(gc[2 * i]), wc.re[i]);
    EXPECT_EQ(testing::big(gc[2 * i + 1]), wc.im[i]);
  }
}

TEST_F(CliFiles, ConvolveOverBudgetIsRefusedWithDiagnostic) {
  const auto r = invoke({"convolve", "--plan", "f17-a2-n8", "--signal", write("x.txt", "3 3"),
                         "--kernel", write("h.txt", "2 -1")});
  EXPECT_EQ(r.code, kFailure);
  EXPECT_NE(r.err.find("3*3 = 9 > 8"), std::string::npos) << r.err;
  EXPECT_EQ(invoke({"convolve", "--plan", "f17-a2-n8", "--mode", "complex", "--signal",
                    write("odd.txt", "1 2 3"), "--kernel", path("h.txt")})
                .code,
            kUsage);
}

TEST_F(CliFiles, ComplexityReportAndFiles) {
  const auto out = path("cx");
  const auto r = invoke({"complexity", "--out-dir", out});
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_NE(r.out.find("69.5%"), std::string::npos);
  EXPECT_NE(r.out.find("90.5%"), std::string::npos);
  for (const char* f : {"complexity.txt", "complexity.csv", "config.json", "manifest.json"})
    EXPECT_TRUE(fs::exists(fs::path(out) / f)) << f;
  EXPECT_EQ(slurp((fs::path(out) / "complexity.csv").string()).rfind("# fntdsp ", 0), 0u);
}

TEST_F(CliFiles, SweepIsByteIdenticalForSameSeed) {
  const auto cfg = write("small.json", R"({
    "link": { "n_symbols": 16384, "discard_symbols": 8192, "snr_db": [16, 20] },
    "schemes": ["fd-float+td-float", "fnt+fnt"] })");
  const auto a = invoke({"sweep", "--config", cfg, "--out-dir", path("a")});
  const auto b = invoke({"sweep", "--config", cfg, "--out-dir", path("b")});
  ASSERT_NE(a.code, kUsage) << a.err;
  EXPECT_EQ(a.code, b.code);
  const auto csv_a = slurp(path("a") + "/sweep.csv");
  EXPECT_FALSE(csv_a.empty());
  EXPECT_EQ(csv_a, slurp(path("b") + "/sweep.csv"));
  EXPECT_EQ(slurp(path("a") + "/summary.txt"), slurp(path("b") + "/summary.txt"));
  EXPECT_NE(csv_a.find("# seed 1\n"), std::string::npos);

  const auto c = invoke({"sweep", "--config", cfg, "--seed", "2", "--out-dir", path("c")});
  ASSERT_NE(c.code, kUsage) << c.err;
  const auto csv_c = slurp(path("c") + "/sweep.csv");
  EXPECT_NE(csv_a, csv_c);
  EXPECT_NE(csv_c.find("# seed 2\n"), std::string::npos);
}

TEST_F(CliFiles, SweepRejectsBadConfig) {
  auto r = invoke({"sweep", "--config", write("bad.json", R"({"link": {"snr": [1]}})")});
  EXPECT_EQ(r.code, kUsage);
  EXPECT_NE(r.err.find("snr"), std::string::npos);
  EXPECT_EQ(invoke({"sweep", "--schemes", "fnt+bogus"}).code, kUsage);
  EXPECT_EQ(invoke({"sweep", "--config", path("none.json")}).code, kUsage);
}

TEST(Manifest, DigestIgnoresPaths) {
  RunManifest m{"sweep", "a.json", 1, {"fnt+fnt"}, "out1", "1.0", "{}\n"};
  RunManifest n = m;
  n.config_path = "b.json";
  n.out_dir = "out2";
  EXPECT_EQ(m.digest(), n.digest());
  EXPECT_EQ(m.header(), n.header());
  n.config_json = "{\"seed\":2}\n";
  EXPECT_NE(m.digest(), n.digest());
  EXPECT_NE(m.to_json().find("\"out_dir\": \"out1\""), std::string::npos);
}

}  // namespace
}  // namespace fntdsp::cli
