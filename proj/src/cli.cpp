// Copyright 2026 The fntdsp Authors
// SPDX-License-Identifier: Apache-2.0

#include "fntdsp/cli.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <tuple>

#include "CLI11.hpp"
#include "fntdsp/aeq.hpp"
#include "fntdsp/cdc.hpp"
#include "fntdsp/complexity.hpp"
#include "fntdsp/errors.hpp"
#include "fntdsp/fnt.hpp"
#include "json.hpp"

namespace fntdsp::cli {

namespace {

// Raised for problems the user can fix by changing inputs (exit code 2).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::int64_t> read_ints(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read " + path);
  try {
    return parse_int_list(in);
  } catch (const ConfigError& e) {
    throw UsageError(path + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

// Writes to the named file, or to `fallback` when the name is empty.
void emit(const std::string& path, const std::string& text, std::ostream& fallback) {
  if (path.empty()) {
    fallback << text;
  } else {
    write_text_file(path, text);
  }
}

// ---------------------------------------------------------------------------
// self-test

// Direct evaluation of X(k) = sum x(n) alpha^(nk) mod F with plain integer
// arithmetic, independent of the ring's shift-add reduction.
FermatVector direct_transform(const TransformPlan& plan, const FermatVector& x) {
  const std::uint64_t f = plan.params().modulus;
  const std::size_t n = x.size();
  std::vector<std::uint64_t> pw(n, 1);
  for (std::size_t i = 1; i < n; ++i) pw[i] = pw[i - 1] * plan.alpha().value % f;
  FermatVector out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::uint64_t acc = 0;
    for (std::size_t i = 0; i < n; ++i) acc = (acc + x[i].value * pw[(i * k) % n]) % f;
    out[k] = Residue{acc};
  }
  return out;
}

std::vector<TransformPlan> selftest_plans(bool fault) {
  std::vector<TransformPlan> plans{TransformPlan::f17_radix2_n8(),
                                   TransformPlan::f65537_radix2_n32(),
                                   TransformPlan::f65537_sqrt2_n64()};
  if (fault) {
    for (auto& p : plans) p = p.with_twiddle_fault(p.log2_size() - 1, 1);
  }
  return plans;
}

std::vector<std::int64_t> random_signed(std::mt19937_64& rng, std::size_t n, std::int64_t lim) {
  std::uniform_int_distribution<std::int64_t> d(-lim, lim);
  std::vector<std::int64_t> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

SuiteResult suite_golden(const std::vector<TransformPlan>& plans) {
  SuiteResult r{"golden"};
  auto check = [&](bool ok) {
    ++r.total;
    if (ok) ++r.passed;
  };
  const TransformPlan& p17 = plans.front();
  const FermatVector x = encode(p17.ring(), std::vector<std::int64_t>{1, 1, 0, 0, 0, 0, 0, 0});
  const FermatVector want = encode(p17.ring(), std::vector<std::int64_t>{2, 3, 5, -8, 0, -1, -3, -7});
  check(fnt(p17, x) == want);
  check(ifnt(p17, want) == x);
  for (const auto& p : plans) {
    FermatVector delta(p.size(), Residue{0});
    delta[0] = Residue{1};
    const FermatVector ones(p.size(), Residue{1});
    check(fnt(p, delta) == ones);
    check(ifnt(p, ones) == delta);
  }
  return r;
}

SuiteResult suite_round_trip(const std::vector<TransformPlan>& plans, std::mt19937_64& rng,
                             std::size_t vectors) {
  SuiteResult r{"round-trip"};
  for (const auto& p : plans) {
    const auto lim = static_cast<std::int64_t>(p.params().signed_limit());
    for (std::size_t v = 0; v < vectors; ++v) {
      const FermatVector x = encode(p.ring(), random_signed(rng, p.size(), lim));
      const FermatVector big_x = fnt(p, x);
      ++r.total;
      if (big_x == direct_transform(p, x) && ifnt(p, big_x) == x) ++r.passed;
    }
  }
  return r;
}

SuiteResult suite_convolution(const std::vector<TransformPlan>& plans, std::mt19937_64& rng,
                              std::size_t vectors) {
  SuiteResult r{"convolution"};
  for (const auto& p : plans) {
    const auto n = p.size();
    const auto len = static_cast<std::int64_t>(n);
    const auto limit = static_cast<std::int64_t>(p.params().signed_limit());
    for (std::int64_t k : {1, 2}) {  // real, complex
      // element bounds so that max|x| * sum|h| * k stays in range
      const std::int64_t a = std::min<std::int64_t>(15, limit / (k * len));
      if (a == 0) continue;
      const std::int64_t b = limit / (k * len * a);
      for (std::size_t v = 0; v < vectors; ++v) {
        const auto xr = random_signed(rng, n, a), hr = random_signed(rng, n, b);
        std::vector<std::int64_t> want_re(n, 0), want_im(n, 0);
        bool ok;
        if (k == 1) {
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) want_re[(i + j) % n] += xr[i] * hr[j];
          const auto got = cyclic_convolve_real(p, encode(p.ring(), xr), encode(p.ring(), hr));
          ok = decode(p.ring(), got) == want_re;
        } else {
          const auto xi = random_signed(rng, n, a), hi = random_signed(rng, n, b);
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
              want_re[(i + j) % n] += xr[i] * hr[j] - xi[i] * hi[j];
              want_im[(i + j) % n] += xr[i] * hi[j] + xi[i] * hr[j];
            }
          const auto got =
              cyclic_convolve_complex(p, encode(p.ring(), xr), encode(p.ring(), xi),
                                      encode(p.ring(), hr), encode(p.ring(), hi));
          ok = decode(p.ring(), got.re) == want_re && decode(p.ring(), got.im) == want_im;
        }
        ++r.total;
        if (ok) ++r.passed;
      }
    }
  }
  return r;
}

SuiteResult suite_shift_add(const std::vector<TransformPlan>& plans, std::mt19937_64& rng) {
  SuiteResult r{"shift-add"};
  for (const auto& p : plans) {
    FermatVector x = encode(p.ring(), random_signed(rng, p.size(), 7));
    const complexity::ScopedTally tally;
    fnt_inplace(p, x);
    ifnt_inplace(p, x);
    ++r.total;
    if (tally.count() == 0) ++r.passed;
  }
  return r;
}

SuiteResult suite_budget() {
  SuiteResult r{"budget"};
  auto check = [&](bool ok) {
    ++r.total;
    if (ok) ++r.passed;
  };
  QuantizedTaps q;
  q.re.assign(32, 31);
  q.im.assign(32, -31);
  q.spec = QuantSpec::make(6, 31);
  const CdcEngine cdc(q, QuantSpec::make(5, 10));
  check(cdc.budget().pass && cdc.budget().bound == 29760);
  const FntAeq aeq{AeqConfig{}};
  check(aeq.budget().pass && aeq.budget().bound == 30480);
  AeqConfig wide;
  wide.sig_spec = QuantSpec::make(6, 10);
  bool rejected = false;
  try {
    const FntAeq over(wide);
  } catch (const BudgetError&) {
    rejected = true;
  }
  check(rejected);
  return r;
}

// ---------------------------------------------------------------------------
// sweep / complexity

RunConfig resolve_config(const std::string& path, const std::optional<std::uint64_t>& seed,
                         const std::string& schemes) {
  RunConfig c = path.empty() ? RunConfig{} : load_config(path);
  if (seed) c.apply_seed(*seed);
  if (!schemes.empty()) {
    c.schemes.clear();
    std::stringstream ss(schemes);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!item.empty()) c.schemes.push_back(linksim::Scheme::parse(item));
    }
  }
  c.validate();
  return c;
}

RunManifest make_manifest(const std::string& command, const std::string& config_path,
                          const std::string& out_dir, const RunConfig& c) {
  RunManifest m;
  m.command = command;
  m.config_path = config_path;
  m.seed = c.seed;
  for (const auto& s : c.schemes) m.schemes.push_back(s.name());
  m.out_dir = out_dir;
  m.version = FNTDSP_VERSION;
  m.config_json = serialize_config(c);
  return m;
}

void write_outputs(const std::string& out_dir, const RunManifest& m,
                   const std::vector<std::pair<std::string, std::string>>& files) {
  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  for (const auto& [name, text] : files) write_text_file(dir / name, text);
  write_text_file(dir / "config.json", m.config_json);
  write_text_file(dir / "manifest.json", m.to_json());
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

int cmd_sweep(const RunConfig& c, const RunManifest& m, const std::string& out_dir,
              std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const linksim::SweepResult r = linksim::sweep(c.link, c.schemes);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto costs = complexity::reduction_report(complexity::measure(c.complexity));

  std::ostringstream csv;
  csv << m.header();
  linksim::write_csv(csv, r, "");

  std::ostringstream sum;
  std::vector<std::string> warnings;
  sum << "penalty at BER " << fmt("%.1e", linksim::kHdFecBer) << " vs " << r.schemes[0] << '\n';
  for (std::size_t k = 0; k < r.schemes.size(); ++k) {
    sum << "  " << r.schemes[k] << ": threshold ";
    if (r.threshold_snr_db[k]) {
      sum << fmt("%.2f dB", *r.threshold_snr_db[k]);
    } else {
      sum << "not reached";
      warnings.push_back(r.schemes[k] + " never crosses the BER threshold");
    }
    if (k > 0) {
      sum << ", penalty " << (r.penalty_db[k] ? fmt("%.2f dB", *r.penalty_db[k]) : "n/a");
    }
    sum << '\n';
  }
  for (const auto& row : r.rows) {
    if (!row.converged) {
      warnings.push_back(row.scheme + " at " + fmt("%.1f dB", row.snr_db) +
                         " did not converge: " + row.note);
    }
  }
  const auto& combined = costs.reductions.back();
  sum << "combined multiplication reduction (formula) " << fmt("%.1f%%", combined.formula_pct)
      << '\n';
  for (const auto& w : warnings) sum << "warning: " << w << '\n';

  const std::string summary = m.header() + sum.str();
  if (!out_dir.empty()) {
    write_outputs(out_dir, m, {{"sweep.csv", csv.str()}, {"summary.txt", summary}});
  } else {
    out << csv.str();
  }
  out << sum.str() << "elapsed " << fmt("%.1f s", secs) << '\n';
  return warnings.empty() ? kOk : kWarnings;
}

int cmd_complexity(const RunConfig& c, const RunManifest& m, const std::string& out_dir,
                   std::ostream& out) {
  const auto report = complexity::reduction_report(complexity::measure(c.complexity));
  std::ostringstream text, csv;
  complexity::write_text(text, report);
  csv << m.header();
  complexity::write_csv(csv, report);
  if (!out_dir.empty()) {
    write_outputs(out_dir, m,
                  {{"complexity.txt", m.header() + text.str()}, {"complexity.csv", csv.str()}});
  }
  out << text.str();
  return kOk;
}

// Budget of a cyclic convolution with the actual input magnitudes.
BudgetReport input_budget(const TransformPlan& plan, std::span<const std::int64_t> x_mags,
                          std::span<const std::int64_t> h_mags, ConvKind kind) {
  BudgetReport b;
  b.kind = kind;
  for (auto v : x_mags) b.max_signal = std::max(b.max_signal, v);
  for (auto v : h_mags) b.tap_sum += v;
  b.bound = b.max_signal * b.tap_sum * (kind == ConvKind::kComplex ? 2 : 1);
  b.limit = static_cast<std::int64_t>(plan.params().signed_limit());
  b.pass = b.bound <= b.limit;
  return b;
}

std::vector<std::int64_t> pad_to(std::vector<std::int64_t> v, std::size_t n, const char* what) {
  if (v.size() > n) {
    throw UsageError(std::string(what) + " has " + std::to_string(v.size()) +
                     " values; the plan length is " + std::to_string(n));
  }
  v.resize(n, 0);
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string s;
  for (unsigned i = 0; i < len; ++i) {
    s += kHex[md[i] >> 4];
    s += kHex[md[i] & 15];
  }
  return s;
}

std::string RunManifest::digest() const {
  return sha256_hex("fntdsp " + version + "\n" + command + "\n" + config_json);
}

std::string RunManifest::header() const {
  std::string schemes_list;
  for (const auto& s : schemes) schemes_list += (schemes_list.empty() ? "" : ",") + s;
  return "# fntdsp " + version + " " + command + "\n# seed " + std::to_string(seed) +
         "\n# schemes " + schemes_list + "\n# manifest-sha256 " + digest() + "\n";
}

std::string RunManifest::to_json() const {
  nlohmann::json j;
  j["command"] = command;
  j["config_path"] = config_path;
  j["seed"] = seed;
  j["schemes"] = schemes;
  j["out_dir"] = out_dir;
  j["version"] = version;
  j["sha256"] = digest();
  return j.dump(2) + "\n";
}

std::vector<std::int64_t> parse_int_list(std::istream& in) {
  std::vector<std::int64_t> v;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      std::size_t used = 0;
      std::int64_t x = 0;
      try {
        x = std::stoll(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size()) {
        throw ConfigError("line " + std::to_string(line_no) + ": '" + tok +
                          "' is not an integer");
      }
      v.push_back(x);
    }
  }
  return v;
}

std::vector<SuiteResult> run_selftest(const SelftestOptions& o) {
  const auto plans = selftest_plans(o.inject_fault);
  std::mt19937_64 rng(o.seed);
  std::vector<SuiteResult> out;
  out.push_back(suite_golden(plans));
  out.push_back(suite_round_trip(plans, rng, o.vectors));
  out.push_back(suite_convolution(plans, rng, o.vectors));
  out.push_back(suite_shift_add(plans, rng));
  out.push_back(suite_budget());
  return out;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fermat number transform DSP toolkit", "fntdsp"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(FNTDSP_VERSION));

  SelftestOptions st;
  auto* selftest = app.add_subcommand("selftest", "golden vectors, round trips, oracle checks");
  selftest->add_option("--seed", st.seed, "random case seed");
  selftest->add_option("--vectors", st.vectors, "random cases per plan")->check(CLI::PositiveNumber);
  selftest->add_flag("--inject-fault", st.inject_fault, "corrupt one twiddle in every plan");

  std::string plan_id, input, output, x_path, h_path, mode = "real";
  bool inverse = false;
  const auto ids = TransformPlan::shipped_ids();
  auto* transform = app.add_subcommand("transform", "forward or inverse FNT of an integer list");
  transform->add_option("--plan", plan_id, "plan id")->required()->check(CLI::IsMember(ids));
  transform->add_option("--input", input, "integer list (signed; residues with --inverse)")
      ->required();
  transform->add_flag("--inverse", inverse, "inverse transform");
  transform->add_option("--output", output, "output file (default stdout)");

  auto* convolve = app.add_subcommand("convolve", "cyclic convolution through the FNT");
  convolve->add_option("--plan", plan_id, "plan id")->required()->check(CLI::IsMember(ids));
  convolve->add_option("--signal", x_path, "signal list; complex mode reads re im pairs")->required();
  convolve->add_option("--kernel", h_path, "kernel list; complex mode reads re im pairs")->required();
  convolve->add_option("--mode", mode, "real or complex")
      ->check(CLI::IsMember({"real", "complex"}));
  convolve->add_option("--output", output, "output file (default stdout)");

  std::string config_path, out_dir, schemes;
  std::optional<std::uint64_t> seed;
  auto* sweep = app.add_subcommand("sweep", "BER sweep over the configured SNR points");
  auto* cplx_cmd = app.add_subcommand("complexity", "multiplication counts and reductions");
  for (auto* sub : {sweep, cplx_cmd}) {
    sub->add_option("--config", config_path, "JSON config (defaults when omitted)");
    sub->add_option("--seed", seed, "overrides the config seed");
    sub->add_option("--out-dir", out_dir, "directory for CSV, summary and manifest");
  }
  sweep->add_option("--schemes", schemes, "comma-separated, e.g. fd-float+td-float,fnt+fnt");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*selftest) {
      bool all = true;
      for (const auto& s : run_selftest(st)) {
        out << s.name << ": " << s.passed << "/" << s.total << (s.ok() ? " pass" : " FAIL")
            << '\n';
        all = all && s.ok();
      }
      out << "selftest " << (all ? "passed" : "failed") << '\n';
      return all ? kOk : kFailure;
    }
    if (*transform) {
      const TransformPlan plan = TransformPlan::by_id(plan_id);
      const auto values = pad_to(read_ints(input), plan.size(), "input");
      FermatVector x;
      if (inverse) {
        for (auto v : values) {
          if (v < 0 || static_cast<std::uint64_t>(v) >= plan.params().modulus) {
            throw UsageError("inverse input must be residues in [0, " +
                             std::to_string(plan.params().modulus) + ")");
          }
          x.push_back(Residue{static_cast<std::uint64_t>(v)});
        }
      } else {
        x = encode(plan.ring(), values);
      }
      std::ostringstream os;
      if (inverse) {
        for (auto v : decode(plan.ring(), ifnt(plan, x))) os << v << '\n';
      } else {
        for (auto r : fnt(plan, x)) os << r.value << '\n';
      }
      emit(output, os.str(), out);
      return kOk;
    }
    if (*convolve) {
      const TransformPlan plan = TransformPlan::by_id(plan_id);
      const std::size_t n = plan.size();
      auto xs = read_ints(x_path), hs = read_ints(h_path);
      std::ostringstream os;
      if (mode == "real") {
        xs = pad_to(std::move(xs), n, "x");
        hs = pad_to(std::move(hs), n, "h");
        std::vector<std::int64_t> xm, hm;
        for (auto v : xs) xm.push_back(std::llabs(v));
        for (auto v : hs) hm.push_back(std::llabs(v));
        const BudgetReport b = input_budget(plan, xm, hm, ConvKind::kReal);
        if (!b.pass) throw BudgetError("convolution can overflow: " + b.describe());
        const auto y = cyclic_convolve_real(plan, encode(plan.ring(), xs), encode(plan.ring(), hs));
        for (auto v : decode(plan.ring(), y)) os << v << '\n';
      } else {
        if (xs.size() % 2 || hs.size() % 2) throw UsageError("complex lists need re im pairs");
        auto split = [&](const std::vector<std::int64_t>& v, const char* what) {
          std::vector<std::int64_t> re, im, mag;
          for (std::size_t i = 0; i < v.size(); i += 2) {
            re.push_back(v[i]);
            im.push_back(v[i + 1]);
          }
          re = pad_to(std::move(re), n, what);
          im = pad_to(std::move(im), n, what);
          for (std::size_t i = 0; i < n; ++i) mag.push_back(std::max(std::llabs(re[i]), std::llabs(im[i])));
          return std::tuple{re, im, mag};
        };
        const auto [xr, xi, xm] = split(xs, "x");
        const auto [hr, hi, hm] = split(hs, "h");
        const BudgetReport b = input_budget(plan, xm, hm, ConvKind::kComplex);
        if (!b.pass) throw BudgetError("convolution can overflow: " + b.describe());
        const auto& ring = plan.ring();
        const auto y = cyclic_convolve_complex(plan, encode(ring, xr), encode(ring, xi),
                                               encode(ring, hr), encode(ring, hi));
        const auto yr = decode(ring, y.re), yi = decode(ring, y.im);
        for (std::size_t i = 0; i < n; ++i) os << yr[i] << ' ' << yi[i] << '\n';
      }
      emit(output, os.str(), out);
      return kOk;
    }
    const RunConfig c = resolve_config(config_path, seed, schemes);
    const std::string command = *sweep ? "sweep" : "complexity";
    const RunManifest m = make_manifest(command, config_path, out_dir, c);
    return *sweep ? cmd_sweep(c, m, out_dir, out) : cmd_complexity(c, m, out_dir, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const UnsupportedParameter& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const RangeError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace fntdsp::cli
