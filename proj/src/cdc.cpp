// Copyright 2026 The fntdsp Authors
// SPDX-License-Identifier: Apache-2.0

#include "fntdsp/cdc.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include <Eigen/Dense>

#include "fntdsp/errors.hpp"
#include "fntdsp/op_counter.hpp"

namespace fntdsp {

double cd_phase_coefficient(const FiberParams& fiber) noexcept {
  const double d = fiber.d_ps_nm_km * 1e-6;  // s/m^2
  const double lambda = fiber.lambda_nm * 1e-9;
  const double z = fiber.z_km * 1e3;
  return std::numbers::pi * lambda * lambda * d * z / kSpeedOfLight;
}

double cd_support_samples(const FiberParams& fiber, double fs, double band_hz) noexcept {
  const double d = fiber.d_ps_nm_km * 1e-6;
  const double lambda = fiber.lambda_nm * 1e-9;
  const double width = band_hz > 0 ? std::min(2 * band_hz, fs) : fs;
  return std::abs(d) * lambda * lambda * fiber.z_km * 1e3 * width * fs / kSpeedOfLight;
}

double cd_fit_length_km(const FiberParams& fiber, double fs, std::size_t n_taps, double fill,
                        double band_hz) noexcept {
  FiberParams unit = fiber;
  unit.z_km = 1.0;
  const double per_km = cd_support_samples(unit, fs, band_hz);
  return per_km > 0 ? fill * static_cast<double>(n_taps) / per_km : 0.0;
}

void apply_cd_allpass(std::span<cplx> frame, const FiberParams& fiber, double fs, int sign) {
  if (fiber.z_km == 0.0) return;
  const Fft fft(frame.size());
  fft.forward(frame);
  const double k = cd_phase_coefficient(fiber) * sign;
  for (std::size_t i = 0; i < frame.size(); ++i) {
    const double f = bin_frequency(i, frame.size(), fs);
    frame[i] *= std::polar(1.0, k * f * f);
  }
  fft.inverse_scaled(frame);
}

std::string to_string(CdcScheme s) {
  switch (s) {
    case CdcScheme::kFnt: return "fnt";
    case CdcScheme::kFdFloat: return "fd-float";
    case CdcScheme::kTdFloat: return "td-float";
  }
  return "?";
}

CdcScheme cdc_scheme_from_string(const std::string& s) {
  if (s == "fnt") return CdcScheme::kFnt;
  if (s == "fd-float") return CdcScheme::kFdFloat;
  if (s == "td-float") return CdcScheme::kTdFloat;
  throw ConfigError("unknown CDC scheme '" + s + "' (fnt, fd-float, td-float)");
}

namespace {

constexpr std::size_t kBandGrid = 2048;

// Frequencies sampling [-band, band] at bin midpoints.
std::vector<double> band_grid(double band) {
  std::vector<double> f(kBandGrid);
  for (std::size_t g = 0; g < kBandGrid; ++g) {
    f[g] = band * (2.0 * (static_cast<double>(g) + 0.5) / kBandGrid - 1.0);
  }
  return f;
}

cplx fir_response(std::span<const cplx> taps, std::size_t center, double f, double fs) {
  cplx r{};
  for (std::size_t i = 0; i < taps.size(); ++i) {
    const double n = static_cast<double>(i) - static_cast<double>(center);
    r += taps[i] * std::polar(1.0, -2.0 * std::numbers::pi * f * n / fs);
  }
  return r;
}

std::vector<cplx> least_squares_taps(const CdcConfig& config, std::size_t center) {
  const auto f = band_grid(config.design_band_hz);
  const double k = cd_phase_coefficient(config.fiber);
  const auto g = static_cast<Eigen::Index>(f.size());
  const auto l = static_cast<Eigen::Index>(config.n_taps);
  Eigen::MatrixXcd a(g, l);
  Eigen::VectorXcd t(g);
  for (Eigen::Index r = 0; r < g; ++r) {
    const double fr = f[static_cast<std::size_t>(r)];
    t(r) = std::polar(1.0, k * fr * fr);
    for (Eigen::Index c = 0; c < l; ++c) {
      const double n = static_cast<double>(c) - static_cast<double>(center);
      a(r, c) = std::polar(1.0, -2.0 * std::numbers::pi * fr * n / config.fs);
    }
  }
  Eigen::MatrixXcd normal = a.adjoint() * a;
  normal.diagonal().array() += config.ls_regularization * static_cast<double>(g);
  const Eigen::VectorXcd h = normal.ldlt().solve(a.adjoint() * t);
  return {h.data(), h.data() + h.size()};
}

}  // namespace

std::string to_string(CdTapMethod m) {
  return m == CdTapMethod::kLeastSquares ? "least-squares" : "truncated";
}

CdTapMethod cd_tap_method_from_string(const std::string& s) {
  if (s == "truncated") return CdTapMethod::kTruncated;
  if (s == "least-squares") return CdTapMethod::kLeastSquares;
  throw ConfigError("unknown CD tap method '" + s + "' (truncated|least-squares)");
}

CdTapDesign design_cd_taps(const CdcConfig& config) {
  if (config.n_taps == 0) throw std::invalid_argument("design_cd_taps: n_taps must be > 0");
  const bool ls = config.method == CdTapMethod::kLeastSquares;
  if (ls && !(config.design_band_hz > 0)) {
    throw ConfigError("least-squares CD taps need a design band");
  }
  if (ls && !(config.ls_regularization > 0)) {
    throw ConfigError("least-squares regularization must be positive");
  }
  CdTapDesign d;
  d.center = config.n_taps / 2;

  // Sample the compensator on a grid fine enough that its circular impulse
  // response does not wrap onto the extracted window.
  const double support = cd_support_samples(config.fiber, config.fs, config.design_band_hz);
  std::size_t m = 4096;
  while (static_cast<double>(m) < 16.0 * (support + static_cast<double>(config.n_taps))) m *= 2;
  std::vector<cplx> h(m);
  h[0] = 1.0;
  apply_cd_allpass(h, config.fiber, config.fs, +1);
  double total = 1.0;
  if (config.design_band_hz > 0) {
    const Fft fft(m);
    fft.forward(h);
    total = 0;
    for (std::size_t i = 0; i < m; ++i) {
      if (std::abs(bin_frequency(i, m, config.fs)) > config.design_band_hz) h[i] = 0;
    }
    fft.inverse_scaled(h);
    for (const auto& v : h) total += std::norm(v);
  }

  d.taps.resize(config.n_taps);
  double energy = 0;
  for (std::size_t i = 0; i < config.n_taps; ++i) {
    const auto offset = static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(d.center);
    const std::size_t idx = static_cast<std::size_t>((offset + static_cast<std::ptrdiff_t>(m)) %
                                                     static_cast<std::ptrdiff_t>(m));
    d.taps[i] = h[idx];
    energy += std::norm(h[idx]);
  }
  energy /= total;
  d.support_energy = energy;
  if (ls) d.taps = least_squares_taps(config, d.center);
  double e = 0;
  for (const auto& t : d.taps) e += std::norm(t);
  const double g = 1.0 / std::sqrt(e);
  for (auto& t : d.taps) t *= g;

  // gain-matched in-band error of the final taps
  const double band = config.design_band_hz > 0 ? config.design_band_hz : config.fs / 2;
  const double k = cd_phase_coefficient(config.fiber);
  cplx rt{};
  double rr = 0;
  std::vector<cplx> resp(kBandGrid), tgt(kBandGrid);
  const auto grid = band_grid(band);
  for (std::size_t i = 0; i < kBandGrid; ++i) {
    resp[i] = fir_response(d.taps, d.center, grid[i], config.fs);
    tgt[i] = std::polar(1.0, k * grid[i] * grid[i]);
    rt += std::conj(resp[i]) * tgt[i];
    rr += std::norm(resp[i]);
  }
  const cplx gain = rr > 0 ? rt / rr : cplx{};
  double err = 0;
  for (std::size_t i = 0; i < kBandGrid; ++i) err += std::norm(gain * resp[i] - tgt[i]);
  d.inband_error_db = 10 * std::log10(std::max(err / kBandGrid, 1e-30));

  if (ls) {
    if (d.inband_error_db > -20) {
      d.short_support = true;
      std::ostringstream os;
      os << config.n_taps << " least-squares taps reach only " << std::round(d.inband_error_db)
         << " dB in-band error";
      d.warning = os.str();
    }
  } else if (energy < 0.9) {
    d.short_support = true;
    std::ostringstream os;
    os << config.n_taps << " taps capture " << std::round(energy * 1000) / 10
       << "% of the dispersion response energy (support ~" << std::round(support)
       << " samples)";
    d.warning = os.str();
  }
  return d;
}

std::vector<std::int64_t> QuantizedTaps::magnitudes() const {
  std::vector<std::int64_t> m(re.size());
  for (std::size_t i = 0; i < re.size(); ++i) {
    m[i] = std::max(std::abs(std::int64_t{re[i]}), std::abs(std::int64_t{im[i]}));
  }
  return m;
}

QuantizedTaps quantize_taps(std::span<const cplx> taps, int bits, std::size_t center) {
  double peak = 0;
  for (const auto& t : taps) peak = std::max({peak, std::abs(t.real()), std::abs(t.imag())});
  if (peak == 0) throw std::invalid_argument("quantize_taps: all-zero taps");
  QuantizedTaps q;
  const double max_level = static_cast<double>((1 << (bits - 1)) - 1);
  q.spec = QuantSpec::make(bits, max_level / peak);
  q.center = center;
  const QuantizedBlock b = quantize(taps, q.spec);
  q.re = b.re;
  q.im = b.im;
  return q;
}

std::vector<cplx> dequantize(const QuantizedTaps& taps) {
  std::vector<cplx> out(taps.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = cplx(taps.re[i], taps.im[i]) / taps.spec.scale;
  }
  return out;
}

void write_taps(std::ostream& os, const QuantizedTaps& taps) {
  os.precision(17);
  os << "# bits=" << taps.spec.bit_width << " scale=" << taps.spec.scale
     << " center=" << taps.center << "\n";
  for (std::size_t i = 0; i < taps.size(); ++i) os << taps.re[i] << " " << taps.im[i] << "\n";
}

QuantizedTaps read_taps(std::istream& is) {
  QuantizedTaps q;
  std::string line;
  bool have_header = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string kv;
      int bits = 0;
      double scale = 0;
      while (hs >> kv) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = kv.substr(0, eq);
        const std::string val = kv.substr(eq + 1);
        if (key == "bits") bits = std::stoi(val);
        if (key == "scale") scale = std::stod(val);
        if (key == "center") q.center = std::stoul(val);
      }
      q.spec = QuantSpec::make(bits, scale);
      have_header = true;
      continue;
    }
    std::istringstream ls(line);
    std::int32_t re = 0;
    std::int32_t im = 0;
    if (!(ls >> re >> im)) throw ConfigError("malformed tap line: '" + line + "'");
    if (std::abs(re) > q.spec.max_level() || std::abs(im) > q.spec.max_level()) {
      throw RangeError("tap (" + std::to_string(re) + ", " + std::to_string(im) +
                       ") exceeds the " + std::to_string(q.spec.bit_width) + "-bit grid");
    }
    q.re.push_back(re);
    q.im.push_back(im);
  }
  if (!have_header) throw ConfigError("tap file is missing its '# bits=... scale=...' header");
  return q;
}

CdcEngine::CdcEngine(QuantizedTaps taps, QuantSpec sig_spec, TransformPlan plan)
    : plan_(std::move(plan)),
      taps_(std::move(taps)),
      sig_spec_(sig_spec),
      budget_(check_overflow(taps_.magnitudes(), sig_spec_, plan_.params(), ConvKind::kComplex)),
      conv_([this] {
        if (taps_.size() > plan_.size() / 2 + 1) {
          throw std::invalid_argument("CDC: " + std::to_string(taps_.size()) +
                                      " taps exceed the overlap-save limit N/2+1 = " +
                                      std::to_string(plan_.size() / 2 + 1));
        }
        if (!budget_.pass) {
          throw BudgetError("CDC overflow budget violated before streaming: " +
                            budget_.describe());
        }
        const FermatRing& ring = plan_.ring();
        FermatVector h_re(plan_.size()), h_im(plan_.size());
        for (std::size_t i = 0; i < taps_.size(); ++i) {
          h_re[i] = ring.encode_signed(taps_.re[i]);
          h_im[i] = ring.encode_signed(taps_.im[i]);
        }
        return ComplexConvolver(plan_, h_re, h_im);
      }()),
      win_re_(plan_.size()),
      win_im_(plan_.size()),
      out_re_(plan_.size()),
      out_im_(plan_.size()) {}

void CdcEngine::reset() {
  std::fill(win_re_.begin(), win_re_.end(), Residue{});
  std::fill(win_im_.begin(), win_im_.end(), Residue{});
}

void CdcEngine::process_block(std::span<const std::int32_t> new_re,
                              std::span<const std::int32_t> new_im,
                              std::span<std::int64_t> out_re, std::span<std::int64_t> out_im) {
  const std::size_t h = hop();
  if (new_re.size() != h || new_im.size() != h || out_re.size() != h || out_im.size() != h) {
    throw std::invalid_argument("CDC block: expected " + std::to_string(h) + " samples");
  }
  const FermatRing& ring = plan_.ring();
  const std::int32_t lim = sig_spec_.max_level();
  // Slide: the last half of the previous window becomes the first half.
  std::copy(win_re_.begin() + h, win_re_.end(), win_re_.begin());
  std::copy(win_im_.begin() + h, win_im_.end(), win_im_.begin());
  for (std::size_t i = 0; i < h; ++i) {
    if (std::abs(new_re[i]) > lim || std::abs(new_im[i]) > lim) {
      throw RangeError("CDC input sample exceeds the " + std::to_string(sig_spec_.bit_width) +
                       "-bit signal grid");
    }
    win_re_[h + i] = ring.encode_signed(new_re[i]);
    win_im_[h + i] = ring.encode_signed(new_im[i]);
  }
  conv_.convolve(win_re_, win_im_, out_re_, out_im_);
  for (std::size_t i = 0; i < h; ++i) {
    out_re[i] = ring.decode_signed(out_re_[h + i]);
    out_im[i] = ring.decode_signed(out_im_[h + i]);
  }
}

std::vector<cplx> CdcEngine::process_stream(const QuantizedBlock& in) {
  const std::size_t h = hop();
  const std::size_t n = in.size();
  std::vector<cplx> out(n);
  std::vector<std::int32_t> bre(h), bim(h);
  std::vector<std::int64_t> ore(h), oim(h);
  const double inv = 1.0 / output_scale();
  for (std::size_t pos = 0; pos < n; pos += h) {
    const std::size_t take = std::min(h, n - pos);
    std::fill(bre.begin(), bre.end(), 0);
    std::fill(bim.begin(), bim.end(), 0);
    std::copy_n(in.re.begin() + static_cast<std::ptrdiff_t>(pos), take, bre.begin());
    std::copy_n(in.im.begin() + static_cast<std::ptrdiff_t>(pos), take, bim.begin());
    process_block(bre, bim, ore, oim);
    for (std::size_t i = 0; i < take; ++i) {
      out[pos + i] = cplx(static_cast<double>(ore[i]), static_cast<double>(oim[i])) * inv;
    }
  }
  return out;
}

std::vector<cplx> td_cdc_float(std::span<const cplx> stream, std::span<const cplx> taps) {
  std::vector<cplx> out(stream.size());
  for (std::size_t t = 0; t < stream.size(); ++t) {
    cplx acc{};
    const std::size_t kmax = std::min(taps.size(), t + 1);
    for (std::size_t k = 0; k < kmax; ++k) acc += taps[k] * stream[t - k];
    out[t] = acc;
  }
  complexity::tally(4 * taps.size() * stream.size());
  return out;
}

std::vector<cplx> fd_cdc_float(std::span<const cplx> stream, std::span<const cplx> taps,
                               std::size_t block_n) {
  if (taps.size() > block_n / 2 + 1) {
    throw std::invalid_argument("fd_cdc_float: taps exceed block_n/2 + 1");
  }
  const Fft fft(block_n);
  const std::size_t hop = block_n / 2;
  // Tap spectrum carries the 1/N of the inverse transform.
  std::vector<cplx> hspec(block_n);
  std::copy(taps.begin(), taps.end(), hspec.begin());
  {
    const complexity::SetupScope setup;  // precomputed once, not per block
    fft.forward(hspec);
    for (auto& v : hspec) v /= static_cast<double>(block_n);
  }
  std::vector<cplx> win(block_n), buf(block_n), out(stream.size());
  for (std::size_t pos = 0; pos < stream.size(); pos += hop) {
    std::copy(win.begin() + static_cast<std::ptrdiff_t>(hop), win.end(), win.begin());
    for (std::size_t i = 0; i < hop; ++i) {
      win[hop + i] = pos + i < stream.size() ? stream[pos + i] : cplx{};
    }
    buf = win;
    fft.forward(buf);
    for (std::size_t k = 0; k < block_n; ++k) buf[k] *= hspec[k];
    complexity::tally(4 * block_n);
    fft.inverse(buf);
    for (std::size_t i = 0; i < hop && pos + i < stream.size(); ++i) out[pos + i] = buf[hop + i];
  }
  return out;
}

}  // namespace fntdsp
