// Copyright 2026 The fntdsp Authors
// SPDX-License-Identifier: Apache-2.0

#include "fntdsp/linksim.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <thread>

#include "fntdsp/errors.hpp"
#include "fntdsp/op_counter.hpp"

namespace fntdsp::linksim {

namespace {

constexpr double kPi = std::numbers::pi;

double mean_power(const std::vector<cplx>& v) {
  double p = 0;
  for (const auto& x : v) p += std::norm(x);
  return v.empty() ? 0.0 : p / static_cast<double>(v.size());
}

void scale(std::vector<cplx>& v, double g) {
  for (auto& x : v) x *= g;
}

// Gray code for one rail: 00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3.
constexpr int kLevel[4] = {-3, -1, 3, 1};

unsigned slice_rail(double v) noexcept {
  const double a = v * std::sqrt(10.0);
  if (a < -2) return 0;
  if (a < 0) return 1;
  if (a < 2) return 3;
  return 2;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string to_string(AeqScheme s) { return s == AeqScheme::kFnt ? "fnt" : "td-float"; }

AeqScheme aeq_scheme_from_string(const std::string& s) {
  if (s == "fnt") return AeqScheme::kFnt;
  if (s == "td-float") return AeqScheme::kTdFloat;
  throw ConfigError("unknown AEQ scheme '" + s + "' (fnt, td-float)");
}

std::string Scheme::name() const { return to_string(cdc) + "+" + to_string(aeq); }

Scheme Scheme::parse(const std::string& s) {
  const auto plus = s.find('+');
  if (plus == std::string::npos) {
    throw ConfigError("scheme '" + s + "' must look like <cdc>+<aeq>, e.g. fnt+fnt");
  }
  return Scheme{cdc_scheme_from_string(s.substr(0, plus)),
                aeq_scheme_from_string(s.substr(plus + 1))};
}

Scheme fnt_scheme() { return {CdcScheme::kFnt, AeqScheme::kFnt}; }
Scheme reference_scheme() { return {CdcScheme::kFdFloat, AeqScheme::kTdFloat}; }

CdcConfig LinkConfig::cdc_config(double z_km, CdcScheme scheme) const {
  CdcConfig cc;
  cc.fiber = fiber;
  cc.fiber.z_km = z_km;
  cc.fs = fs();
  cc.n_taps = cdc_taps;
  cc.tap_bits = cdc_tap_bits;
  cc.scheme = scheme;
  cc.design_band_hz = cdc_design_band_hz();
  cc.method = cdc_tap_method;
  cc.ls_regularization = cdc_ls_regularization;
  return cc;
}

double LinkConfig::compensated_km() const {
  if (cdc_z_km) return *cdc_z_km;
  if (cdc_tap_method == CdTapMethod::kLeastSquares) {
    const auto error_at = [&](double z) {
      const complexity::SetupScope untallied;
      return design_cd_taps(cdc_config(z, CdcScheme::kFdFloat)).inband_error_db;
    };
    if (fiber.z_km <= 0 || error_at(fiber.z_km) <= cdc_ls_target_db) return fiber.z_km;
    // the fit error grows with length; bisect to 0.1 km
    double lo = 0, hi = fiber.z_km;
    while (hi - lo > 0.1) {
      const double mid = (lo + hi) / 2;
      (error_at(mid) <= cdc_ls_target_db ? lo : hi) = mid;
    }
    return std::round(lo * 10) / 10;
  }
  return std::min(fiber.z_km,
                  cd_fit_length_km(fiber, fs(), cdc_taps, cdc_fit_fill, cdc_design_band_hz()));
}

void LinkConfig::validate() const {
  if (!std::has_single_bit(n_symbols) || n_symbols < 1024) {
    throw ConfigError("n_symbols must be a power of two >= 1024");
  }
  if (!(baud > 0)) throw ConfigError("baud must be positive");
  if (!(rolloff >= 0 && rolloff <= 1)) throw ConfigError("rolloff must be in [0, 1]");
  if (discard_symbols + 4096 + 64 > n_symbols) {
    throw ConfigError("discard_symbols leaves fewer than 4096 symbols to count");
  }
  if (snr_db.empty()) throw ConfigError("snr_db list is empty");
  if (cdc_taps == 0 || cdc_taps > 33) throw ConfigError("cdc taps must be in [1, 33]");
  if (signal_bits < 2 || cdc_tap_bits < 2) throw ConfigError("bit widths must be >= 2");
  if (!(cdc_full_scale_rms > 0) || !(aeq_full_scale_rms > 0)) {
    throw ConfigError("quantizer full scale must be positive");
  }
  if (!(aeq_mu >= 0)) throw ConfigError("aeq mu must be >= 0");
  if (cr_window < 64) throw ConfigError("carrier recovery window must be >= 64 symbols");
  if (cdc_z_km && *cdc_z_km < 0) throw ConfigError("cdc z_km must be >= 0");
  if (cdc_tap_method == CdTapMethod::kLeastSquares && !cdc_signal_band) {
    throw ConfigError("least-squares CDC taps need cdc_signal_band");
  }
  if (!(cdc_ls_regularization > 0)) throw ConfigError("cdc ls regularization must be positive");
}

// ---------------------------------------------------------------------------

cplx qam16_map(unsigned nibble) noexcept {
  const double s = 1.0 / std::sqrt(10.0);
  return {kLevel[(nibble >> 2) & 3] * s, kLevel[nibble & 3] * s};
}

unsigned qam16_slice(cplx y) noexcept {
  return (slice_rail(y.real()) << 2) | slice_rail(y.imag());
}

double rrc_response(double f, double baud, double rolloff) noexcept {
  const double af = std::abs(f);
  const double f1 = (1 - rolloff) * baud / 2;
  const double f2 = (1 + rolloff) * baud / 2;
  if (af <= f1) return 1.0;
  if (af > f2) return 0.0;
  return std::sqrt(0.5 * (1 + std::cos(kPi / (rolloff * baud) * (af - f1))));
}

namespace {

void apply_rrc(std::vector<cplx>& v, double baud, double fs, double rolloff) {
  const Fft fft(v.size());
  fft.forward(v);
  for (std::size_t k = 0; k < v.size(); ++k) {
    v[k] *= rrc_response(bin_frequency(k, v.size(), fs), baud, rolloff);
  }
  fft.inverse_scaled(v);
}

// Quantizer whose full scale is `multiple` times the per-rail RMS; falls
// back to unit scale for an all-zero input.
QuantSpec agc_spec(int bits, double rail_rms, double multiple) {
  const double max_level = static_cast<double>((1 << (bits - 1)) - 1);
  return QuantSpec::make(bits, rail_rms > 0 ? max_level / (multiple * rail_rms) : 1.0);
}

// Ideal low-pass at the signal band edge; ahead of 2:1 decimation it stops
// out-of-band quantization noise from folding into the symbol band.
void antialias(std::vector<cplx>& v, double baud, double fs, double rolloff) {
  const Fft fft(v.size());
  fft.forward(v);
  const double edge = (1 + rolloff) * baud / 2;  // LinkConfig::signal_band_hz
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (std::abs(bin_frequency(k, v.size(), fs)) > edge) v[k] = 0;
  }
  fft.inverse_scaled(v);
}

}  // namespace

TxFrame generate_tx(const LinkConfig& config) {
  const complexity::SetupScope untallied;
  TxFrame tx;
  std::mt19937_64 rng(config.seed);
  std::uniform_int_distribution<unsigned> nib(0, 15);
  const std::size_t n = config.n_symbols;
  for (int p = 0; p < kPols; ++p) {
    tx.nibbles[p].resize(n);
    tx.symbols[p].resize(n);
    for (std::size_t m = 0; m < n; ++m) {
      tx.nibbles[p][m] = static_cast<std::uint8_t>(nib(rng));
      tx.symbols[p][m] = qam16_map(tx.nibbles[p][m]);
    }
  }
  for (int p = 0; p < kPols; ++p) {
    auto& w = tx.wave[p];
    w.assign(2 * n, cplx{});
    for (std::size_t m = 0; m < n; ++m) w[2 * m] = tx.symbols[p][m];
    apply_rrc(w, config.baud, config.fs(), config.rolloff);
    scale(w, 1.0 / std::sqrt(mean_power(w)));
  }
  return tx;
}

PolArray<std::vector<cplx>> apply_impairments(const PolArray<std::vector<cplx>>& wave,
                                              const LinkConfig& config) {
  const complexity::SetupScope untallied;
  PolArray<std::vector<cplx>> out = wave;
  const std::size_t n = out[0].size();
  const Fft fft(n);
  const double fs = config.fs();
  const double k_cd = -cd_phase_coefficient(config.fiber);
  const double tau = config.dgd_symbols / config.baud;
  // CD and a symmetric differential group delay in one pass
  for (int p = 0; p < kPols; ++p) {
    auto& v = out[p];
    fft.forward(v);
    const double half = (p == 0 ? -0.5 : 0.5) * tau;
    for (std::size_t k = 0; k < n; ++k) {
      const double f = bin_frequency(k, n, fs);
      v[k] *= std::polar(1.0, k_cd * f * f - 2 * kPi * f * half);
    }
    fft.inverse_scaled(v);
  }
  // polarization rotation
  const double th = config.pol_rotation_deg * kPi / 180;
  const double c = std::cos(th), s = std::sin(th);
  for (std::size_t i = 0; i < n; ++i) {
    const cplx x = out[0][i], y = out[1][i];
    out[0][i] = c * x - s * y;
    out[1][i] = s * x + c * y;
  }
  // receiver IQ skew (Q rail delayed) and quadrature error
  const double phi = config.iq_phase_deg * kPi / 180;
  for (int p = 0; p < kPols; ++p) {
    auto& v = out[p];
    std::vector<cplx> q(n);
    for (std::size_t i = 0; i < n; ++i) q[i] = v[i].imag();
    if (config.iq_skew_samples != 0.0) {
      fft.forward(q);
      for (std::size_t k = 0; k < n; ++k) {
        const double f = bin_frequency(k, n, 1.0);
        q[k] *= std::polar(1.0, -2 * kPi * f * config.iq_skew_samples);
      }
      fft.inverse_scaled(q);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double in_i = v[i].real();
      v[i] = {in_i, q[i].real() * std::cos(phi) + in_i * std::sin(phi)};
    }
  }
  return out;
}

void add_awgn(PolArray<std::vector<cplx>>& wave, double snr_db, double baud, double fs,
              std::uint64_t seed) {
  std::seed_seq sseq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                     0x6e6f6973u};
  std::mt19937_64 rng(sseq);
  std::normal_distribution<double> g(0.0, 1.0);
  const double snr = std::pow(10.0, snr_db / 10);
  for (auto& v : wave) {
    // Es/N0 with the noise measured over the full sampling bandwidth
    const double sigma2 = mean_power(v) * (fs / baud) / snr;
    const double sd = std::sqrt(sigma2 / 2);
    for (auto& x : v) x += cplx(g(rng) * sd, g(rng) * sd);
  }
}

PolArray<std::vector<cplx>> apply_channel(const TxFrame& tx, const LinkConfig& config,
                                          double snr_db, std::uint64_t noise_seed) {
  auto rx = apply_impairments(tx.wave, config);
  if (std::isfinite(snr_db)) add_awgn(rx, snr_db, config.baud, config.fs(), noise_seed);
  return rx;
}

void gsop(std::vector<cplx>& pol) {
  double pi = 0, pq = 0, piq = 0;
  for (const auto& x : pol) {
    pi += x.real() * x.real();
    pq += x.imag() * x.imag();
    piq += x.real() * x.imag();
  }
  if (pi == 0) return;
  const double rho = piq / pi;
  double pq2 = 0;
  for (auto& x : pol) {
    const double q = x.imag() - rho * x.real();
    x.imag(q);
    pq2 += q * q;
  }
  const double target = (pi + pq) / 2;
  const double gi = std::sqrt(target / pi);
  const double gq = pq2 > 0 ? std::sqrt(target / pq2) : 0.0;
  for (auto& x : pol) x = {x.real() * gi, x.imag() * gq};
}

void matched_filter(std::vector<cplx>& pol, double baud, double fs, double rolloff) {
  apply_rrc(pol, baud, fs, rolloff);
}

PolArray<std::vector<cplx>> rx_condition(PolArray<std::vector<cplx>> rx,
                                         const LinkConfig& config) {
  const complexity::SetupScope untallied;
  for (auto& pol : rx) {
    gsop(pol);
    matched_filter(pol, config.baud, config.fs(), config.rolloff);
  }
  return rx;
}

// ---------------------------------------------------------------------------

FrontendOutput rx_frontend(const PolArray<std::vector<cplx>>& filtered, const LinkConfig& config,
                           CdcScheme scheme) {
  FrontendOutput out;
  const std::size_t n = filtered[0].size();

  const CdcConfig cc = config.cdc_config(config.compensated_km(), scheme);
  CdTapDesign design;
  QuantizedTaps qtaps;
  {
    const complexity::SetupScope setup;
    design = design_cd_taps(cc);
    if (scheme == CdcScheme::kFnt) qtaps = quantize_taps(design.taps, cc.tap_bits, design.center);
  }
  const std::size_t pre = cc.n_taps;
  const std::size_t center = design.center;

  PolArray<std::vector<cplx>> cdc_out;
  std::uint64_t mults = 0;
  for (int p = 0; p < kPols; ++p) {
    const auto& x = filtered[p];
    // cyclic extension so the streaming filter reproduces the circular frame
    std::vector<cplx> ext;
    ext.reserve(n + pre + center);
    ext.insert(ext.end(), x.end() - static_cast<std::ptrdiff_t>(pre), x.end());
    ext.insert(ext.end(), x.begin(), x.end());
    ext.insert(ext.end(), x.begin(), x.begin() + static_cast<std::ptrdiff_t>(center));

    const double p_in = mean_power(x);
    std::vector<cplx> y;
    StageReport q_report{"quantize-cdc-in/" + std::string(p == 0 ? "X" : "Y"), p_in, p_in, 0};
    if (scheme == CdcScheme::kFnt) {
      const QuantSpec sig =
          agc_spec(config.signal_bits, std::sqrt(p_in / 2), config.cdc_full_scale_rms);
      const QuantizedBlock qb = quantize(ext, sig);
      q_report.clips = qb.clip_count;
      double pq = 0;
      for (std::size_t i = pre; i < pre + n; ++i) {
        pq += std::norm(cplx(qb.re[i], qb.im[i]) / sig.scale);
      }
      q_report.power_out = pq / static_cast<double>(n);
      out.stages.push_back(q_report);
      std::optional<CdcEngine> eng;
      {
        const complexity::SetupScope setup;
        eng.emplace(qtaps, sig);
      }
      const complexity::ScopedTally tally;
      y = eng->process_stream(qb);
      mults += tally.count();
    } else {
      const complexity::ScopedTally tally;
      y = scheme == CdcScheme::kFdFloat ? fd_cdc_float(ext, design.taps, 64)
                                        : td_cdc_float(ext, design.taps);
      mults += tally.count();
    }
    cdc_out[p].assign(y.begin() + static_cast<std::ptrdiff_t>(pre + center),
                      y.begin() + static_cast<std::ptrdiff_t>(pre + center + n));
    out.stages.push_back({"cdc-" + to_string(scheme) + "/" + (p == 0 ? "X" : "Y"), p_in,
                          mean_power(cdc_out[p]), 0});
  }
  out.cdc_mults = mults;

  if (config.antialias) {
    const complexity::SetupScope untallied;
    for (auto& pol : cdc_out) antialias(pol, config.baud, config.fs(), config.rolloff);
  }

  // best decimation phase by power
  double pw[2] = {0, 0};
  for (int p = 0; p < kPols; ++p)
    for (std::size_t i = 0; i < n; ++i) pw[i & 1] += std::norm(cdc_out[p][i]);
  out.phase = pw[1] > pw[0] ? 1 : 0;
  for (int p = 0; p < kPols; ++p) {
    auto& s = out.symbols[p];
    s.resize(n / 2);
    for (std::size_t m = 0; m < n / 2; ++m) s[m] = cdc_out[p][2 * m + out.phase];
    const double ps = mean_power(s);
    if (ps > 0) scale(s, 1.0 / std::sqrt(ps));
    out.stages.push_back({"decimate/" + std::string(p == 0 ? "X" : "Y"), mean_power(cdc_out[p]),
                          ps, 0});
  }
  return out;
}

// ---------------------------------------------------------------------------

CarrierEstimate carrier_recovery(std::vector<cplx>& symbols, std::size_t window) {
  CarrierEstimate est;
  const std::size_t n = symbols.size();
  std::size_t start = 0;
  while (start < n) {
    std::size_t end = std::min(n, start + window);
    if (n - end < window / 2) end = n;  // fold a short tail into this window
    cplx s4{};
    double pw = 0;
    for (std::size_t i = start; i < end; ++i) {
      const cplx y2 = symbols[i] * symbols[i];
      s4 += y2 * y2;
      pw += std::norm(symbols[i]);
    }
    double phase = std::arg(-s4) / 4;
    double gain = std::sqrt(pw / static_cast<double>(end - start));
    if (!(gain > 0)) gain = 1;
    for (int it = 0; it < 4; ++it) {
      const cplx rot = std::polar(1.0 / gain, -phase);
      cplx c{};
      double dd = 0;
      for (std::size_t i = start; i < end; ++i) {
        const cplx d = qam16_map(qam16_slice(symbols[i] * rot));
        c += symbols[i] * std::conj(d);
        dd += std::norm(d);
      }
      phase = std::arg(c);
      gain = std::abs(c) / dd;
    }
    const cplx corr = std::polar(1.0 / gain, -phase);
    for (std::size_t i = start; i < end; ++i) symbols[i] *= corr;
    est.phase_rad.push_back(phase);
    est.gain.push_back(gain);
    start = end;
  }
  return est;
}

RailAlignment align_rail(const std::vector<double>& out,
                         const RailArray<std::vector<double>>& tx_rails, std::size_t from,
                         std::size_t count, std::ptrdiff_t max_lag) {
  RailAlignment best;
  best.correlation = -1;
  const auto n = static_cast<std::ptrdiff_t>(tx_rails[0].size());
  double po = 0;
  for (std::size_t m = from; m < from + count; ++m) po += out[m] * out[m];
  for (int src = 0; src < kRails; ++src) {
    const auto& s = tx_rails[src];
    for (std::ptrdiff_t lag = -max_lag; lag <= max_lag; ++lag) {
      double c = 0, ps = 0;
      for (std::size_t m = from; m < from + count; ++m) {
        const auto idx = static_cast<std::size_t>(((static_cast<std::ptrdiff_t>(m) - lag) % n + n) % n);
        c += out[m] * s[idx];
        ps += s[idx] * s[idx];
      }
      const double r = std::abs(c) / std::sqrt(po * ps);
      if (r > best.correlation) {
        best = {src, c < 0 ? -1 : 1, lag, r};
      }
    }
  }
  return best;
}

double q_factor_db(double ber) {
  if (ber <= 0) return std::numeric_limits<double>::infinity();
  if (ber >= 0.5) return -std::numeric_limits<double>::infinity();
  // solve 0.5 erfc(q / sqrt 2) = ber by bisection
  double lo = 0, hi = 40;
  for (int i = 0; i < 200; ++i) {
    const double mid = (lo + hi) / 2;
    (0.5 * std::erfc(mid / std::numbers::sqrt2) > ber ? lo : hi) = mid;
  }
  return 20 * std::log10((lo + hi) / 2);
}

// ---------------------------------------------------------------------------

namespace {

bool trace_converged(const std::vector<double>& trace) {
  if (trace.size() < 8) return true;
  const std::size_t head_n = std::max<std::size_t>(1, trace.size() / 20);
  const std::size_t tail_n = trace.size() / 4;
  double head = 0, tail = 0;
  for (std::size_t i = 0; i < head_n; ++i) head += trace[i];
  for (std::size_t i = trace.size() - tail_n; i < trace.size(); ++i) tail += trace[i];
  head /= static_cast<double>(head_n);
  tail /= static_cast<double>(tail_n);
  return std::isfinite(tail) && tail <= 1.05 * head + 1e-3;
}

std::uint64_t noise_seed(std::uint64_t seed, std::size_t snr_index) {
  std::seed_seq s{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                  static_cast<std::uint32_t>(snr_index), 0x736e72u};
  std::uint64_t v[1];
  std::uint32_t w[2];
  s.generate(w, w + 2);
  v[0] = (std::uint64_t{w[0]} << 32) | w[1];
  return v[0];
}

Metrics run_scheme(const LinkConfig& config, const TxFrame& tx, const FrontendOutput& fe,
                   const Scheme& scheme, double snr_db) {
  Metrics m;
  m.scheme = scheme.name();
  m.snr_db = snr_db;
  m.stages = fe.stages;
  const std::size_t n = config.n_symbols;
  // the CDC runs at 2 Sa/symbol; count per dual-polarization output sample
  m.cdc_mults_per_symbol = static_cast<double>(fe.cdc_mults) / static_cast<double>(2 * n);

  RailArray<std::vector<double>> rails;
  for (int p = 0; p < kPols; ++p) {
    rails[2 * p].resize(n);
    rails[2 * p + 1].resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      rails[2 * p][i] = fe.symbols[p][i].real();
      rails[2 * p + 1][i] = fe.symbols[p][i].imag();
    }
  }

  AeqConfig ac;
  ac.mu = config.aeq_mu;
  RailArray<std::vector<double>> y;
  std::vector<double> trace;
  std::uint64_t aeq_mults = 0;
  if (scheme.aeq == AeqScheme::kFnt) {
    double p = 0;
    for (const auto& r : rails)
      for (double v : r) p += v * v;
    const double rms = std::sqrt(p / (4.0 * static_cast<double>(n)));
    ac.sig_spec = agc_spec(config.signal_bits, rms, config.aeq_full_scale_rms);
    RailArray<std::vector<std::int32_t>> q;
    std::size_t clips = 0;
    double pq = 0;
    for (int r = 0; r < kRails; ++r) {
      QuantizedReal qr = quantize(rails[r], ac.sig_spec);
      clips += qr.clip_count;
      for (auto v : qr.values) pq += std::pow(v / ac.sig_spec.scale, 2);
      q[r] = std::move(qr.values);
    }
    m.stages.push_back({"quantize-aeq-in", 2 * rms * rms, pq / (2.0 * static_cast<double>(n)),
                        clips});
    std::optional<FntAeq> eq;
    {
      const complexity::SetupScope setup;
      eq.emplace(ac);
    }
    const complexity::ScopedTally tally;
    y = eq->process(q, config.aeq_mu > 0);
    aeq_mults = tally.count();
    trace = eq->error_trace();
    if (eq->saturations() > 0) {
      m.note += "tap saturations: " + std::to_string(eq->saturations()) + "; ";
    }
  } else {
    TdAeqFloat eq(ac);
    const complexity::ScopedTally tally;
    y = eq.process(rails, config.aeq_mu > 0);
    aeq_mults = tally.count();
    trace = eq.error_trace();
  }
  m.aeq_mults_per_symbol = static_cast<double>(aeq_mults) / static_cast<double>(n);
  m.converged = trace_converged(trace);
  if (!m.converged) m.note += "AEQ error trace did not decrease; ";

  const std::size_t from = config.discard_symbols;
  const std::ptrdiff_t max_lag = 32;
  const std::size_t to = n - static_cast<std::size_t>(max_lag);
  RailArray<std::vector<double>> tx_rails;
  for (int p = 0; p < kPols; ++p) {
    tx_rails[2 * p].resize(n);
    tx_rails[2 * p + 1].resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      tx_rails[2 * p][i] = tx.symbols[p][i].real();
      tx_rails[2 * p + 1][i] = tx.symbols[p][i].imag();
    }
  }
  RailArray<std::vector<double>> out;
  for (int p = 0; p < kPols; ++p) {
    std::vector<cplx> tail(n - from);
    for (std::size_t i = from; i < n; ++i) tail[i - from] = {y[2 * p][i], y[2 * p + 1][i]};
    carrier_recovery(tail, config.cr_window);
    out[2 * p].assign(n, 0.0);
    out[2 * p + 1].assign(n, 0.0);
    for (std::size_t i = from; i < n; ++i) {
      out[2 * p][i] = tail[i - from].real();
      out[2 * p + 1][i] = tail[i - from].imag();
    }
  }
  double err_pow = 0;
  unsigned used = 0;
  for (int r = 0; r < kRails; ++r) {
    const RailAlignment al =
        align_rail(out[r], tx_rails, from, std::min<std::size_t>(4096, to - from), max_lag);
    if (used & (1u << al.source)) {
      m.converged = false;
      m.note += std::string("rail ") + rail_name(r) + " duplicates source " +
                rail_name(al.source) + "; ";
    }
    used |= 1u << al.source;
    const auto& src = tx_rails[al.source];
    for (std::size_t i = from; i < to; ++i) {
      const auto idx = static_cast<std::size_t>(
          ((static_cast<std::ptrdiff_t>(i) - al.lag) % static_cast<std::ptrdiff_t>(n) +
           static_cast<std::ptrdiff_t>(n)) %
          static_cast<std::ptrdiff_t>(n));
      const double v = al.sign * out[r][i];
      m.errors += static_cast<unsigned>(std::popcount(slice_rail(v) ^ slice_rail(src[idx])));
      m.bits += 2;
      err_pow += (v - src[idx]) * (v - src[idx]);
    }
  }
  m.ber = static_cast<double>(m.errors) / static_cast<double>(m.bits);
  const double evm2 = err_pow / (static_cast<double>(m.bits) / 4);  // unit symbol energy
  m.evm_db = 10 * std::log10(evm2);
  m.est_snr_db = -m.evm_db;
  m.q_factor_db = q_factor_db(m.ber);
  m.penalty_db = std::numeric_limits<double>::quiet_NaN();
  return m;
}

}  // namespace

std::vector<Metrics> run_point(const LinkConfig& config, const TxFrame& tx,
                               const PolArray<std::vector<cplx>>& impaired,
                               const std::vector<Scheme>& schemes, std::size_t snr_index) {
  const double snr = config.snr_db.at(snr_index);
  PolArray<std::vector<cplx>> rx = impaired;
  if (std::isfinite(snr)) {
    add_awgn(rx, snr, config.baud, config.fs(), noise_seed(config.seed, snr_index));
  }
  const auto filtered = rx_condition(std::move(rx), config);

  std::vector<Metrics> out;
  std::optional<FrontendOutput> fe_cache[3];
  for (const Scheme& s : schemes) {
    auto& fe = fe_cache[static_cast<int>(s.cdc)];
    if (!fe) fe = rx_frontend(filtered, config, s.cdc);
    out.push_back(run_scheme(config, tx, *fe, s, snr));
  }
  return out;
}

Metrics run_link(const LinkConfig& config, const Scheme& scheme, double snr_db) {
  LinkConfig c = config;
  c.snr_db = {snr_db};
  c.validate();
  const TxFrame tx = generate_tx(c);
  const auto impaired = apply_impairments(tx.wave, c);
  return run_point(c, tx, impaired, {scheme}, 0).front();
}

std::optional<double> snr_at_ber(const std::vector<double>& snr_db,
                                 const std::vector<double>& ber, double target) {
  std::vector<std::size_t> order(snr_db.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return snr_db[a] < snr_db[b]; });
  const double floor = 1e-9;
  for (std::size_t j = 0; j + 1 < order.size(); ++j) {
    const double b0 = ber[order[j]], b1 = ber[order[j + 1]];
    if (b0 >= target && b1 < target) {
      const double l0 = std::log10(std::max(b0, floor)), l1 = std::log10(std::max(b1, floor));
      const double lt = std::log10(target);
      const double s0 = snr_db[order[j]], s1 = snr_db[order[j + 1]];
      return s0 + (s1 - s0) * (l0 - lt) / (l0 - l1);
    }
  }
  return std::nullopt;
}

SweepResult sweep(const LinkConfig& config, const std::vector<Scheme>& schemes) {
  config.validate();
  if (schemes.empty()) throw ConfigError("no schemes to run");
  const TxFrame tx = generate_tx(config);
  const auto impaired = apply_impairments(tx.wave, config);

  const std::size_t points = config.snr_db.size();
  std::vector<std::vector<Metrics>> results(points);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < points; i = next++) {
      try {
        results[i] = run_point(config, tx, impaired, schemes, i);
      } catch (...) {
        const std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  unsigned nthreads = config.threads ? config.threads : std::thread::hardware_concurrency();
  nthreads = std::clamp<unsigned>(nthreads, 1, static_cast<unsigned>(points));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  SweepResult r;
  for (const auto& s : schemes) r.schemes.push_back(s.name());
  for (std::size_t k = 0; k < schemes.size(); ++k) {
    std::vector<double> snr, ber;
    for (std::size_t i = 0; i < points; ++i) {
      snr.push_back(results[i][k].snr_db);
      ber.push_back(results[i][k].ber);
    }
    r.threshold_snr_db.push_back(snr_at_ber(snr, ber));
  }
  for (std::size_t k = 0; k < schemes.size(); ++k) {
    std::optional<double> pen;
    if (r.threshold_snr_db[k] && r.threshold_snr_db[0]) {
      pen = *r.threshold_snr_db[k] - *r.threshold_snr_db[0];
    }
    r.penalty_db.push_back(pen);
    for (std::size_t i = 0; i < points; ++i) {
      Metrics m = results[i][k];
      m.penalty_db = pen ? *pen : std::numeric_limits<double>::quiet_NaN();
      r.all_converged = r.all_converged && m.converged;
      r.rows.push_back(std::move(m));
    }
  }
  return r;
}

void write_csv(std::ostream& os, const SweepResult& result, const std::string& header_comment) {
  std::size_t start = 0;
  while (start < header_comment.size()) {
    const auto nl = header_comment.find('\n', start);
    const auto end = nl == std::string::npos ? header_comment.size() : nl;
    os << "# " << header_comment.substr(start, end - start) << '\n';
    start = end + 1;
  }
  os << "scheme,snr_db,ber,evm_db,est_snr_db,q_factor,bits,errors,converged,penalty_db\n";
  char buf[512];
  for (const auto& m : result.rows) {
    std::snprintf(buf, sizeof buf, "%s,%.3f,%.6e,%.4f,%.4f,%.4f,%llu,%llu,%d,%.4f\n",
                  m.scheme.c_str(), m.snr_db, m.ber, m.evm_db, m.est_snr_db, m.q_factor_db,
                  static_cast<unsigned long long>(m.bits),
                  static_cast<unsigned long long>(m.errors), m.converged ? 1 : 0, m.penalty_db);
    os << buf;
  }
}

}  // namespace fntdsp::linksim
