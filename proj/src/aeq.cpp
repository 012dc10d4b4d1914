// Copyright 2026 The fntdsp Authors
// SPDX-License-Identifier: Apache-2.0

#include "fntdsp/aeq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "fntdsp/errors.hpp"
#include "fntdsp/fft.hpp"
#include "fntdsp/op_counter.hpp"

namespace fntdsp {

std::vector<double> qam16_radii() {
  return {std::sqrt(2.0 / 10.0), std::sqrt(10.0 / 10.0), std::sqrt(18.0 / 10.0)};
}

double rde_error(double y_i, double y_q, std::span<const double> radii) {
  const double p = y_i * y_i + y_q * y_q;
  const double mod = std::sqrt(p);
  double best = radii.front();
  for (double r : radii) {
    if (std::abs(r - mod) < std::abs(best - mod)) best = r;
  }
  return best * best - p;
}

void AeqConfig::validate() const {
  if (block_n < 4 || (block_n & (block_n - 1)) != 0) {
    throw ConfigError("AEQ block length must be a power of two >= 4");
  }
  if (l_taps != block_n / 2) throw ConfigError("AEQ needs l_taps == block_n / 2");
  if (!(mu >= 0)) throw ConfigError("AEQ step size must be >= 0");
  if (radii.empty() || !std::is_sorted(radii.begin(), radii.end())) {
    throw ConfigError("AEQ radii must be nonempty and ascending");
  }
  if (tap_bits != 2 * group_bits) {
    throw ConfigError("AEQ tap width must be exactly two groups wide");
  }
  if (!(tap_scale > 0)) throw ConfigError("AEQ tap scale must be positive");
  if (cma_symbols > 0 && !(cma_radius > 0)) throw ConfigError("AEQ CMA radius must be positive");
  if (!(cma_mu_scale > 0)) throw ConfigError("AEQ start-up step multiplier must be positive");
  if (!(decorrelation >= 0)) throw ConfigError("AEQ decorrelation gain must be >= 0");
}

std::span<const double> AeqConfig::radii_at(std::size_t symbols) const {
  if (symbols < cma_symbols) return {&cma_radius, 1};
  return radii;
}

OutputDecorrelator::OutputDecorrelator(std::size_t max_lag)
    : lags_(max_lag), corr_(kRails * kRails * (max_lag + 1), 0.0) {
  for (auto& h : hist_) h.assign(max_lag + 1, 0.0);
}

void OutputDecorrelator::push(const RailArray<double>& y) {
  const std::size_t n = lags_ + 1;
  pos_ = (pos_ + 1) % n;
  for (int r = 0; r < kRails; ++r) hist_[r][pos_] = y[r];
  for (int a = 0; a < kRails; ++a) {
    for (int b = 0; b < kRails; ++b) {
      if (a == b) continue;
      double* c = corr_.data() + static_cast<std::size_t>(a * kRails + b) * n;
      for (std::size_t d = 0; d < n; ++d) c[d] += y[b] * hist_[a][(pos_ + n - d) % n];
    }
  }
}

void OutputDecorrelator::apply(std::span<const double> w, double step, std::size_t l,
                               std::span<double> delta) {
  const std::size_t n = lags_ + 1;
  if (step != 0.0) {
    for (int a = 0; a < kRails; ++a) {
      for (int b = 0; b < kRails; ++b) {
        if (a == b) continue;
        // y_b correlated with y_a delayed by d: drop w_a shifted later by d.
        // y_a correlated with y_b delayed by d: drop w_a shifted earlier by d.
        const double* cab = corr_.data() + static_cast<std::size_t>(a * kRails + b) * n;
        const double* cba = corr_.data() + static_cast<std::size_t>(b * kRails + a) * n;
        for (int s1 = 0; s1 < kRails; ++s1) {
          const double* wa = w.data() + static_cast<std::size_t>(s1 * kRails + a) * l;
          double* db = delta.data() + static_cast<std::size_t>(s1 * kRails + b) * l;
          for (std::size_t d = 0; d < n && d < l; ++d) {
            const double g0 = step * cab[d];
            const double g1 = d > 0 ? step * cba[d] : 0.0;
            for (std::size_t k = d; k < l; ++k) db[k] -= g0 * wa[k - d];
            if (g1 != 0.0) {
              for (std::size_t k = 0; k + d < l; ++k) db[k] -= g1 * wa[k + d];
            }
          }
        }
      }
    }
  }
  std::fill(corr_.begin(), corr_.end(), 0.0);
}

// ---------------------------------------------------------------------------

RvMimoTaps::RvMimoTaps(std::size_t l_taps, int tap_bits, int group_bits, double tap_scale)
    : l_taps_(l_taps),
      group_bits_(group_bits),
      tap_scale_(tap_scale),
      max_mag_((std::int32_t{1} << tap_bits) - 1),
      accum_(kRails * kRails * l_taps, 0.0),
      master_(kRails * kRails * l_taps, 0),
      split_(kRails * kRails) {
  for (int s1 = 0; s1 < kRails; ++s1)
    for (int s2 = 0; s2 < kRails; ++s2) resplit(s1, s2);
}

void RvMimoTaps::clear() {
  std::fill(accum_.begin(), accum_.end(), 0.0);
  std::fill(master_.begin(), master_.end(), 0);
  for (int s1 = 0; s1 < kRails; ++s1)
    for (int s2 = 0; s2 < kRails; ++s2) resplit(s1, s2);
  ++version_;
}

void RvMimoTaps::center_spike() {
  clear();
  for (int s = 0; s < kRails; ++s) set(s, s, center(), 1.0);
}

bool RvMimoTaps::requantize(std::size_t i) {
  const double q = std::round(accum_[i] * tap_scale_);
  const double lim = static_cast<double>(max_mag_);
  bool sat = false;
  if (q > lim || q < -lim) {
    sat = true;
    accum_[i] = std::clamp(q, -lim, lim) / tap_scale_;
  }
  master_[i] = static_cast<std::int32_t>(std::clamp(q, -lim, lim));
  return sat;
}

void RvMimoTaps::resplit(int s1, int s2) {
  split_[filter_index(s1, s2)] = split_taps(filter(s1, s2), group_bits_);
}

bool RvMimoTaps::set(int s1, int s2, std::size_t k, double v) {
  const std::size_t i = index(s1, s2, k);
  accum_[i] = v;
  const bool sat = requantize(i);
  resplit(s1, s2);
  ++version_;
  return sat;
}

std::size_t RvMimoTaps::apply_delta(std::span<const double> delta) {
  std::size_t sat = 0;
  for (std::size_t i = 0; i < accum_.size(); ++i) {
    accum_[i] += delta[i];
    sat += requantize(i) ? 1 : 0;
  }
  for (int s1 = 0; s1 < kRails; ++s1)
    for (int s2 = 0; s2 < kRails; ++s2) resplit(s1, s2);
  ++version_;
  return sat;
}

// ---------------------------------------------------------------------------

FntAeq::FntAeq(AeqConfig config)
    : config_((config.validate(), std::move(config))),
      plan_(TransformPlan::make(FermatParams::from_index(4), Residue{2}, config_.block_n)),
      taps_(config_.l_taps, config_.tap_bits, config_.group_bits, config_.tap_scale),
      budget_([this] {
        const std::int64_t group_max = (std::int64_t{1} << config_.group_bits) - 1;
        std::vector<std::int64_t> mags(config_.l_taps, group_max);
        return check_overflow(mags, config_.sig_spec, plan_.params(), ConvKind::kReal);
      }()),
      tap_spectra_(kRails * kRails * 2, FermatVector(config_.block_n)),
      scratch_(config_.block_n),
      delta_(kRails * kRails * config_.l_taps, 0.0),
      decorrelator_(config_.decorrelation_lags) {
  if (!budget_.pass) {
    throw BudgetError("AEQ overflow budget violated before streaming: " + budget_.describe());
  }
  for (int r = 0; r < kRails; ++r) {
    window_[r].assign(config_.block_n, Residue{});
    window_float_[r].assign(config_.block_n, 0.0);
  }
  taps_.center_spike();
}

void FntAeq::refresh_spectra() {
  if (spectra_version_ == taps_.version()) return;
  const FermatRing& ring = plan_.ring();
  for (int s1 = 0; s1 < kRails; ++s1) {
    for (int s2 = 0; s2 < kRails; ++s2) {
      const SplitTaps& st = taps_.split(s1, s2);
      for (int g = 0; g < 2; ++g) {
        FermatVector& spec = tap_spectra_[(s1 * kRails + s2) * 2 + g];
        std::fill(spec.begin(), spec.end(), Residue{});
        const auto& grp = g == 0 ? st.high : st.low;
        for (std::size_t k = 0; k < grp.size(); ++k) spec[k] = ring.encode_signed(grp[k]);
        fnt_inplace(plan_, spec);
      }
    }
  }
  spectra_version_ = taps_.version();
}

AeqBlockOutput FntAeq::equalize_block(const RailArray<std::span<const std::int32_t>>& in) {
  const std::size_t n = config_.block_n;
  const std::size_t h = hop();
  const FermatRing& ring = plan_.ring();
  const std::int32_t lim = config_.sig_spec.max_level();
  const double inv_sig = 1.0 / config_.sig_spec.scale;

  refresh_spectra();

  RailArray<FermatVector> spectra;
  for (int r = 0; r < kRails; ++r) {
    if (in[r].size() != h) {
      throw std::invalid_argument("AEQ block: expected " + std::to_string(h) +
                                  " samples per rail");
    }
    auto& w = window_[r];
    auto& wf = window_float_[r];
    std::copy(w.begin() + static_cast<std::ptrdiff_t>(h), w.end(), w.begin());
    std::copy(wf.begin() + static_cast<std::ptrdiff_t>(h), wf.end(), wf.begin());
    for (std::size_t i = 0; i < h; ++i) {
      if (std::abs(in[r][i]) > lim) {
        throw RangeError("AEQ input sample exceeds the signal grid");
      }
      w[h + i] = ring.encode_signed(in[r][i]);
      wf[h + i] = in[r][i] * inv_sig;
    }
    spectra[r] = fnt(plan_, w);
  }

  AeqBlockOutput out;
  for (int r = 0; r < kRails; ++r) out.raw[r].assign(h, 0);
  const std::int64_t high_weight = std::int64_t{1} << config_.group_bits;
  for (int s1 = 0; s1 < kRails; ++s1) {
    for (int s2 = 0; s2 < kRails; ++s2) {
      for (int g = 0; g < 2; ++g) {
        const FermatVector& tspec = tap_spectra_[(s1 * kRails + s2) * 2 + g];
        for (std::size_t k = 0; k < n; ++k) scratch_[k] = ring.mul(spectra[s1][k], tspec[k]);
        ifnt_inplace(plan_, scratch_);
        const std::int64_t weight = g == 0 ? high_weight : 1;
        for (std::size_t i = 0; i < h; ++i) {
          out.raw[s2][i] += weight * ring.decode_signed(scratch_[h + i]);
        }
      }
    }
  }
  const double inv = 1.0 / (config_.sig_spec.scale * config_.tap_scale);
  for (int r = 0; r < kRails; ++r) {
    out.y[r].resize(h);
    for (std::size_t i = 0; i < h; ++i) out.y[r][i] = static_cast<double>(out.raw[r][i]) * inv;
  }
  symbols_ += h;
  return out;
}

std::size_t FntAeq::update_taps(const AeqBlockOutput& out) {
  const std::size_t h = hop();
  const std::size_t l = config_.l_taps;
  std::fill(delta_.begin(), delta_.end(), 0.0);
  const auto radii = config_.radii_at(symbols_ - h);
  const double mu = config_.mu_at(symbols_ - h);
  double err_sum = 0;
  for (std::size_t m = 0; m < h; ++m) {
    const double ex = rde_error(out.y[kXI][m], out.y[kXQ][m], radii);
    const double ey = rde_error(out.y[kYI][m], out.y[kYQ][m], radii);
    err_sum += std::abs(ex) + std::abs(ey);
    const RailArray<double> e = {ex, ex, ey, ey};
    decorrelator_.push({out.y[kXI][m], out.y[kXQ][m], out.y[kYI][m], out.y[kYQ][m]});
    const std::size_t n = h + m;  // window index of output m
    for (int s2 = 0; s2 < kRails; ++s2) {
      const double g = mu * e[s2] * out.y[s2][m];
      if (g == 0.0) continue;
      for (int s1 = 0; s1 < kRails; ++s1) {
        const auto& x = window_float_[s1];
        double* d = delta_.data() + static_cast<std::size_t>(s1 * kRails + s2) * l;
        for (std::size_t k = 0; k < l; ++k) d[k] += g * x[n - k];
      }
    }
  }
  decorrelator_.apply(taps_.values(), mu * config_.decorrelation_at(symbols_ - h), l, delta_);
  error_trace_.push_back(err_sum / (2.0 * static_cast<double>(h)));
  const std::size_t sat = taps_.apply_delta(delta_);
  saturations_ += sat;
  return sat;
}

RailArray<std::vector<double>> FntAeq::process(const RailArray<std::vector<std::int32_t>>& rails,
                                               bool adapt) {
  const std::size_t h = hop();
  const std::size_t len = rails[0].size();
  for (const auto& r : rails) {
    if (r.size() != len || len % h != 0) {
      throw std::invalid_argument("AEQ rails must have equal length, a multiple of " +
                                  std::to_string(h));
    }
  }
  RailArray<std::vector<double>> out;
  for (auto& o : out) o.resize(len);
  for (std::size_t pos = 0; pos < len; pos += h) {
    RailArray<std::span<const std::int32_t>> blk;
    for (int r = 0; r < kRails; ++r) blk[r] = std::span(rails[r]).subspan(pos, h);
    AeqBlockOutput y = equalize_block(blk);
    for (int r = 0; r < kRails; ++r) {
      std::copy(y.y[r].begin(), y.y[r].end(), out[r].begin() + static_cast<std::ptrdiff_t>(pos));
    }
    if (adapt) update_taps(y);
  }
  return out;
}

const char* rail_name(int rail) {
  static const char* const kNames[] = {"XI", "XQ", "YI", "YQ"};
  return rail >= 0 && rail < kRails ? kNames[rail] : "?";
}

void write_taps_csv(std::ostream& os, const RvMimoTaps& taps) {
  os << "in,out,k,value,quantized\n";
  for (int s1 = 0; s1 < kRails; ++s1)
    for (int s2 = 0; s2 < kRails; ++s2)
      for (std::size_t k = 0; k < taps.l_taps(); ++k) {
        os << rail_name(s1) << ',' << rail_name(s2) << ',' << k << ','
           << taps.quantized(s1, s2, k) / taps.tap_scale() << ',' << taps.quantized(s1, s2, k)
           << '\n';
      }
}

void write_error_trace_csv(std::ostream& os, std::span<const double> trace) {
  os << "block,mean_abs_error\n";
  for (std::size_t i = 0; i < trace.size(); ++i) os << i << ',' << trace[i] << '\n';
}

// ---------------------------------------------------------------------------

TdAeqFloat::TdAeqFloat(AeqConfig config)
    : config_((config.validate(), std::move(config))),
      w_(kRails * kRails * config_.l_taps, 0.0),
      delta_(w_.size(), 0.0),
      decorrelator_(config_.decorrelation_lags) {
  for (auto& h : hist_) h.assign(config_.l_taps, 0.0);
  for (int s = 0; s < kRails; ++s) {
    w_[static_cast<std::size_t>(s * kRails + s) * config_.l_taps + config_.l_taps / 2] = 1.0;
  }
}

TdAeqFloat::TdAeqFloat(AeqConfig config, const RvMimoTaps& taps) : TdAeqFloat(std::move(config)) {
  for (int s1 = 0; s1 < kRails; ++s1)
    for (int s2 = 0; s2 < kRails; ++s2)
      for (std::size_t k = 0; k < config_.l_taps; ++k) {
        w_[static_cast<std::size_t>(s1 * kRails + s2) * config_.l_taps + k] =
            taps.quantized(s1, s2, k) / taps.tap_scale();
      }
}

RailArray<double> TdAeqFloat::step(const RailArray<double>& x, bool adapt) {
  const std::size_t l = config_.l_taps;
  pos_ = (pos_ + 1) % l;
  for (int r = 0; r < kRails; ++r) hist_[r][pos_] = x[r];

  RailArray<double> y{};
  for (int s1 = 0; s1 < kRails; ++s1) {
    const auto& hx = hist_[s1];
    for (int s2 = 0; s2 < kRails; ++s2) {
      const double* w = w_.data() + static_cast<std::size_t>(s1 * kRails + s2) * l;
      double acc = 0;
      for (std::size_t k = 0; k < l; ++k) acc += w[k] * hx[(pos_ + l - k) % l];
      y[s2] += acc;
    }
  }
  complexity::tally(kRails * kRails * l);

  if (adapt) {
    const auto radii = config_.radii_at(symbols_);
    const double mu = config_.mu_at(symbols_++);
    const double ex = rde_error(y[kXI], y[kXQ], radii);
    const double ey = rde_error(y[kYI], y[kYQ], radii);
    const RailArray<double> e = {ex, ex, ey, ey};
    decorrelator_.push(y);
    for (int s2 = 0; s2 < kRails; ++s2) {
      const double g = mu * e[s2] * y[s2];
      for (int s1 = 0; s1 < kRails; ++s1) {
        const auto& hx = hist_[s1];
        double* w = w_.data() + static_cast<std::size_t>(s1 * kRails + s2) * l;
        for (std::size_t k = 0; k < l; ++k) w[k] += g * hx[(pos_ + l - k) % l];
      }
    }
    err_acc_ += std::abs(ex) + std::abs(ey);
    if (++err_n_ == config_.block_n / 2) {
      // decorrelation runs once per block, as in the FNT equalizer
      std::fill(delta_.begin(), delta_.end(), 0.0);
      decorrelator_.apply(w_, mu * config_.decorrelation_at(symbols_ - 1), l, delta_);
      for (std::size_t i = 0; i < w_.size(); ++i) w_[i] += delta_[i];
      error_trace_.push_back(err_acc_ / (2.0 * static_cast<double>(err_n_)));
      err_acc_ = 0;
      err_n_ = 0;
    }
  }
  return y;
}

RailArray<std::vector<double>> TdAeqFloat::process(const RailArray<std::vector<double>>& rails,
                                                   bool adapt) {
  const std::size_t len = rails[0].size();
  RailArray<std::vector<double>> out;
  for (auto& o : out) o.resize(len);
  for (std::size_t i = 0; i < len; ++i) {
    const RailArray<double> y =
        step({rails[0][i], rails[1][i], rails[2][i], rails[3][i]}, adapt);
    for (int r = 0; r < kRails; ++r) out[r][i] = y[r];
  }
  return out;
}

RailArray<std::vector<double>> td_aeq_float(const RailArray<std::vector<double>>& rails,
                                            const AeqConfig& config, bool adapt) {
  TdAeqFloat eq(config);
  return eq.process(rails, adapt);
}

RailArray<std::vector<double>> fd_aeq_forward_float(const RailArray<std::vector<double>>& rails,
                                                    const TdAeqFloat& taps, std::size_t l_taps,
                                                    std::size_t block_n) {
  const Fft fft(block_n);
  const std::size_t hop = block_n / 2;
  std::vector<std::vector<cplx>> wspec(kRails * kRails, std::vector<cplx>(block_n));
  {
    const complexity::SetupScope setup;
    for (int s1 = 0; s1 < kRails; ++s1)
      for (int s2 = 0; s2 < kRails; ++s2) {
        auto& ws = wspec[static_cast<std::size_t>(s1 * kRails + s2)];
        for (std::size_t k = 0; k < l_taps; ++k) ws[k] = taps.tap(s1, s2, k) / double(block_n);
        fft.forward(ws);
      }
  }
  const std::size_t len = rails[0].size();
  RailArray<std::vector<double>> out;
  for (auto& o : out) o.assign(len, 0.0);
  RailArray<std::vector<double>> win;
  for (auto& w : win) w.assign(block_n, 0.0);
  RailArray<std::vector<cplx>> xs;
  std::vector<cplx> acc(block_n);
  for (std::size_t pos = 0; pos < len; pos += hop) {
    for (int r = 0; r < kRails; ++r) {
      std::copy(win[r].begin() + static_cast<std::ptrdiff_t>(hop), win[r].end(), win[r].begin());
      for (std::size_t i = 0; i < hop; ++i) {
        win[r][hop + i] = pos + i < len ? rails[r][pos + i] : 0.0;
      }
      xs[r].assign(win[r].begin(), win[r].end());
      fft.forward(xs[r]);
    }
    for (int s2 = 0; s2 < kRails; ++s2) {
      std::fill(acc.begin(), acc.end(), cplx{});
      for (int s1 = 0; s1 < kRails; ++s1) {
        const auto& ws = wspec[static_cast<std::size_t>(s1 * kRails + s2)];
        for (std::size_t k = 0; k < block_n; ++k) acc[k] += xs[s1][k] * ws[k];
        complexity::tally(4 * block_n);
      }
      fft.inverse(acc);
      for (std::size_t i = 0; i < hop && pos + i < len; ++i) out[s2][pos + i] = acc[hop + i].real();
    }
  }
  return out;
}

}  // namespace fntdsp
