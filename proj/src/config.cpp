// Copyright 2026 The fntdsp Authors
// SPDX-License-Identifier: Apache-2.0

#include "fntdsp/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "fntdsp/errors.hpp"
#include "json.hpp"

namespace fntdsp {

namespace {

using nlohmann::json;

// Reads the keys of one object, remembering which were consumed so that
// leftovers can be reported.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + " must be an object");
  }

  /// Throws on any key that no get() asked for.
  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) throw ConfigError("unknown key " + path_ + "." + key);
    }
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(path_ + "." + key + ": " + e.what());
    }
  }

  void get_optional(const char* key, std::optional<double>& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    if (it->is_null()) {
      out.reset();
      return;
    }
    double v = 0;
    get(key, v);
    out = v;
  }

  Section sub(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    static const json kEmpty = json::object();
    return Section(it == j_.end() ? kEmpty : *it, path_ + "." + key);
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace

void RunConfig::apply_seed(std::uint64_t s) {
  seed = s;
  link.seed = s;
  complexity.seed = s;
}

void RunConfig::validate() const {
  link.validate();
  if (schemes.empty()) throw ConfigError("schemes list is empty");
}

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  {
    Section root(j, "config");
    root.get("seed", c.seed);
    {
      auto& l = c.link;
      Section s = root.sub("link");
      s.get("baud", l.baud);
      s.get("n_symbols", l.n_symbols);
      s.get("rolloff", l.rolloff);
      s.get("snr_db", l.snr_db);
      s.get("signal_bits", l.signal_bits);
      s.get("discard_symbols", l.discard_symbols);
      s.get("antialias", l.antialias);
      s.get("cr_window", l.cr_window);
      s.get("threads", l.threads);
      {
        Section f = s.sub("fiber");
        f.get("d_ps_nm_km", l.fiber.d_ps_nm_km);
        f.get("lambda_nm", l.fiber.lambda_nm);
        f.get("z_km", l.fiber.z_km);
        f.finish();
      }
      {
        Section ch = s.sub("channel");
        ch.get("pol_rotation_deg", l.pol_rotation_deg);
        ch.get("dgd_symbols", l.dgd_symbols);
        ch.get("iq_skew_samples", l.iq_skew_samples);
        ch.get("iq_phase_deg", l.iq_phase_deg);
        ch.finish();
      }
      {
        Section cd = s.sub("cdc");
        cd.get_optional("z_km", l.cdc_z_km);
        std::string method = to_string(l.cdc_tap_method);
        cd.get("tap_method", method);
        l.cdc_tap_method = cd_tap_method_from_string(method);
        cd.get("ls_regularization", l.cdc_ls_regularization);
        cd.get("ls_target_db", l.cdc_ls_target_db);
        cd.get("fit_fill", l.cdc_fit_fill);
        cd.get("signal_band", l.cdc_signal_band);
        cd.get("taps", l.cdc_taps);
        cd.get("tap_bits", l.cdc_tap_bits);
        cd.get("full_scale_rms", l.cdc_full_scale_rms);
        cd.finish();
      }
      {
        Section aq = s.sub("aeq");
        aq.get("mu", l.aeq_mu);
        aq.get("full_scale_rms", l.aeq_full_scale_rms);
        aq.finish();
      }
      s.finish();
    }
    std::vector<std::string> names;
    for (const auto& sc : c.schemes) names.push_back(sc.name());
    root.get("schemes", names);
    c.schemes.clear();
    for (const auto& n : names) c.schemes.push_back(linksim::Scheme::parse(n));
    {
      auto& m = c.complexity;
      Section s = root.sub("complexity");
      s.get("cdc_n", m.cdc_n);
      s.get("aeq_n", m.aeq_n);
      s.get("td_cdc_taps", m.td_cdc_taps);
      s.get("td_aeq_taps", m.td_aeq_taps);
      s.get("symbols", m.symbols);
      s.finish();
    }
    root.finish();
  }
  c.apply_seed(c.seed);
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& c) {
  const auto& l = c.link;
  json j;
  j["seed"] = c.seed;
  j["link"] = {
      {"baud", l.baud},
      {"n_symbols", l.n_symbols},
      {"rolloff", l.rolloff},
      {"snr_db", l.snr_db},
      {"signal_bits", l.signal_bits},
      {"discard_symbols", l.discard_symbols},
      {"antialias", l.antialias},
      {"cr_window", l.cr_window},
      {"threads", l.threads},
      {"fiber",
       {{"d_ps_nm_km", l.fiber.d_ps_nm_km},
        {"lambda_nm", l.fiber.lambda_nm},
        {"z_km", l.fiber.z_km}}},
      {"channel",
       {{"pol_rotation_deg", l.pol_rotation_deg},
        {"dgd_symbols", l.dgd_symbols},
        {"iq_skew_samples", l.iq_skew_samples},
        {"iq_phase_deg", l.iq_phase_deg}}},
      {"cdc",
       {{"z_km", l.cdc_z_km ? json(*l.cdc_z_km) : json(nullptr)},
        {"tap_method", to_string(l.cdc_tap_method)},
        {"ls_regularization", l.cdc_ls_regularization},
        {"ls_target_db", l.cdc_ls_target_db},
        {"fit_fill", l.cdc_fit_fill},
        {"signal_band", l.cdc_signal_band},
        {"taps", l.cdc_taps},
        {"tap_bits", l.cdc_tap_bits},
        {"full_scale_rms", l.cdc_full_scale_rms}}},
      {"aeq", {{"mu", l.aeq_mu}, {"full_scale_rms", l.aeq_full_scale_rms}}},
  };
  std::vector<std::string> names;
  for (const auto& s : c.schemes) names.push_back(s.name());
  j["schemes"] = names;
  const auto& m = c.complexity;
  j["complexity"] = {{"cdc_n", m.cdc_n},
                     {"aeq_n", m.aeq_n},
                     {"td_cdc_taps", m.td_cdc_taps},
                     {"td_aeq_taps", m.td_aeq_taps},
                     {"symbols", m.symbols}};
  return j.dump(2) + "\n";
}

}  // namespace fntdsp
