// Copyright 2026 The rase-echo Authors
// SPDX-License-Identifier: Apache-2.0
#include "rase/run_config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "rase/error.hpp"

namespace rase {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& v, const std::string& where) {
  std::size_t used = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || !std::isfinite(d)) fail(ErrorKind::Config, where + ": not a number");
  return d;
}

std::uint64_t to_uint(const std::string& v, const std::string& where) {
  std::uint64_t u = 0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, u);
  if (ec != std::errc() || p != end)
    fail(ErrorKind::Config, where + ": not a non-negative integer");
  return u;
}

bool to_bool(const std::string& v, const std::string& where) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail(ErrorKind::Config, where + ": expected true/false");
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto num = [&t](const char* key, double factor, std::function<double&(RunConfig&)> field) {
      t[key] = [factor, field](RunConfig& c, const std::string& v, const std::string& w) {
        field(c) = to_double(v, w) * factor;
      };
    };
    num("sample_rate_mhz", 1e6, [](RunConfig& c) -> double& { return c.sequence.sample_rate; });
    num("reference_us", 1e-6, [](RunConfig& c) -> double& { return c.sequence.reference_duration; });
    num("vacuum_us", 1e-6, [](RunConfig& c) -> double& { return c.sequence.vacuum_duration; });
    num("pulse_width_us", 1e-6, [](RunConfig& c) -> double& { return c.sequence.pulse_width; });
    num("guard_us", 1e-6, [](RunConfig& c) -> double& { return c.sequence.guard; });
    num("tail_us", 1e-6, [](RunConfig& c) -> double& { return c.sequence.tail_duration; });
    num("signal_bandwidth_khz", 1e3,
        [](RunConfig& c) -> double& { return c.sequence.signal_bandwidth; });
    num("ase_decay_tau_us", 1e-6, [](RunConfig& c) -> double& { return c.sequence.ase_decay_tau; });
    num("t2_us", 1e-6, [](RunConfig& c) -> double& { return c.sequence.t2; });
    num("alpha_l", 1.0, [](RunConfig& c) -> double& { return c.sequence.physics.alpha_l; });
    num("eta", 1.0, [](RunConfig& c) -> double& { return c.sequence.physics.eta; });
    num("excess", 1.0, [](RunConfig& c) -> double& { return c.sequence.physics.excess; });
    num("lo_phase_drift_rad", 1.0, [](RunConfig& c) -> double& { return c.sequence.lo_phase_drift; });
    num("reference_amplitude", 1.0,
        [](RunConfig& c) -> double& { return c.sequence.reference_amplitude; });
    num("echo_amplitude", 1.0, [](RunConfig& c) -> double& { return c.sequence.echo_amplitude; });
    num("b_step", 1.0, [](RunConfig& c) -> double& { return c.analysis.b_step; });
    num("confidence_level", 1.0, [](RunConfig& c) -> double& { return c.analysis.confidence_level; });
    num("trace_bin_us", 1e-6, [](RunConfig& c) -> double& { return c.analysis.trace_bin; });
    t["dip_b"] = [](RunConfig& c, const std::string& v, const std::string& w) {
      c.analysis.dip_b = v == "auto" ? -1.0 : to_double(v, w);
    };
    t["n_modes"] = [](RunConfig& c, const std::string& v, const std::string& w) {
      c.sequence.n_modes = to_uint(v, w);
    };
    t["n_shots"] = [](RunConfig& c, const std::string& v, const std::string& w) {
      c.sequence.n_shots = to_uint(v, w);
    };
    t["seed"] = [](RunConfig& c, const std::string& v, const std::string& w) {
      c.sequence.seed = to_uint(v, w);
    };
    t["bootstrap_resamples"] = [](RunConfig& c, const std::string& v, const std::string& w) {
      c.analysis.bootstrap_resamples = to_uint(v, w);
    };
    t["bootstrap_seed"] = [](RunConfig& c, const std::string& v, const std::string& w) {
      c.analysis.bootstrap_seed = to_uint(v, w);
    };
    t["warm"] = [](RunConfig& c, const std::string& v, const std::string& w) {
      c.sequence.warm = to_bool(v, w);
    };
    t["pi2_enabled"] = [](RunConfig& c, const std::string& v, const std::string& w) {
      c.sequence.pi2_enabled = to_bool(v, w);
    };
    t["phase_reference"] = [](RunConfig& c, const std::string& v, const std::string& w) {
      c.analysis.phase_reference = to_bool(v, w);
    };
    return t;
  }();
  return table;
}

}  // namespace

void AnalysisOptions::validate() const {
  if (!(b_step > 0.0 && b_step <= 1.0)) fail(ErrorKind::Config, "b_step must be in (0, 1]");
  if (bootstrap_resamples < 2) fail(ErrorKind::Config, "bootstrap_resamples must be >= 2");
  if (!(confidence_level > 0.0 && confidence_level < 1.0))
    fail(ErrorKind::Config, "confidence_level must be in (0, 1)");
  if (!(trace_bin > 0.0)) fail(ErrorKind::Config, "trace_bin_us must be > 0");
  if (dip_b > 1.0) fail(ErrorKind::Config, "dip_b must be 'auto' or in [0, 1]");
}

RunConfig parse_run_config(std::istream& in, const std::string& source) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(lineno);
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorKind::Config, where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) fail(ErrorKind::Config, where + ": unknown key '" + key + "'");
    if (!seen.insert(key).second)
      fail(ErrorKind::Config, where + ": duplicate key '" + key + "'");
    if (value.empty()) fail(ErrorKind::Config, where + ": empty value for '" + key + "'");
    it->second(cfg, value, where + " (" + key + ")");
  }
  cfg.sequence.validate();
  cfg.analysis.validate();
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Config, "cannot open config '" + path + "'");
  return parse_run_config(in, path);
}

std::string format_run_config(const RunConfig& c) {
  const auto& s = c.sequence;
  const auto& a = c.analysis;
  std::ostringstream os;
  os.precision(17);
  os << "sample_rate_mhz = " << s.sample_rate / 1e6 << '\n'
     << "reference_us = " << s.reference_duration / 1e-6 << '\n'
     << "vacuum_us = " << s.vacuum_duration / 1e-6 << '\n'
     << "pulse_width_us = " << s.pulse_width / 1e-6 << '\n'
     << "guard_us = " << s.guard / 1e-6 << '\n'
     << "tail_us = " << s.tail_duration / 1e-6 << '\n'
     << "signal_bandwidth_khz = " << s.signal_bandwidth / 1e3 << '\n'
     << "ase_decay_tau_us = " << s.ase_decay_tau / 1e-6 << '\n'
     << "t2_us = " << s.t2 / 1e-6 << '\n'
     << "alpha_l = " << s.physics.alpha_l << '\n'
     << "eta = " << s.physics.eta << '\n'
     << "excess = " << s.physics.excess << '\n'
     << "n_modes = " << s.n_modes << '\n'
     << "n_shots = " << s.n_shots << '\n'
     << "seed = " << s.seed << '\n'
     << "warm = " << (s.warm ? "true" : "false") << '\n'
     << "pi2_enabled = " << (s.pi2_enabled ? "true" : "false") << '\n'
     << "lo_phase_drift_rad = " << s.lo_phase_drift << '\n'
     << "reference_amplitude = " << s.reference_amplitude << '\n'
     << "echo_amplitude = " << s.echo_amplitude << '\n'
     << "b_step = " << a.b_step << '\n'
     << "bootstrap_resamples = " << a.bootstrap_resamples << '\n'
     << "bootstrap_seed = " << a.bootstrap_seed << '\n'
     << "confidence_level = " << a.confidence_level << '\n'
     << "trace_bin_us = " << a.trace_bin / 1e-6 << '\n';
  if (a.dip_b < 0.0)
    os << "dip_b = auto\n";
  else
    os << "dip_b = " << a.dip_b << '\n';
  os << "phase_reference = " << (a.phase_reference ? "true" : "false") << '\n';
  return os.str();
}

}  // namespace rase
