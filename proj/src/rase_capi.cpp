// Copyright 2026 The rase-echo Authors
// SPDX-License-Identifier: Apache-2.0
#include "rase/rase.h"

#include <fstream>
#include <new>
#include <optional>
#include <sstream>
#include <string>

#include "rase/cv_gaussian.hpp"
#include "rase/error.hpp"
#include "rase/parallel.hpp"
#include "rase/pipeline.hpp"
#include "rase/report.hpp"
#include "rase/run_config.hpp"

struct rase_config {
  rase::RunConfig cfg;
};

struct rase_state {
  rase::TwoModeGaussianState state;
};

namespace {

thread_local std::string g_last_error;

rase_status status_of(rase::ErrorKind k) {
  switch (k) {
    case rase::ErrorKind::Domain:
    case rase::ErrorKind::Config:
    case rase::ErrorKind::Io:
      return RASE_ERR_CONFIG;
    case rase::ErrorKind::Format:
      return RASE_ERR_FORMAT;
    case rase::ErrorKind::Convention:
    case rase::ErrorKind::Numeric:
      return RASE_ERR_NUMERIC;
  }
  return RASE_ERR_INTERNAL;
}

template <typename F>
rase_status guard(F&& f) {
  g_last_error.clear();
  try {
    f();
    return RASE_OK;
  } catch (const rase::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return RASE_ERR_INTERNAL;
}

void require(const void* p, const char* what) {
  if (!p) rase::fail(rase::ErrorKind::Config, std::string(what) + " is NULL");
}

rase::LineSink sink_of(rase_line_fn fn, void* user) {
  if (!fn) return {};
  return [fn, user](const std::string& line) { fn(line.c_str(), user); };
}

}  // namespace

extern "C" {

const char* rase_last_error(void) { return g_last_error.c_str(); }

const char* rase_version(void) { return "1.0.0"; }

void rase_set_threads(unsigned n) { rase::set_thread_count_override(n); }

rase_status rase_config_load(const char* path, rase_config** out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    *out = new rase_config{rase::load_run_config(path)};
  });
}

rase_status rase_config_parse(const char* text, rase_config** out) {
  return guard([&] {
    require(text, "text");
    require(out, "out");
    std::istringstream in(text);
    *out = new rase_config{rase::parse_run_config(in, "<text>")};
  });
}

rase_status rase_config_set_seed(rase_config* config, uint64_t seed) {
  return guard([&] {
    require(config, "config");
    config->cfg.sequence.seed = seed;
  });
}

void rase_config_free(rase_config* config) { delete config; }

rase_status rase_simulate(const rase_config* config, const char* out_path,
                          const char* csv_path, rase_line_fn sink, void* user) {
  return guard([&] {
    require(config, "config");
    require(out_path, "out_path");
    rase::simulate_to_file(config->cfg, out_path, csv_path ? csv_path : "",
                           sink_of(sink, user));
  });
}

rase_status rase_analyze(const char* shots_path, const rase_config* config,
                         const char* out_dir, rase_line_fn sink, void* user) {
  return guard([&] {
    require(shots_path, "shots_path");
    require(config, "config");
    require(out_dir, "out_dir");
    const auto res = rase::analyze_shot_file(shots_path, config->cfg);
    rase::write_analysis(res, out_dir);
    if (auto s = sink_of(sink, user)) {
      std::ostringstream os;
      os.precision(6);
      os << "analysed " << res.n_shots << " shots; scale = " << res.scale;
      s(os.str());
      if (res.phase_reference_skipped > 0)
        s("warning: phase reference skipped on " +
          std::to_string(res.phase_reference_skipped) + " shots (low reference SNR)");
      for (const auto& m : res.modes) {
        std::ostringstream ms;
        ms.precision(6);
        ms << "mode " << m.mode << ": S(" << m.b_dip << ") = " << m.dip.s_hat << " +/- "
           << m.dip.sigma << ", P(S < 2) = " << m.dip.confidence_below_2;
        s(ms.str());
        if (res.modes.size() > 4 && m.mode == 1) {
          s("...");
          break;
        }
      }
      s(std::string("wrote ") + out_dir);
    }
  });
}

rase_status rase_theory(double alpha_l, const double* eta, const double* target_dip,
                        double excess, const char* out_path, rase_line_fn sink, void* user) {
  return guard([&] {
    rase::TheoryRequest req;
    req.alpha_l = alpha_l;
    if (eta) req.eta = *eta;
    if (target_dip) req.target_dip = *target_dip;
    req.excess = excess;
    const std::string text = rase::format_theory_csv(rase::theory_curve(req));
    if (out_path) {
      std::ofstream out(out_path);
      if (!out) rase::fail(rase::ErrorKind::Io, std::string("cannot write '") + out_path + "'");
      out << text;
      if (!out) rase::fail(rase::ErrorKind::Io, std::string("write failed on '") + out_path + "'");
    } else if (sink) {
      std::istringstream in(text);
      for (std::string line; std::getline(in, line);) sink(line.c_str(), user);
    }
  });
}

rase_status rase_report(const char* dir, rase_line_fn sink, void* user) {
  return guard([&] {
    require(dir, "dir");
    for (const auto& p : rase::render_report(dir))
      if (sink) sink(("wrote " + p).c_str(), user);
  });
}

rase_status rase_state_create(double alpha_l, double eta, double excess, rase_state** out) {
  return guard([&] {
    require(out, "out");
    rase::RasePhysicsParams p{alpha_l, eta, excess};
    *out = new rase_state{rase::heterodyne_map(rase::ase_rase_state(p))};
  });
}

void rase_state_free(rase_state* state) { delete state; }

rase_status rase_state_covariance(const rase_state* state, double out[16]) {
  return guard([&] {
    require(state, "state");
    require(out, "out");
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) out[4 * i + j] = state->state.cov()(i, j);
  });
}

rase_status rase_state_inseparability(const rase_state* state, double b, double* s) {
  return guard([&] {
    require(state, "state");
    require(s, "s");
    *s = rase::inseparability_sum(state->state, b);
  });
}

rase_status rase_state_min(const rase_state* state, double* b_star, double* s_star) {
  return guard([&] {
    require(state, "state");
    require(b_star, "b_star");
    require(s_star, "s_star");
    const auto m = rase::min_inseparability(state->state);
    *b_star = m.b_star;
    *s_star = m.s_star;
  });
}

rase_status rase_calibrate_eta(double alpha_l, double target_dip, double* eta) {
  return guard([&] {
    require(eta, "eta");
    *eta = rase::calibrate_eta(alpha_l, target_dip);
  });
}

}  // extern "C"
