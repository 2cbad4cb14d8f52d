// Copyright 2026 The rase-echo Authors
// SPDX-License-Identifier: Apache-2.0
//
// rase_cli: simulate | analyze | theory | report. Links only the C API.
// Exit codes: 0 ok, 1 usage/config, 2 data format, 3 numeric/calibration,
// 4 internal.

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "rase/rase.h"

namespace {

void print_line(const char* line, void*) { std::printf("%s\n", line); }

int report(rase_status st) {
  if (st != RASE_OK) std::fprintf(stderr, "rase_cli: error: %s\n", rase_last_error());
  return static_cast<int>(st);
}

struct ConfigHandle {
  rase_config* p = nullptr;
  ~ConfigHandle() { rase_config_free(p); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RASE heterodyne simulation and analysis"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(rase_version()));

  std::string sim_config, sim_out, sim_csv;
  std::optional<std::uint64_t> sim_seed;
  auto* sim = app.add_subcommand("simulate", "synthesise a run into a RASEHET1 shot file");
  sim->add_option("--config", sim_config, "run configuration")->required();
  sim->add_option("--out", sim_out, "output shot file")->required();
  sim->add_option("--seed", sim_seed, "override the config seed");
  sim->add_option("--csv", sim_csv, "also export samples as CSV (small runs)");

  std::string an_shots, an_config, an_dir;
  auto* an = app.add_subcommand("analyze", "analyse a shot file into CSV tables");
  an->add_option("--shots", an_shots, "RASEHET1 shot file")->required();
  an->add_option("--config", an_config, "run configuration")->required();
  an->add_option("--out-dir", an_dir, "output directory")->required();

  double th_alpha = 0.0, th_excess = 0.0;
  std::optional<double> th_eta, th_target;
  std::string th_out;
  auto* th = app.add_subcommand("theory", "analytic inseparability curve S(b)");
  th->add_option("--alpha-l", th_alpha, "optical depth")->required();
  auto* eta_opt = th->add_option("--eta", th_eta, "recall efficiency");
  auto* dip_opt = th->add_option("--target-dip", th_target, "calibrate eta to this minimum");
  eta_opt->excludes(dip_opt);
  th->add_option("--excess", th_excess, "RASE excess noise (measured units)");
  th->add_option("--out", th_out, "write CSV here instead of stdout");

  std::string rep_dir;
  auto* rep = app.add_subcommand("report", "render SVG figures from analysis CSVs");
  rep->add_option("--dir", rep_dir, "analysis output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (*sim) {
    ConfigHandle cfg;
    if (auto st = rase_config_load(sim_config.c_str(), &cfg.p)) return report(st);
    if (sim_seed)
      if (auto st = rase_config_set_seed(cfg.p, *sim_seed)) return report(st);
    return report(rase_simulate(cfg.p, sim_out.c_str(), sim_csv.empty() ? nullptr : sim_csv.c_str(),
                                print_line, nullptr));
  }
  if (*an) {
    ConfigHandle cfg;
    if (auto st = rase_config_load(an_config.c_str(), &cfg.p)) return report(st);
    return report(rase_analyze(an_shots.c_str(), cfg.p, an_dir.c_str(), print_line, nullptr));
  }
  if (*th) {
    if (!th_eta && !th_target) {
      std::fprintf(stderr, "rase_cli: error: theory needs --eta or --target-dip\n");
      return 1;
    }
    return report(rase_theory(th_alpha, th_eta ? &*th_eta : nullptr,
                              th_target ? &*th_target : nullptr, th_excess,
                              th_out.empty() ? nullptr : th_out.c_str(), print_line, nullptr));
  }
  if (*rep) return report(rase_report(rep_dir.c_str(), print_line, nullptr));
  return 1;
}
