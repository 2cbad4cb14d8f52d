// Copyright 2026 The rase-echo Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// End-to-end commands behind the CLI: simulate to a shot file, analyse a
// shot stream into CSV tables, and evaluate the analytic theory curve.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rase/cv_gaussian.hpp"
#include "rase/run_config.hpp"
#include "rase/shot_analysis.hpp"

namespace rase {

using LineSink = std::function<void(const std::string&)>;

struct SimulateResult {
  std::string path;
  std::uint64_t bytes = 0;
  std::string sha256;
};

/// Synthesises in parallel chunks and appends in shot order, so the file is
/// identical for any thread count. Emits a manifest (parameter echo and
/// file hash) through `sink`.
SimulateResult simulate_to_file(const RunConfig& config, const std::string& out_path,
                                const std::string& csv_path = {},
                                const LineSink& sink = {});

struct ModeAnalysis {
  std::size_t mode = 0;
  RasePhysicsParams params;
  Eigen::Matrix4d designed;
  Eigen::Matrix4d measured;
  Eigen::Matrix4d standard_error;
  InseparabilityCurve curve;
  std::vector<double> s_theory;
  InseparabilityMinimum theory_min;
  double b_dip = 0.5;
  DipSignificance dip;
  std::vector<QuadratureSample> samples;  // normalised
};

struct AnalysisResult {
  std::size_t n_shots = 0;
  double scale = 1.0;
  double vacuum_var_sum = 0.0;  // after normalisation
  std::size_t phase_reference_skipped = 0;
  VarianceTrace trace;
  std::vector<Spectrum> spectra;
  CrossCorrelation xcorr;
  CorrelationPeak peak;
  std::vector<ModeAnalysis> modes;
  std::optional<DecayFit> decay;
  std::string decay_error;
  std::optional<FwhmFit> fwhm;
  std::string fwhm_error;
};

/// Supplies `count` consecutive shots starting at `first`.
using ShotSource =
    std::function<std::vector<HeterodyneRecord>(std::uint64_t first, std::size_t count)>;

inline constexpr std::size_t kAnalysisChunk = 512;

/// Streams shots through the per-shot map stage (phase reference,
/// projection, correlation) and the ordered reductions.
AnalysisResult analyze_stream(const RunConfig& config, const Timeline& timeline,
                              std::size_t n_shots, const ShotSource& source,
                              bool keep_samples = false);

/// Reads a RASEHET1 file; its window table must match the config timeline.
AnalysisResult analyze_shot_file(const std::string& shots_path, const RunConfig& config);

/// Synthesises and analyses without touching disk.
AnalysisResult analyze_simulated(const RunConfig& config, bool keep_samples = false);

/// variance_trace.csv, spectrum_<window>.csv, crosscorr.csv,
/// inseparability.csv, summary.csv.
void write_analysis(const AnalysisResult& result, const std::string& out_dir);

struct TheoryRequest {
  double alpha_l = 0.0;
  std::optional<double> eta;
  std::optional<double> target_dip;
  double excess = 0.0;
  double b_step = 0.01;
};

struct TheoryResult {
  RasePhysicsParams params;
  bool calibrated = false;
  std::vector<double> b_grid;
  std::vector<double> s_values;
  InseparabilityMinimum minimum;
};

TheoryResult theory_curve(const TheoryRequest& request);

/// Comment lines (`# key = value`) echo the parameters and minimum, then a
/// `b,s` table.
std::string format_theory_csv(const TheoryResult& result);

}  // namespace rase
