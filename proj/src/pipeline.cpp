// Copyright 2026 The rase-echo Authors
// SPDX-License-Identifier: Apache-2.0
#include "rase/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "rase/error.hpp"
#include "rase/parallel.hpp"
#include "rase/shot_file.hpp"

namespace rase {

namespace {

constexpr std::size_t kSimulateChunk = 256;
const char* const kQuadNames[4] = {"x1", "p1", "x2", "p2"};

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) fail(ErrorKind::Io, "cannot open '" + p.string() + "' for writing");
  out << std::setprecision(10);
  return out;
}

void check_written(std::ofstream& out, const std::filesystem::path& p) {
  out.flush();
  if (!out) fail(ErrorKind::Io, "write failed on '" + p.string() + "'");
}

}  // namespace

SimulateResult simulate_to_file(const RunConfig& config, const std::string& out_path,
                                const std::string& csv_path, const LineSink& sink) {
  const SequenceConfig& seq = config.sequence;
  seq.validate();
  const ShotSynthesizer synth(seq);
  const Timeline& tl = synth.timeline();
  if (seq.n_shots > 0xffffffffull || tl.n_samples() > 0xffffffffull)
    fail(ErrorKind::Config, "run too large for the RASEHET1 u32 counters");

  ShotFileHeader header;
  header.sample_rate = tl.sample_rate();
  header.n_shots = static_cast<std::uint32_t>(seq.n_shots);
  header.n_samples = static_cast<std::uint32_t>(tl.n_samples());
  header.windows = tl.windows();

  ShotFileWriter writer(out_path, header);
  std::vector<HeterodyneRecord> csv_shots;
  std::vector<HeterodyneRecord> chunk;
  for (std::size_t first = 0; first < seq.n_shots; first += kSimulateChunk) {
    const std::size_t count = std::min(kSimulateChunk, seq.n_shots - first);
    chunk.assign(count, {});
    parallel_for(count, [&](std::size_t i) { chunk[i] = synth.shot(first + i); });
    for (const auto& rec : chunk) writer.append(rec);
    if (!csv_path.empty())
      csv_shots.insert(csv_shots.end(), chunk.begin(), chunk.end());
  }
  writer.close();
  if (!csv_path.empty()) export_shots_csv(csv_path, csv_shots);

  SimulateResult res;
  res.path = out_path;
  res.bytes = header.total_bytes();
  res.sha256 = sha256_file(out_path);
  if (sink) {
    sink("# rase simulate manifest");
    std::istringstream echo(format_run_config(config));
    for (std::string line; std::getline(echo, line);) sink(line);
    sink("# output = " + res.path);
    sink("# n_samples = " + std::to_string(header.n_samples));
    sink("# bytes = " + std::to_string(res.bytes));
    sink("# sha256 = " + res.sha256);
    if (!csv_path.empty()) sink("# csv = " + csv_path);
  }
  return res;
}

// ---------------------------------------------------------------------------

AnalysisResult analyze_stream(const RunConfig& config, const Timeline& timeline,
                              std::size_t n_shots, const ShotSource& source,
                              bool keep_samples) {
  config.analysis.validate();
  if (n_shots == 0) fail(ErrorKind::Config, "no shots to analyse");
  const TemporalModeBasis basis = build_mode_basis(timeline, config.sequence.n_modes);
  const Window& vac = timeline.at(label::kVacuum);

  VarianceAccumulator var(timeline.n_samples());
  std::vector<SpectrumAccumulator> spec;
  for (auto l : {label::kVacuum, label::kAse, label::kRase})
    spec.emplace_back(timeline, timeline.at(l));
  CrossCorrelationAccumulator xc(timeline, label::kAse, label::kRase);

  std::vector<std::vector<QuadratureSample>> quad(basis.size());
  for (auto& q : quad) q.reserve(n_shots);
  std::atomic<std::size_t> skipped{0};

  for (std::size_t first = 0; first < n_shots; first += kAnalysisChunk) {
    const std::size_t count = std::min(kAnalysisChunk, n_shots - first);
    std::vector<HeterodyneRecord> recs = source(first, count);
    if (recs.size() != count) fail(ErrorKind::Format, "shot source returned a short chunk");
    std::vector<std::vector<QuadratureSample>> proj(count);
    std::vector<std::vector<std::complex<double>>> corr(count);
    parallel_for(count, [&](std::size_t i) {
      if (recs[i].samples.size() != timeline.n_samples())
        fail(ErrorKind::Format, "record length differs from the timeline");
      if (config.analysis.phase_reference && !apply_phase_reference(recs[i]).applied)
        skipped.fetch_add(1);
      proj[i] = project_modes(recs[i], basis);
      corr[i] = xc.correlate(recs[i]);
    });
    for (std::size_t i = 0; i < count; ++i) {
      var.add(recs[i]);
      for (auto& s : spec) s.add(recs[i]);
      xc.add_correlation(corr[i]);
      for (std::size_t k = 0; k < basis.size(); ++k) quad[k].push_back(proj[i][k]);
    }
  }

  AnalysisResult res;
  res.n_shots = n_shots;
  res.phase_reference_skipped = skipped.load();
  res.scale = vacuum_scale(var.pooled(vac), vac.size() * n_shots);
  const double s = res.scale;
  res.vacuum_var_sum = var.pooled(vac, s);
  const auto bin = static_cast<std::size_t>(
      std::max<long long>(2, std::llround(config.analysis.trace_bin * timeline.sample_rate())));
  res.trace = var.trace(timeline, bin, s);
  for (const auto& a : spec) res.spectra.push_back(a.result(s));
  res.xcorr = xc.result(s);
  res.peak = correlation_peak(res.xcorr);

  try {
    res.decay = fit_exponential_decay(res.trace, res.vacuum_var_sum, label::kAse);
  } catch (const Error& e) {
    res.decay_error = e.what();
  }
  try {
    res.fwhm = fit_spectral_fwhm(res.spectra[1], res.vacuum_var_sum);
  } catch (const Error& e) {
    res.fwhm_error = e.what();
  }

  const auto grid = default_b_grid(config.analysis.b_step);
  for (std::size_t k = 0; k < basis.size(); ++k) {
    ModeAnalysis m;
    m.mode = k;
    for (auto& q : quad[k]) {
      q.x1 *= s;
      q.p1 *= s;
      q.x2 *= s;
      q.p2 *= s;
    }
    m.params = mode_params(config.sequence, basis.tile(k));
    m.designed = designed_measured_cov(config.sequence, basis.tile(k));
    m.measured = sample_covariance(quad[k]);
    m.standard_error = covariance_standard_errors(m.measured, n_shots);
    BootstrapOptions opt{config.analysis.bootstrap_resamples, config.analysis.bootstrap_seed + k};
    m.curve = inseparability_curve(quad[k], grid, config.analysis.confidence_level, opt);
    for (double b : grid) m.s_theory.push_back(inseparability_from_cov(m.designed, b));
    m.theory_min = min_inseparability(
        TwoModeGaussianState(m.designed, Eigen::Vector4d::Zero(), Convention::Measured));
    if (config.analysis.dip_b >= 0.0) {
      m.b_dip = config.analysis.dip_b;
    } else {
      const auto it = std::min_element(m.curve.s_values.begin(), m.curve.s_values.end());
      m.b_dip = grid[static_cast<std::size_t>(it - m.curve.s_values.begin())];
    }
    m.dip = dip_significance(quad[k], m.b_dip, opt);
    if (keep_samples) m.samples = std::move(quad[k]);
    std::vector<QuadratureSample>().swap(quad[k]);
    res.modes.push_back(std::move(m));
  }
  return res;
}

AnalysisResult analyze_shot_file(const std::string& shots_path, const RunConfig& config) {
  const ShotFileReader reader(shots_path);
  const Timeline tl = reader.header().timeline();
  const Timeline expected = config.sequence.timeline();
  if (tl.sample_rate() != expected.sample_rate() || tl.n_samples() != expected.n_samples() ||
      tl.windows() != expected.windows())
    fail(ErrorKind::Config, "shot file '" + shots_path +
                                "' window table does not match the config timeline");
  return analyze_stream(config, tl, reader.n_shots(),
                        [&](std::uint64_t first, std::size_t count) {
                          return reader.read_range(static_cast<std::uint32_t>(first),
                                                   static_cast<std::uint32_t>(count));
                        });
}

AnalysisResult analyze_simulated(const RunConfig& config, bool keep_samples) {
  config.sequence.validate();
  const ShotSynthesizer synth(config.sequence);
  return analyze_stream(
      config, synth.timeline(), config.sequence.n_shots,
      [&](std::uint64_t first, std::size_t count) {
        std::vector<HeterodyneRecord> out(count);
        parallel_for(count, [&](std::size_t i) { out[i] = synth.shot(first + i); });
        return out;
      },
      keep_samples);
}

// ---------------------------------------------------------------------------

void write_analysis(const AnalysisResult& r, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) fail(ErrorKind::Io, "cannot create output directory '" + out_dir + "'");
  const fs::path dir(out_dir);

  {
    const auto p = dir / "variance_trace.csv";
    auto out = open_out(p);
    out << "time_us,var_sum,samples,region,sentinel\n";
    for (std::size_t i = 0; i < r.trace.time.size(); ++i)
      out << r.trace.time[i] * 1e6 << ',' << r.trace.var_sum[i] << ',' << r.trace.samples[i]
          << ',' << r.trace.region[i] << ',' << (r.trace.sentinel[i] ? 1 : 0) << '\n';
    check_written(out, p);
  }
  for (const auto& sp : r.spectra) {
    const auto p = dir / ("spectrum_" + sp.window + ".csv");
    auto out = open_out(p);
    out << "# window = " << sp.window << "\n# taper = " << sp.taper
        << "\n# n_shots = " << sp.n_shots << "\n# mean_square = " << sp.mean_square << '\n';
    out << "frequency_khz,power\n";
    for (std::size_t i = 0; i < sp.frequency.size(); ++i)
      out << sp.frequency[i] / 1e3 << ',' << sp.power[i] << '\n';
    check_written(out, p);
  }
  {
    const auto p = dir / "crosscorr.csv";
    auto out = open_out(p);
    out << "# handling = " << r.xcorr.handling << "\n# n_shots = " << r.xcorr.n_shots << '\n';
    out << "tau_us,magnitude,re,im,std_error\n";
    for (std::size_t i = 0; i < r.xcorr.tau.size(); ++i)
      out << r.xcorr.tau[i] * 1e6 << ',' << r.xcorr.magnitude[i] << ','
          << r.xcorr.mean[i].real() << ',' << r.xcorr.mean[i].imag() << ','
          << r.xcorr.std_error[i] << '\n';
    check_written(out, p);
  }
  {
    const auto p = dir / "inseparability.csv";
    auto out = open_out(p);
    if (!r.modes.empty())
      out << "# confidence_level = " << r.modes.front().curve.confidence_level
          << "\n# resamples = " << r.modes.front().curve.resamples << '\n';
    out << "mode,b,s_hat,ci_low,ci_high,sigma,s_theory\n";
    for (const auto& m : r.modes)
      for (std::size_t j = 0; j < m.curve.b_grid.size(); ++j)
        out << m.mode << ',' << m.curve.b_grid[j] << ',' << m.curve.s_values[j] << ','
            << m.curve.ci_low[j] << ',' << m.curve.ci_high[j] << ',' << m.curve.sigma_band[j]
            << ',' << m.s_theory[j] << '\n';
    check_written(out, p);
  }
  {
    const auto p = dir / "summary.csv";
    auto out = open_out(p);
    out << "quantity,value,unit\n";
    auto row = [&](const std::string& q, double v, const char* unit) {
      out << q << ',' << v << ',' << unit << '\n';
    };
    const double nan = std::nan("");
    row("n_shots", static_cast<double>(r.n_shots), "count");
    row("normalization_scale", r.scale, "1");
    row("vacuum_var_sum", r.vacuum_var_sum, "vacuum units");
    row("phase_reference_skipped", static_cast<double>(r.phase_reference_skipped), "count");
    row("decay_tau", r.decay ? r.decay->tau * 1e6 : nan, "us");
    row("decay_tau_sigma", r.decay ? r.decay->tau_sigma * 1e6 : nan, "us");
    row("spectral_fwhm", r.fwhm ? r.fwhm->fwhm / 1e3 : nan, "kHz");
    row("spectral_fwhm_sigma", r.fwhm ? r.fwhm->fwhm_sigma / 1e3 : nan, "kHz");
    row("corr_peak_tau", r.peak.tau * 1e6, "us");
    row("corr_peak_height", r.peak.height, "vacuum units");
    row("corr_peak_std_error", r.peak.height_se, "vacuum units");
    row("corr_fwhm_power", r.peak.fwhm_power * 1e6, "us");
    row("corr_fwhm_magnitude", r.peak.fwhm_magnitude * 1e6, "us");
    for (const auto& m : r.modes) {
      const std::string pre = "mode" + std::to_string(m.mode) + ".";
      row(pre + "b_dip", m.b_dip, "1");
      row(pre + "s_hat", m.dip.s_hat, "vacuum units");
      row(pre + "sigma", m.dip.sigma, "vacuum units");
      row(pre + "confidence_below_2", m.dip.confidence_below_2, "probability");
      row(pre + "theory_b_star", m.theory_min.b_star, "1");
      row(pre + "theory_s_star", m.theory_min.s_star, "vacuum units");
      row(pre + "eta", m.params.eta, "1");
      row(pre + "gain", amplifier_gain(m.params.alpha_l), "1");
      for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j) {
          const std::string q = pre + "cov_" + kQuadNames[i] + kQuadNames[j];
          row(q + "_measured", m.measured(i, j), "vacuum units");
          row(q + "_designed", m.designed(i, j), "vacuum units");
          row(q + "_std_error", m.standard_error(i, j), "vacuum units");
        }
    }
    check_written(out, p);
  }
}

// ---------------------------------------------------------------------------

TheoryResult theory_curve(const TheoryRequest& req) {
  if (req.eta.has_value() == req.target_dip.has_value())
    fail(ErrorKind::Config, "give exactly one of eta or target_dip");
  TheoryResult out;
  out.params.alpha_l = req.alpha_l;
  out.params.excess = req.excess;
  if (req.target_dip) {
    if (req.excess != 0.0)
      fail(ErrorKind::Config, "calibration assumes excess = 0");
    out.params.eta = calibrate_eta(req.alpha_l, *req.target_dip);
    out.calibrated = true;
  } else {
    out.params.eta = *req.eta;
  }
  const auto state = heterodyne_map(ase_rase_state(out.params));
  out.b_grid = default_b_grid(req.b_step);
  for (double b : out.b_grid) out.s_values.push_back(inseparability_sum(state, b));
  out.minimum = min_inseparability(state);
  return out;
}

std::string format_theory_csv(const TheoryResult& r) {
  std::ostringstream os;
  os << std::setprecision(10);
  os << "# alpha_l = " << r.params.alpha_l << '\n'
     << "# eta = " << r.params.eta << (r.calibrated ? " (calibrated)" : "") << '\n'
     << "# excess = " << r.params.excess << '\n'
     << "# b_star = " << r.minimum.b_star << '\n'
     << "# s_star = " << r.minimum.s_star << '\n'
     << "b,s\n";
  for (std::size_t i = 0; i < r.b_grid.size(); ++i) os << r.b_grid[i] << ',' << r.s_values[i] << '\n';
  return os.str();
}

}  // namespace rase
