// Copyright 2026 The rase-echo Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Measurement analysis chain: vacuum normalisation, phase referencing,
// variance traces, spectra, the ASE/RASE cross-correlation, temporal-mode
// projection and the bootstrap inseparability statistics.
//
// The trace, spectrum and correlation estimators are built on streaming
// accumulators so a run can be analysed shot by shot; the span overloads
// are thin wrappers over them. Accumulated results are reported for raw
// records and rescaled by the vacuum normalisation at finish().

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "rase/sequence_synth.hpp"

namespace rase {

struct QuadratureSample {
  double x1 = 0.0, p1 = 0.0, x2 = 0.0, p2 = 0.0;
  std::uint64_t shot_index = 0;
  std::size_t mode_index = 0;
};

// ---------------------------------------------------------------------------
// Normalisation and phase referencing

/// Pooled Var(x) + Var(p) over a window: per-sample ensemble variance
/// averaged over the window (falls back to the window mean for one shot).
double pooled_variance(std::span<const HeterodyneRecord> shots, const Window& window);

/// Rescales every sample of every shot by one factor so the pooled vacuum
/// Var(x) + Var(p) is 2. Returns the factor.
double normalize_to_vacuum(std::span<HeterodyneRecord> shots,
                           std::string_view vacuum_label = label::kVacuum);

/// Scale factor normalize_to_vacuum would apply for a pooled variance.
double vacuum_scale(double pooled_vacuum_variance, std::size_t total_samples);

struct PhaseReference {
  double phase = 0.0;      // rad, estimated tone phase
  double amplitude = 0.0;  // estimated tone amplitude
  double vacuum_sigma = 1.0;
  bool applied = false;
  std::string warning;
};

inline constexpr double kMinReferenceSnr = 5.0;

/// Averages the reference window to estimate the tone phase and rotates the
/// whole record by its negative. Skipped (with a warning) when the tone is
/// below 5x the per-quadrature vacuum sigma of the shot's vacuum window.
PhaseReference apply_phase_reference(HeterodyneRecord& shot,
                                     std::string_view reference_label = label::kReference);

// ---------------------------------------------------------------------------
// Variance trace

struct VarianceTrace {
  std::vector<double> time;      // s, bin centre
  std::vector<double> var_sum;   // Var(x) + Var(p)
  std::vector<double> samples;   // per-bin sample count across shots
  std::vector<std::string> region;
  std::vector<bool> sentinel;
};

class VarianceAccumulator {
 public:
  explicit VarianceAccumulator(std::size_t n_samples);
  void add(const HeterodyneRecord& shot);
  void merge(const VarianceAccumulator& other);
  std::size_t n_shots() const { return n_shots_; }
  /// Per-sample ensemble variance times scale^2.
  std::vector<double> per_sample(double scale = 1.0) const;
  VarianceTrace trace(const Timeline& timeline, std::size_t bin_samples,
                      double scale = 1.0) const;
  double pooled(const Window& window, double scale = 1.0) const;

 private:
  std::vector<std::complex<double>> sum_;
  std::vector<double> sum_sq_;
  std::size_t n_shots_ = 0;
};

/// Bins each labeled window (and each unlabeled gap) from its own start.
VarianceTrace variance_trace(std::span<const HeterodyneRecord> shots, double bin_width);

// ---------------------------------------------------------------------------
// Spectra

struct Spectrum {
  std::string window;
  std::vector<double> frequency;  // Hz, ascending (zero-centred)
  std::vector<double> power;      // |DFT|^2 / N, shot averaged
  double mean_square = 0.0;       // shot-averaged mean |z|^2 over the window
  std::size_t n_shots = 0;
  std::string taper = "none";
};

class SpectrumAccumulator {
 public:
  /// Throws Config if the window has < 16 samples or covers a sentinel.
  SpectrumAccumulator(const Timeline& timeline, const Window& window);
  void add(const HeterodyneRecord& shot);
  void merge(const SpectrumAccumulator& other);
  Spectrum result(double scale = 1.0) const;

 private:
  Window window_;
  double sample_rate_;
  std::vector<double> sum_power_;
  double sum_mean_square_ = 0.0;
  std::size_t n_shots_ = 0;
};

Spectrum spectral_power(std::span<const HeterodyneRecord> shots, std::string_view window_label);

// ---------------------------------------------------------------------------
// Cross-correlation C(tau) = < sum_t z_ASE(t) z*_RASE(tau - t) >

struct CrossCorrelation {
  std::vector<double> tau;  // s, relative to the pi2 centre
  std::vector<std::complex<double>> mean;
  std::vector<double> magnitude;
  std::vector<double> std_error;  // of the complex shot mean
  std::size_t n_shots = 0;
  std::string handling = "magnitude";
};

class CrossCorrelationAccumulator {
 public:
  /// tau_step <= 0 selects the native 1/sample_rate grid; a coarser request
  /// is a Config error.
  CrossCorrelationAccumulator(const Timeline& timeline, std::string_view ase_label,
                              std::string_view rase_label, double tau_step = 0.0);
  void add(const HeterodyneRecord& shot);
  /// Adds a single-shot result from correlate().
  void add_correlation(const std::vector<std::complex<double>>& c);
  void merge(const CrossCorrelationAccumulator& other);
  CrossCorrelation result(double scale = 1.0) const;

  /// Single-shot C[m] for the native lag grid.
  std::vector<std::complex<double>> correlate(const HeterodyneRecord& shot) const;

 private:
  Window ase_, rase_;
  std::size_t reflection_sum_;
  double sample_rate_;
  std::vector<std::complex<double>> sum_;
  std::vector<double> sum_sq_;
  std::size_t n_shots_ = 0;
};

CrossCorrelation cross_correlation(std::span<const HeterodyneRecord> shots,
                                   std::string_view ase_label = label::kAse,
                                   std::string_view rase_label = label::kRase,
                                   double tau_step = 0.0);

struct CorrelationPeak {
  double tau = 0.0;          // s, location of the smoothed maximum
  double height = 0.0;       // max of the smoothed |C|
  double height_se = 0.0;
  double fwhm_magnitude = 0.0;  // s, full width at half max of |C|
  double fwhm_power = 0.0;      // s, full width at half max of |C|^2
};

CorrelationPeak correlation_peak(const CrossCorrelation& c);

// ---------------------------------------------------------------------------
// Mode projection and inseparability statistics

/// x1 + i p1 = <f_k, z>,  x2 + i p2 = conj(<g_k, z>).
std::vector<QuadratureSample> project_modes(const HeterodyneRecord& shot,
                                            const TemporalModeBasis& basis);

/// Unbiased 4x4 sample covariance over (x1, p1, x2, p2).
Eigen::Matrix4d sample_covariance(std::span<const QuadratureSample> samples);

/// Standard errors of the sample covariance entries under Gaussian fourth
/// moments, sqrt((S_ii S_jj + S_ij^2) / n).
Eigen::Matrix4d covariance_standard_errors(const Eigen::Matrix4d& cov, std::size_t n);

std::vector<double> default_b_grid(double step = 0.01);

struct BootstrapOptions {
  std::size_t resamples = 1000;
  std::uint64_t seed = 0;
};

struct InseparabilityCurve {
  std::vector<double> b_grid;
  std::vector<double> s_values;
  std::vector<double> ci_low;
  std::vector<double> ci_high;
  std::vector<double> sigma_band;  // bootstrap standard deviation
  std::size_t n_shots = 0;
  double confidence_level = 0.95;
  std::size_t resamples = 0;
};

inline constexpr std::size_t kMinInseparabilitySamples = 100;

/// S_hat(b) from the sample covariance; percentile bands from a bootstrap
/// over shots.
InseparabilityCurve inseparability_curve(std::span<const QuadratureSample> samples,
                                         std::span<const double> b_grid,
                                         double confidence_level,
                                         const BootstrapOptions& options = {});

struct DipSignificance {
  double s_hat = 0.0;
  double sigma = 0.0;
  double confidence_below_2 = 0.0;  // bootstrap P(S < 2)
};

DipSignificance dip_significance(std::span<const QuadratureSample> samples, double b,
                                 const BootstrapOptions& options = {});

// ---------------------------------------------------------------------------
// Fits

struct DecayFit {
  double tau = 0.0;
  double tau_sigma = 0.0;
  double amplitude = 0.0;
  std::size_t bins_used = 0;
};

/// Weighted least squares on log(var_sum - floor) over the bins of one
/// region. Throws Numeric when the trace does not decay.
DecayFit fit_exponential_decay(const VarianceTrace& trace, double floor,
                               std::string_view region = label::kAse);

struct FwhmFit {
  double fwhm = 0.0;
  double fwhm_sigma = 0.0;
  double peak_frequency = 0.0;
  double peak_power = 0.0;
};

/// Half-max crossings above the floor, linearly interpolated. Throws Numeric
/// when no peak stands clear of the floor.
FwhmFit fit_spectral_fwhm(const Spectrum& spectrum, double floor);

}  // namespace rase
