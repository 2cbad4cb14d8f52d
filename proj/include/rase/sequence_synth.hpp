// Copyright 2026 The rase-echo Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "rase/cv_gaussian.hpp"

namespace rase {

using Sample = std::complex<double>;

/// Half-open sample range [start, end) with a label.
struct Window {
  std::string label;
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - start; }
  bool contains(std::size_t i) const { return i >= start && i < end; }
  bool operator==(const Window&) const = default;
};

namespace label {
inline constexpr std::string_view kReference = "reference";
inline constexpr std::string_view kVacuum = "vacuum";
inline constexpr std::string_view kPi1 = "pi1";
inline constexpr std::string_view kAse = "ase";
inline constexpr std::string_view kPi2 = "pi2";
inline constexpr std::string_view kRase = "rase";
inline constexpr std::string_view kEcho = "echo";
inline constexpr std::string_view kTail = "tail";
}  // namespace label

/// pi-pulse windows saturate the detector and never enter statistics.
bool is_sentinel_label(std::string_view label);

/// Ordered, non-overlapping window table over n_samples. Gaps between
/// windows (detector recovery guards) are unlabeled vacuum.
class Timeline {
 public:
  Timeline() = default;
  Timeline(std::vector<Window> windows, std::size_t n_samples, double sample_rate);

  const std::vector<Window>& windows() const { return windows_; }
  std::size_t n_samples() const { return n_samples_; }
  double sample_rate() const { return sample_rate_; }

  const Window& at(std::string_view label) const;
  const Window* find(std::string_view label) const;
  bool is_sentinel(std::size_t i) const;

  /// 2x the pi2 centre in sample units; reflect(i) = reflection_sum() - i
  /// maps the ASE window onto the RASE window about tau = 0.
  std::size_t reflection_sum() const;
  std::size_t reflect(std::size_t i) const { return reflection_sum() - i; }

  /// Time of sample i relative to the pi2 centre, in seconds.
  double tau(std::size_t i) const;
  double time(std::size_t i) const { return static_cast<double>(i) / sample_rate_; }

 private:
  std::vector<Window> windows_;
  std::size_t n_samples_ = 0;
  double sample_rate_ = 0.0;
};

struct SequenceConfig {
  double sample_rate = 10e6;        // Hz
  double reference_duration = 10e-6;
  double vacuum_duration = 50e-6;
  double pulse_width = 1.6e-6;
  double guard = 2e-6;              // pulse end -> ASE/RASE window start
  double tail_duration = 10e-6;
  double signal_bandwidth = 150e3;  // Hz, spectral FWHM of the ASE
  double ase_decay_tau = 378e-6;    // 1/e time of the ASE signal variance
  double t2 = 13e-6;
  RasePhysicsParams physics;
  std::size_t n_modes = 1;
  std::size_t n_shots = 1000;
  std::uint64_t seed = 1;
  bool warm = false;
  bool pi2_enabled = true;
  double lo_phase_drift = 0.0;      // rad/shot standard deviation
  double reference_amplitude = 20.0;  // in units of the vacuum sigma
  double echo_amplitude = 30.0;

  /// Throws Config on inconsistent timing or counts.
  void validate() const;

  /// Samples per boxcar tile: round(0.8859 * fs / bandwidth), so the tile's
  /// sinc^2 power spectrum has the configured FWHM.
  std::size_t tile_samples() const;

  Timeline timeline() const;
};

/// sinc^2 half-power full width times the boxcar duration.
inline constexpr double kSincSquaredFwhm = 0.885893;

/// One boxcar mode pair: an ASE tile and its reflected RASE partner.
struct ModeTile {
  std::size_t ase_start = 0;
  std::size_t rase_start = 0;
  std::size_t length = 0;
  double since_pi1 = 0.0;  // s, pi1 centre -> ASE tile centre
  double before_pi2 = 0.0; // s, ASE tile centre -> pi2 centre
};

class TemporalModeBasis {
 public:
  TemporalModeBasis(std::vector<ModeTile> tiles, std::size_t reflection_sum,
                    double sample_rate, std::size_t n_samples);

  std::size_t size() const { return tiles_.size(); }
  const ModeTile& tile(std::size_t k) const { return tiles_.at(k); }
  const std::vector<ModeTile>& tiles() const { return tiles_; }

  /// f_k(t_i) in continuous normalization, 1/sqrt(duration) on the support.
  double f(std::size_t k, std::size_t i) const;
  /// g_k(t_i) = f_k(reflection of t_i).
  double g(std::size_t k, std::size_t i) const;

  /// Discrete weight f_k(t_i) * sqrt(dt); the record is per-sample vacuum
  /// normalised, so projections are plain dot products with these weights.
  double weight(std::size_t k) const;

  /// Gram matrix of {f_0..f_{n-1}, g_0..g_{n-1}} under sum_i u(t_i) v(t_i) dt.
  Eigen::MatrixXd gram() const;

 private:
  std::vector<ModeTile> tiles_;
  std::size_t reflection_sum_;
  double sample_rate_;
  std::size_t n_samples_;
};

/// Throws Config when the ASE window cannot hold n_modes tiles of >= 2
/// samples each, or the RASE window is not its reflection.
TemporalModeBasis build_mode_basis(const SequenceConfig& config);
TemporalModeBasis build_mode_basis(const Timeline& timeline, std::size_t n_modes);

/// Physics of mode pair k: ASE gain excess decays as exp(-t_k/tau_ase),
/// recall efficiency dephases as exp(-4 dt_k / T2).
RasePhysicsParams mode_params(const SequenceConfig& config, const ModeTile& tile);

/// Measured covariance embedded in mode pair k (identity for warm runs).
Eigen::Matrix4d designed_measured_cov(const SequenceConfig& config,
                                      const ModeTile& tile);

struct HeterodyneRecord {
  std::vector<Sample> samples;
  double sample_rate = 0.0;
  std::vector<Window> windows;
  std::uint64_t shot_index = 0;

  bool operator==(const HeterodyneRecord&) const = default;
};

inline constexpr double kSaturationLevel = 1e3;

/// Holds everything derived from a config so shots are cheap to produce.
class ShotSynthesizer {
 public:
  explicit ShotSynthesizer(const SequenceConfig& config);

  const SequenceConfig& config() const { return config_; }
  const Timeline& timeline() const { return timeline_; }
  const TemporalModeBasis& basis() const { return basis_; }

  /// Pure function of (config, seed, shot_index).
  HeterodyneRecord shot(std::uint64_t shot_index) const;

 private:
  SequenceConfig config_;
  Timeline timeline_;
  TemporalModeBasis basis_;
  std::vector<Eigen::Matrix4d> roots_;
};

HeterodyneRecord synthesize_shot(const SequenceConfig& config,
                                 std::uint64_t shot_index);

/// n_shots records; identical for any thread count.
std::vector<HeterodyneRecord> synthesize_run(const SequenceConfig& config);

}  // namespace rase
