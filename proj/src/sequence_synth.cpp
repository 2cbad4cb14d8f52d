// Copyright 2026 The rase-echo Authors
// SPDX-License-Identifier: Apache-2.0
#include "rase/sequence_synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "rase/error.hpp"
#include "rase/parallel.hpp"

namespace rase {

bool is_sentinel_label(std::string_view l) {
  return l == label::kPi1 || l == label::kPi2;
}

Timeline::Timeline(std::vector<Window> windows, std::size_t n_samples,
                   double sample_rate)
    : windows_(std::move(windows)), n_samples_(n_samples), sample_rate_(sample_rate) {
  if (!(sample_rate_ > 0.0)) fail(ErrorKind::Config, "sample rate must be > 0");
  std::set<std::string> seen;
  std::size_t prev_end = 0;
  for (const auto& w : windows_) {
    if (w.label.empty() || w.label.size() > 16)
      fail(ErrorKind::Config, "window label '" + w.label + "' must be 1..16 chars");
    if (!seen.insert(w.label).second)
      fail(ErrorKind::Config, "duplicate window label '" + w.label + "'");
    if (w.end <= w.start || w.end > n_samples_)
      fail(ErrorKind::Config, "window '" + w.label + "' is empty or out of range");
    if (w.start < prev_end)
      fail(ErrorKind::Config, "window '" + w.label + "' overlaps or is out of order");
    prev_end = w.end;
  }
}

const Window* Timeline::find(std::string_view l) const {
  for (const auto& w : windows_)
    if (w.label == l) return &w;
  return nullptr;
}

const Window& Timeline::at(std::string_view l) const {
  if (const Window* w = find(l)) return *w;
  fail(ErrorKind::Config, "timeline has no '" + std::string(l) + "' window");
}

bool Timeline::is_sentinel(std::size_t i) const {
  for (const auto& w : windows_)
    if (w.contains(i) && is_sentinel_label(w.label)) return true;
  return false;
}

std::size_t Timeline::reflection_sum() const {
  const Window& pi2 = at(label::kPi2);
  return pi2.start + pi2.end - 1;
}

double Timeline::tau(std::size_t i) const {
  return (2.0 * static_cast<double>(i) - static_cast<double>(reflection_sum())) /
         (2.0 * sample_rate_);
}

void SequenceConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
      fail(ErrorKind::Config, std::string(name) + " must be > 0");
  };
  positive(sample_rate, "sample_rate");
  positive(reference_duration, "reference duration");
  positive(vacuum_duration, "vacuum duration");
  positive(pulse_width, "pulse_width");
  positive(signal_bandwidth, "signal_bandwidth");
  positive(ase_decay_tau, "ase_decay_tau");
  positive(t2, "t2");
  if (!(guard >= 0.0)) fail(ErrorKind::Config, "guard must be >= 0");
  if (!(tail_duration > 0.0)) fail(ErrorKind::Config, "tail duration must be > 0");
  if (!(lo_phase_drift >= 0.0)) fail(ErrorKind::Config, "lo_phase_drift must be >= 0");
  if (n_modes < 1) fail(ErrorKind::Config, "n_modes must be >= 1");
  if (n_shots < 1) fail(ErrorKind::Config, "n_shots must be >= 1");
  if (tile_samples() < 2)
    fail(ErrorKind::Config, "mode duration must cover >= 2 samples; raise "
                            "sample_rate or lower signal_bandwidth");
  try {
    physics.validate();
  } catch (const Error& e) {
    fail(ErrorKind::Config, e.what());
  }
}

std::size_t SequenceConfig::tile_samples() const {
  return static_cast<std::size_t>(
      std::llround(kSincSquaredFwhm * sample_rate / signal_bandwidth));
}

Timeline SequenceConfig::timeline() const {
  validate();
  auto n = [&](double seconds, const char* what, std::size_t min) {
    auto v = static_cast<std::size_t>(std::llround(seconds * sample_rate));
    if (v < min) {
      std::ostringstream os;
      os << what << " spans " << v << " samples, need >= " << min;
      fail(ErrorKind::Config, os.str());
    }
    return v;
  };
  const std::size_t n_ref = n(reference_duration, "reference window", 1);
  const std::size_t n_vac = n(vacuum_duration, "vacuum window", 1);
  const std::size_t n_pulse = n(pulse_width, "pulse", 1);
  const std::size_t n_guard = n(guard, "guard", 0);
  const std::size_t n_tail = n(tail_duration, "tail window", 1);
  const std::size_t n_mode = n_modes * tile_samples();

  std::vector<Window> w;
  std::size_t t = 0;
  auto push = [&](std::string_view l, std::size_t len) {
    w.push_back({std::string(l), t, t + len});
    t += len;
  };
  push(label::kReference, n_ref);
  push(label::kVacuum, n_vac);
  push(label::kPi1, n_pulse);
  t += n_guard;
  push(label::kAse, n_mode);
  t += n_guard;
  push(label::kPi2, n_pulse);
  t += n_guard;
  push(label::kRase, n_mode);
  t += n_guard;
  push(label::kEcho, n_pulse);
  push(label::kTail, n_tail);
  return Timeline(std::move(w), t, sample_rate);
}

TemporalModeBasis::TemporalModeBasis(std::vector<ModeTile> tiles,
                                     std::size_t reflection_sum, double sample_rate,
                                     std::size_t n_samples)
    : tiles_(std::move(tiles)),
      reflection_sum_(reflection_sum),
      sample_rate_(sample_rate),
      n_samples_(n_samples) {}

double TemporalModeBasis::f(std::size_t k, std::size_t i) const {
  const ModeTile& t = tiles_.at(k);
  if (i < t.ase_start || i >= t.ase_start + t.length) return 0.0;
  return std::sqrt(sample_rate_ / static_cast<double>(t.length));
}

double TemporalModeBasis::g(std::size_t k, std::size_t i) const {
  if (i > reflection_sum_) return 0.0;
  return f(k, reflection_sum_ - i);
}

double TemporalModeBasis::weight(std::size_t k) const {
  return 1.0 / std::sqrt(static_cast<double>(tiles_.at(k).length));
}

Eigen::MatrixXd TemporalModeBasis::gram() const {
  const std::size_t n = tiles_.size();
  const double dt = 1.0 / sample_rate_;
  Eigen::MatrixXd g_mat = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  auto value = [&](std::size_t m, std::size_t i) {
    return m < n ? f(m, i) : g(m - n, i);
  };
  for (std::size_t a = 0; a < 2 * n; ++a)
    for (std::size_t b = a; b < 2 * n; ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < n_samples_; ++i) s += value(a, i) * value(b, i);
      g_mat(a, b) = g_mat(b, a) = s * dt;
    }
  return g_mat;
}

TemporalModeBasis build_mode_basis(const Timeline& timeline, std::size_t n_modes) {
  if (n_modes < 1) fail(ErrorKind::Config, "n_modes must be >= 1");
  const Window& ase = timeline.at(label::kAse);
  const Window& rase = timeline.at(label::kRase);
  const Window& pi1 = timeline.at(label::kPi1);
  const std::size_t r = timeline.reflection_sum();
  if (ase.size() % n_modes != 0 || ase.size() / n_modes < 2) {
    std::ostringstream os;
    os << "ASE window of " << ase.size() << " samples is not divisible into "
       << n_modes << " tiles of >= 2 samples";
    fail(ErrorKind::Config, os.str());
  }
  if (rase.size() != ase.size() || r < ase.end - 1 || r - (ase.end - 1) != rase.start)
    fail(ErrorKind::Config, "RASE window is not the reflection of the ASE window "
                            "about the pi2 centre");
  const std::size_t m = ase.size() / n_modes;
  const double fs = timeline.sample_rate();
  const double pi1_centre = 0.5 * static_cast<double>(pi1.start + pi1.end - 1);
  std::vector<ModeTile> tiles;
  for (std::size_t k = 0; k < n_modes; ++k) {
    ModeTile t;
    t.ase_start = ase.start + k * m;
    t.length = m;
    t.rase_start = r - (t.ase_start + m - 1);
    const double centre = static_cast<double>(t.ase_start) + 0.5 * (m - 1.0);
    t.since_pi1 = (centre - pi1_centre) / fs;
    t.before_pi2 = (0.5 * static_cast<double>(r) - centre) / fs;
    tiles.push_back(t);
  }
  return TemporalModeBasis(std::move(tiles), r, fs, timeline.n_samples());
}

TemporalModeBasis build_mode_basis(const SequenceConfig& config) {
  return build_mode_basis(config.timeline(), config.n_modes);
}

RasePhysicsParams mode_params(const SequenceConfig& config, const ModeTile& tile) {
  const double g = amplifier_gain(config.physics.alpha_l);
  const double g_k = 1.0 + (g - 1.0) * std::exp(-tile.since_pi1 / config.ase_decay_tau);
  RasePhysicsParams p;
  p.alpha_l = std::log(g_k);
  if (config.pi2_enabled) {
    p.eta = config.physics.eta * std::exp(-4.0 * tile.before_pi2 / config.t2);
    p.excess = config.physics.excess;
  }
  return p;
}

Eigen::Matrix4d designed_measured_cov(const SequenceConfig& config,
                                      const ModeTile& tile) {
  if (config.warm) return Eigen::Matrix4d::Identity();
  return heterodyne_map(ase_rase_state(mode_params(config, tile))).cov();
}

ShotSynthesizer::ShotSynthesizer(const SequenceConfig& config)
    : config_(config),
      timeline_(config.timeline()),
      basis_(build_mode_basis(timeline_, config.n_modes)) {
  if (!config_.warm) {
    for (const auto& tile : basis_.tiles()) {
      Eigen::Matrix4d cov = designed_measured_cov(config_, tile);
      try {
        roots_.push_back(symmetric_sqrt(cov));
      } catch (const Error& e) {
        fail(ErrorKind::Numeric, std::string("synthesis: ") + e.what());
      }
    }
  }
}

HeterodyneRecord ShotSynthesizer::shot(std::uint64_t shot_index) const {
  auto eng = stream_engine(config_.seed, stream_tag::kShot, shot_index);
  std::normal_distribution<double> normal;

  const double phase =
      config_.lo_phase_drift > 0.0 ? config_.lo_phase_drift * normal(eng) : 0.0;

  HeterodyneRecord rec;
  rec.sample_rate = timeline_.sample_rate();
  rec.windows = timeline_.windows();
  rec.shot_index = shot_index;
  rec.samples.resize(timeline_.n_samples());
  for (auto& s : rec.samples) {
    const double re = normal(eng);
    s = Sample(re, normal(eng));
  }

  // Replace the floor's component along each mode function by the designed
  // joint draw. The RASE coefficient is stored conjugated so that the
  // conjugated g_k projection returns (x2, p2).
  auto embed = [&](std::size_t start, std::size_t len, Sample amp) {
    const double w = 1.0 / std::sqrt(static_cast<double>(len));
    Sample proj(0.0, 0.0);
    for (std::size_t i = start; i < start + len; ++i) proj += rec.samples[i];
    proj *= w;
    const Sample delta = (amp - proj) * w;
    for (std::size_t i = start; i < start + len; ++i) rec.samples[i] += delta;
  };
  if (!config_.warm) {
    for (std::size_t k = 0; k < basis_.size(); ++k) {
      Eigen::Vector4d z;
      for (int j = 0; j < 4; ++j) z[j] = normal(eng);
      const Eigen::Vector4d v = roots_[k] * z;
      const ModeTile& t = basis_.tile(k);
      embed(t.ase_start, t.length, Sample(v[0], v[1]));
      embed(t.rase_start, t.length, Sample(v[2], -v[3]));
    }
  }

  const Window& ref = timeline_.at(label::kReference);
  for (std::size_t i = ref.start; i < ref.end; ++i)
    rec.samples[i] += config_.reference_amplitude;

  if (!config_.warm && config_.pi2_enabled) {
    const Window& echo = timeline_.at(label::kEcho);
    const double centre = 0.5 * static_cast<double>(echo.start + echo.end - 1);
    const double width = std::max(1.0, echo.size() / 6.0);
    for (std::size_t i = echo.start; i < echo.end; ++i) {
      const double u = (static_cast<double>(i) - centre) / width;
      rec.samples[i] += config_.echo_amplitude * std::exp(-0.5 * u * u);
    }
  }

  if (phase != 0.0) {
    const Sample rot = std::polar(1.0, phase);
    for (auto& s : rec.samples) s *= rot;
  }

  for (const auto& w : timeline_.windows()) {
    if (!is_sentinel_label(w.label)) continue;
    if (w.label == label::kPi2 && !config_.pi2_enabled) continue;
    for (std::size_t i = w.start; i < w.end; ++i) {
      const double ramp = kSaturationLevel * static_cast<double>(i - w.start + 1) /
                          static_cast<double>(w.size());
      rec.samples[i] = Sample(ramp, ramp);
    }
  }
  return rec;
}

HeterodyneRecord synthesize_shot(const SequenceConfig& config,
                                 std::uint64_t shot_index) {
  return ShotSynthesizer(config).shot(shot_index);
}

std::vector<HeterodyneRecord> synthesize_run(const SequenceConfig& config) {
  config.validate();
  ShotSynthesizer synth(config);
  std::vector<HeterodyneRecord> out(config.n_shots);
  parallel_for(config.n_shots, [&](std::size_t i) { out[i] = synth.shot(i); });
  return out;
}

}  // namespace rase
