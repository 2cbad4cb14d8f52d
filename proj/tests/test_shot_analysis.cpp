// Copyright 2026 The rase-echo Authors
// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "rase/cv_gaussian.hpp"
#include "rase/error.hpp"
#include "rase/sequence_synth.hpp"
#include "rase/shot_analysis.hpp"

using namespace rase;

namespace {

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Config;
}

SequenceConfig config(double alpha_l, double eta, double excess, std::size_t shots,
                      bool warm = false) {
  SequenceConfig c;
  c.physics = {alpha_l, eta, excess};
  c.n_shots = shots;
  c.warm = warm;
  return c;
}

std::vector<QuadratureSample> to_samples(const std::vector<QuadratureDraw>& d) {
  std::vector<QuadratureSample> out(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) out[i] = {d[i].x1, d[i].p1, d[i].x2, d[i].p2, i, 0};
  return out;
}

std::vector<QuadratureSample> draw(double alpha_l, double eta, double excess, std::size_t n,
                                   std::uint64_t seed) {
  return to_samples(
      sample_quadratures(heterodyne_map(ase_rase_state({alpha_l, eta, excess})), n, seed));
}

}  // namespace

TEST_CASE("vacuum normalisation") {
  auto shots = synthesize_run(config(0.78, 0.5, 0.1, 50));
  const double s1 = normalize_to_vacuum(shots);
  CHECK(s1 == doctest::Approx(1.0).epsilon(0.02));
  CHECK(normalize_to_vacuum(shots) == doctest::Approx(1.0).epsilon(1e-12));

  for (auto& r : shots)
    for (auto& s : r.samples) s *= 3.0;
  CHECK(normalize_to_vacuum(shots) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  auto few = synthesize_run(config(0.78, 0.5, 0.1, 1));
  CHECK(kind_of([&] { normalize_to_vacuum(few); }) == ErrorKind::Config);
  CHECK(kind_of([&] { normalize_to_vacuum(shots, "nonexistent"); }) == ErrorKind::Config);

  for (auto& r : shots)
    for (auto& s : r.samples) s = 0.0;
  CHECK(kind_of([&] { normalize_to_vacuum(shots); }) == ErrorKind::Numeric);
  CHECK(kind_of([] { vacuum_scale(1.0, 999); }) == ErrorKind::Config);
  CHECK(vacuum_scale(8.0, 1000) == doctest::Approx(0.5));
}

TEST_CASE("phase reference") {
  // Estimator spread of a tone of amplitude A in unit-variance quadrature
  // noise over n samples: sqrt(1 / (2 n A^2)).
  SequenceConfig c = config(0.0, 0.0, 0.0, 400, true);
  const double n_ref = static_cast<double>(c.timeline().at(label::kReference).size());
  const double expected = std::sqrt(1.0 / (2.0 * n_ref * c.reference_amplitude * c.reference_amplitude));
  std::mt19937_64 eng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  double ss = 0.0;
  for (std::size_t i = 0; i < c.n_shots; ++i) {
    auto r = synthesize_shot(c, i);
    const double theta = u(eng);
    for (auto& s : r.samples) s *= std::polar(1.0, theta);
    const auto pr = apply_phase_reference(r);
    REQUIRE(pr.applied);
    CHECK(pr.vacuum_sigma == doctest::Approx(1.0).epsilon(0.1));
    ss += std::pow(std::remainder(pr.phase - theta, 2 * M_PI), 2);
    const auto again = apply_phase_reference(r);
    CHECK(std::abs(again.phase) <= 1e-12);
  }
  CHECK(std::sqrt(ss / c.n_shots) == doctest::Approx(expected).epsilon(0.15));

  c.reference_amplitude = 2.0;
  auto weak = synthesize_shot(c, 0);
  const auto before = weak;
  const auto pr = apply_phase_reference(weak);
  CHECK_FALSE(pr.applied);
  CHECK(pr.warning.find("rotation skipped") != std::string::npos);
  CHECK(weak == before);
}

TEST_CASE("variance trace") {
  auto shots = synthesize_run(config(0.78, 0.5, 0.1, 400, true));
  normalize_to_vacuum(shots);
  const VarianceTrace t = variance_trace(shots, 5e-6);
  REQUIRE(!t.time.empty());
  std::size_t checked = 0;
  for (std::size_t i = 0; i < t.time.size(); ++i) {
    if (t.sentinel[i] || t.region[i] == "reference" || t.region[i] == "echo") continue;
    CHECK(std::abs(t.var_sum[i] - 2.0) <= 5.0 * 2.0 / std::sqrt(t.samples[i]));
    ++checked;
  }
  CHECK(checked > 10);
  for (std::size_t i = 1; i < t.time.size(); ++i) CHECK(t.time[i] > t.time[i - 1]);

  auto rotated = shots;
  for (auto& r : rotated)
    for (auto& s : r.samples) s *= std::polar(1.0, 0.7);
  const VarianceTrace tr = variance_trace(rotated, 5e-6);
  for (std::size_t i = 0; i < t.time.size(); ++i)
    if (!t.sentinel[i]) CHECK(tr.var_sum[i] == doctest::Approx(t.var_sum[i]).epsilon(1e-10));

  CHECK(kind_of([&] { variance_trace(shots, 1e-7); }) == ErrorKind::Config);
}

TEST_CASE("spectral power") {
  auto shots = synthesize_run(config(0.78, 0.5, 0.1, 400, true));
  normalize_to_vacuum(shots);
  const Spectrum vac = spectral_power(shots, label::kVacuum);
  const double total = std::accumulate(vac.power.begin(), vac.power.end(), 0.0);
  CHECK(total == doctest::Approx(vac.mean_square * vac.power.size()).epsilon(1e-10));
  for (std::size_t i = 1; i < vac.frequency.size(); ++i) CHECK(vac.frequency[i] > vac.frequency[i - 1]);
  for (double p : vac.power) CHECK(std::abs(p - 2.0) <= 5.0 * 2.0 / std::sqrt(400.0));

  const Timeline tl = shots.front().windows.empty() ? Timeline() : config(0, 0, 0, 1).timeline();
  const Window& pi1 = tl.at(label::kPi1);
  CHECK(kind_of([&] { SpectrumAccumulator(tl, {"x", pi1.start - 20, pi1.end}); }) ==
        ErrorKind::Config);
  CHECK(kind_of([&] { SpectrumAccumulator(tl, {"x", 0, 10}); }) == ErrorKind::Config);

  // The echo window holds vacuum once the second pulse is disabled.
  SequenceConfig off = config(0.78, 0.5, 0.1, 200);
  off.pi2_enabled = false;
  const Spectrum echo_off = spectral_power(synthesize_run(off), label::kEcho);
  const Spectrum echo_on = spectral_power(synthesize_run(config(0.78, 0.5, 0.1, 200)), label::kEcho);
  CHECK(echo_off.mean_square == doctest::Approx(2.0).epsilon(0.1));
  CHECK(echo_on.mean_square > 50.0);
}

TEST_CASE("cross-correlation") {
  auto warm = synthesize_run(config(0.78, 0.5, 0.1, 2000, true));
  normalize_to_vacuum(warm);
  const CrossCorrelation w = cross_correlation(warm);
  REQUIRE(w.tau.size() == w.magnitude.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < w.tau.size(); ++i) worst = std::max(worst, w.magnitude[i] / w.std_error[i]);
  CHECK(worst <= 4.0);

  const Timeline tl = config(0, 0, 0, 1).timeline();
  CHECK(kind_of([&] { CrossCorrelationAccumulator(tl, label::kAse, label::kRase, 2e-7); }) ==
        ErrorKind::Config);
  CHECK(kind_of([&] { CrossCorrelationAccumulator(tl, label::kAse, label::kAse); }) ==
        ErrorKind::Config);

  // Zero-lag height is twice the measured cross covariance.
  const SequenceConfig c = config(0.78, 0.5415939886947765, 0.23629445309964023, 20000);
  auto shots = synthesize_run(c);
  normalize_to_vacuum(shots);
  for (auto& r : shots) apply_phase_reference(r);
  const CrossCorrelation cc = cross_correlation(shots);
  const CorrelationPeak pk = correlation_peak(cc);
  const double two_c = -2.0 * designed_measured_cov(c, build_mode_basis(c).tile(0))(0, 2);
  CHECK(std::abs(pk.tau) <= 0.5e-6);
  CHECK(std::abs(pk.height - two_c) <= 4.0 * pk.height_se);
  CHECK(pk.fwhm_magnitude == doctest::Approx(5.9e-6).epsilon(0.1));
}

TEST_CASE("inseparability curve") {
  const auto grid = default_b_grid();
  CHECK(grid.size() == 101);
  CHECK(grid.back() == 1.0);

  const auto vac = draw(0.0, 0.0, 0.0, 5000, 1);
  const auto curve = inseparability_curve(vac, grid, 0.95, {300, 2});
  std::size_t inside = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(curve.ci_low[i] <= curve.s_values[i]);
    CHECK(curve.s_values[i] <= curve.ci_high[i]);
    CHECK(std::abs(curve.s_values[i] - 2.0) <= 0.15);
    if (curve.ci_low[i] <= 2.0 && 2.0 <= curve.ci_high[i]) ++inside;
  }
  CHECK(inside >= 85);

  const auto again = inseparability_curve(vac, grid, 0.95, {300, 2});
  CHECK(again.ci_low == curve.ci_low);

  const std::vector<QuadratureSample> few(vac.begin(), vac.begin() + 99);
  CHECK(kind_of([&] { inseparability_curve(few, grid, 0.95); }) == ErrorKind::Domain);
  std::vector<QuadratureSample> flat(200);
  CHECK(kind_of([&] { inseparability_curve(flat, grid, 0.95); }) == ErrorKind::Numeric);
  CHECK(kind_of([&] { inseparability_curve(vac, grid, 1.5); }) == ErrorKind::Domain);
  const std::vector<double> bad{0.5, 0.2};
  CHECK(kind_of([&] { inseparability_curve(vac, bad, 0.95); }) == ErrorKind::Domain);
}

TEST_CASE("uncorrelated input gives a straight line above 2") {
  const auto s = draw(0.78, 0.0, 0.343724, 20000, 4);
  const auto grid = default_b_grid(0.05);
  const auto curve = inseparability_curve(s, grid, 0.95, {400, 5});
  const Eigen::Matrix4d cov = heterodyne_map(ase_rase_state({0.78, 0.0, 0.343724})).cov();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double b = grid[i];
    const double line = b * (cov(0, 0) + cov(1, 1)) + (1 - b) * (cov(2, 2) + cov(3, 3));
    CHECK(curve.ci_low[i] >= 2.0);
    CHECK(std::abs(curve.s_values[i] - line) <= 4.0 * curve.sigma_band[i]);
  }
}

TEST_CASE("dip significance") {
  double sum = 0.0;
  for (std::uint64_t r = 0; r < 40; ++r) {
    const auto v = draw(0.0, 0.0, 0.0, 2000, 100 + r);
    sum += dip_significance(v, 0.5, {200, r}).confidence_below_2;
  }
  CHECK(std::abs(sum / 40.0 - 0.5) <= 0.15);

  const auto strong = draw(0.78, 0.5415939886947765, 0.23629445309964023, 100000, 8);
  const auto st = dip_significance(strong, 0.5, {500, 9});
  CHECK(st.confidence_below_2 > 0.999);

  const double eta = calibrate_eta(0.046, 1.94);
  const auto thin = draw(0.046, eta, 0.0, 100000, 10);
  const auto b_star = min_inseparability(heterodyne_map(ase_rase_state({0.046, eta, 0.0}))).b_star;
  const auto th = dip_significance(thin, b_star, {500, 11});
  CHECK(std::abs(th.s_hat - 1.94) <= 0.01);
  CHECK(th.sigma == doctest::Approx(0.0063).epsilon(0.2));

  CHECK(kind_of([&] { dip_significance(thin, 1.2); }) == ErrorKind::Domain);
  CHECK(kind_of([&] { dip_significance(thin, 0.5, {1, 0}); }) == ErrorKind::Domain);
}

TEST_CASE("sample covariance errors") {
  const Eigen::Matrix4d id = Eigen::Matrix4d::Identity();
  const Eigen::Matrix4d se = covariance_standard_errors(id, 100);
  CHECK(se(0, 0) == doctest::Approx(std::sqrt(2.0 / 100)));
  CHECK(se(0, 1) == doctest::Approx(std::sqrt(1.0 / 100)));
  const std::vector<QuadratureSample> one(1);
  CHECK(kind_of([&] { sample_covariance(one); }) == ErrorKind::Domain);
}

TEST_CASE("exponential decay fit") {
  VarianceTrace t;
  for (int i = 0; i < 40; ++i) {
    t.time.push_back(70e-6 + i * 5e-6);
    t.var_sum.push_back(2.0 + 40.0 * std::exp(-t.time.back() / 378e-6));
    t.samples.push_back(1e5);
    t.region.push_back(i < 30 ? "ase" : "tail");
    t.sentinel.push_back(false);
  }
  const DecayFit f = fit_exponential_decay(t, 2.0);
  CHECK(f.tau == doctest::Approx(378e-6).epsilon(0.01));
  CHECK(f.amplitude == doctest::Approx(40.0).epsilon(0.01));
  CHECK(f.bins_used == 30);
  CHECK(kind_of([&] { fit_exponential_decay(t, 100.0); }) == ErrorKind::Numeric);
  VarianceTrace g = t;
  for (std::size_t i = 0; i < g.time.size(); ++i) g.var_sum[i] = 2.0 + std::exp(g.time[i] / 1e-4);
  CHECK(kind_of([&] { fit_exponential_decay(g, 2.0); }) == ErrorKind::Numeric);
}

TEST_CASE("spectral FWHM fit") {
  Spectrum s;
  s.n_shots = 100000;
  const double sigma = 150e3 / (2.0 * std::sqrt(2.0 * std::log(2.0)));
  for (int i = -500; i < 500; ++i) {
    const double f = i * 1e3;
    s.frequency.push_back(f);
    s.power.push_back(2.0 + 30.0 * std::exp(-0.5 * std::pow((f - 5e3) / sigma, 2)));
  }
  const FwhmFit fit = fit_spectral_fwhm(s, 2.0);
  CHECK(fit.fwhm == doctest::Approx(150e3).epsilon(0.01));
  CHECK(fit.peak_frequency == doctest::Approx(5e3).epsilon(0.05));

  Spectrum flat = s;
  std::fill(flat.power.begin(), flat.power.end(), 2.0);
  CHECK(kind_of([&] { fit_spectral_fwhm(flat, 2.0); }) == ErrorKind::Numeric);
}
