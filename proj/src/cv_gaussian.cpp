// Copyright 2026 The rase-echo Authors
// SPDX-License-Identifier: Apache-2.0
#include "rase/cv_gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <random>
#include <sstream>

#include "rase/error.hpp"
#include "rase/parallel.hpp"

namespace rase {

const char* to_string(Convention c) {
  return c == Convention::Intrinsic ? "intrinsic" : "measured";
}

TwoModeGaussianState::TwoModeGaussianState(const Eigen::Matrix4d& cov,
                                           const Eigen::Vector4d& mean,
                                           Convention convention)
    : cov_(0.5 * (cov + cov.transpose())), mean_(mean), convention_(convention) {
  if (!cov_.allFinite() || !mean_.allFinite())
    fail(ErrorKind::Numeric, "state covariance or mean is not finite");
}

TwoModeGaussianState TwoModeGaussianState::vacuum(Convention convention) {
  return {Eigen::Matrix4d::Identity(), Eigen::Vector4d::Zero(), convention};
}

void RasePhysicsParams::validate() const {
  if (!(alpha_l >= 0.0 && alpha_l <= kMaxOpticalDepth)) {
    std::ostringstream os;
    os << "alpha_l=" << alpha_l << " outside [0, " << kMaxOpticalDepth << "]";
    fail(ErrorKind::Domain, os.str());
  }
  if (!(eta >= 0.0 && eta <= 1.0)) {
    std::ostringstream os;
    os << "eta=" << eta << " outside [0, 1]";
    fail(ErrorKind::Domain, os.str());
  }
  if (!(excess >= 0.0) || !std::isfinite(excess)) {
    std::ostringstream os;
    os << "excess=" << excess << " must be finite and >= 0";
    fail(ErrorKind::Domain, os.str());
  }
}

double amplifier_gain(double alpha_l) {
  if (!(alpha_l >= 0.0 && alpha_l <= kMaxOpticalDepth)) {
    std::ostringstream os;
    os << "alpha_l=" << alpha_l << " outside [0, " << kMaxOpticalDepth << "]";
    fail(ErrorKind::Domain, os.str());
  }
  return std::exp(alpha_l);
}

TwoModeGaussianState ase_rase_state(const RasePhysicsParams& params) {
  params.validate();
  const double g = amplifier_gain(params.alpha_l);
  const double c = 2.0 * std::sqrt(params.eta * g * (g - 1.0));
  Eigen::Matrix4d cov = Eigen::Matrix4d::Zero();
  cov(0, 0) = cov(1, 1) = 2.0 * g - 1.0;
  cov(2, 2) = cov(3, 3) = 1.0 + 2.0 * params.eta * (g - 1.0) + 2.0 * params.excess;
  cov(0, 2) = cov(2, 0) = -c;
  cov(1, 3) = cov(3, 1) = c;
  TwoModeGaussianState state(cov, Eigen::Vector4d::Zero(), Convention::Intrinsic);
  if (auto rep = check_physicality(state); !rep.physical)
    fail(ErrorKind::Numeric, "invalid state: " + rep.diagnostic);
  return state;
}

TwoModeGaussianState heterodyne_map(const TwoModeGaussianState& state) {
  if (state.convention() != Convention::Intrinsic)
    fail(ErrorKind::Convention, "heterodyne_map expects an intrinsic state");
  return {0.5 * (state.cov() + Eigen::Matrix4d::Identity()), 0.5 * state.mean(),
          Convention::Measured};
}

PhysicalityReport check_physicality(const TwoModeGaussianState& state) {
  PhysicalityReport rep;
  if (state.convention() != Convention::Intrinsic) {
    rep.diagnostic = "physicality is defined for intrinsic states only";
    rep.min_eigenvalue = std::numeric_limits<double>::quiet_NaN();
    return rep;
  }
  Eigen::Matrix4cd h = state.cov().cast<std::complex<double>>();
  const std::complex<double> i1(0.0, 1.0);
  for (int m = 0; m < 2; ++m) {
    h(2 * m, 2 * m + 1) += i1;
    h(2 * m + 1, 2 * m) -= i1;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(h, Eigen::EigenvaluesOnly);
  rep.min_eigenvalue = es.eigenvalues().minCoeff();
  rep.physical = rep.min_eigenvalue >= -kPhysicalityTolerance;
  std::ostringstream os;
  os << "min eigenvalue of cov + i*Omega = " << rep.min_eigenvalue;
  rep.diagnostic = os.str();
  return rep;
}

double inseparability_from_cov(const Eigen::Matrix4d& cov, double b) {
  const double w = std::sqrt(b * (1.0 - b));
  const double var_u = b * cov(0, 0) + (1.0 - b) * cov(2, 2) + 2.0 * w * cov(0, 2);
  const double var_v = b * cov(1, 1) + (1.0 - b) * cov(3, 3) - 2.0 * w * cov(1, 3);
  return var_u + var_v;
}

double inseparability_sum(const TwoModeGaussianState& state, double b) {
  if (state.convention() != Convention::Measured)
    fail(ErrorKind::Convention, "inseparability_sum expects a measured state");
  if (!(b >= 0.0 && b <= 1.0)) {
    std::ostringstream os;
    os << "b=" << b << " outside [0, 1]";
    fail(ErrorKind::Domain, os.str());
  }
  return inseparability_from_cov(state.cov(), b);
}

InseparabilityMinimum min_inseparability(const TwoModeGaussianState& state) {
  if (state.convention() != Convention::Measured)
    fail(ErrorKind::Convention, "min_inseparability expects a measured state");
  const auto& cov = state.cov();
  auto s = [&](double b) { return inseparability_from_cov(cov, b); };

  constexpr int kGrid = 1000;
  int best = 0;
  double best_s = s(0.0);
  for (int i = 1; i <= kGrid; ++i) {
    double v = s(static_cast<double>(i) / kGrid);
    if (v < best_s) {
      best_s = v;
      best = i;
    }
  }

  double lo = std::max(0.0, (best - 1.0) / kGrid);
  double hi = std::min(1.0, (best + 1.0) / kGrid);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = s(c), fd = s(d);
  while (hi - lo > 1e-9) {
    if (fc <= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = s(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = s(d);
    }
  }
  InseparabilityMinimum out{0.5 * (lo + hi), s(0.5 * (lo + hi))};
  // Grid point (including an endpoint) wins ties against the refined value.
  const double grid_b = static_cast<double>(best) / kGrid;
  if (best_s <= out.s_star) out = {grid_b, best_s};
  return out;
}

namespace {
double dip_at(double alpha_l, double eta) {
  auto st = heterodyne_map(ase_rase_state({alpha_l, eta, 0.0}));
  return min_inseparability(st).s_star;
}
}  // namespace

double calibrate_eta(double alpha_l, double target_dip) {
  if (!(alpha_l > 0.0 && alpha_l <= kMaxOpticalDepth)) {
    std::ostringstream os;
    os << "calibration needs 0 < alpha_l <= " << kMaxOpticalDepth << ", got "
       << alpha_l;
    fail(ErrorKind::Domain, os.str());
  }
  const double deepest = dip_at(alpha_l, 1.0);
  if (!(target_dip >= deepest && target_dip < 2.0)) {
    std::ostringstream os;
    os.precision(6);
    os << "target dip " << target_dip << " unreachable at alpha_l=" << alpha_l
       << "; attainable range is [" << deepest << ", 2)";
    fail(ErrorKind::Numeric, os.str());
  }
  double lo = 0.0, hi = 1.0;  // dip(lo) > target >= dip(hi)
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    double mid = 0.5 * (lo + hi);
    if (dip_at(alpha_l, mid) > target_dip)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

Eigen::Matrix4d symmetric_sqrt(const Eigen::Matrix4d& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(0.5 * (m + m.transpose()));
  Eigen::Vector4d lam = es.eigenvalues();
  const double scale = std::max(1.0, lam.cwiseAbs().maxCoeff());
  if (lam.minCoeff() < -1e-12 * scale) {
    std::ostringstream os;
    os << "covariance is not positive semidefinite (eigenvalue " << lam.minCoeff()
       << ")";
    fail(ErrorKind::Numeric, os.str());
  }
  lam = lam.cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

std::vector<QuadratureDraw> sample_quadratures(const TwoModeGaussianState& state,
                                               std::size_t n_shots,
                                               std::uint64_t seed) {
  if (state.convention() != Convention::Measured)
    fail(ErrorKind::Convention, "sample_quadratures expects a measured state");
  if (n_shots == 0) fail(ErrorKind::Domain, "n_shots must be >= 1");
  const Eigen::Matrix4d root = symmetric_sqrt(state.cov());
  const Eigen::Vector4d mean = state.mean();

  constexpr std::size_t kBlock = 4096;
  std::vector<QuadratureDraw> out(n_shots);
  const std::size_t n_blocks = (n_shots + kBlock - 1) / kBlock;
  parallel_for(n_blocks, [&](std::size_t blk) {
    auto eng = stream_engine(seed, stream_tag::kSample, blk);
    std::normal_distribution<double> normal;
    const std::size_t end = std::min(n_shots, (blk + 1) * kBlock);
    for (std::size_t i = blk * kBlock; i < end; ++i) {
      Eigen::Vector4d z;
      for (int k = 0; k < 4; ++k) z[k] = normal(eng);
      Eigen::Vector4d v = mean + root * z;
      out[i] = {v[0], v[1], v[2], v[3]};
    }
  });
  return out;
}

}  // namespace rase
