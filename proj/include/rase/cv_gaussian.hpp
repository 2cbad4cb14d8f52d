// Copyright 2026 The rase-echo Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Two-mode Gaussian algebra for the ASE (mode 1) / RASE (mode 2) pair.
//
// Quadrature order is (x1, p1, x2, p2). In the Intrinsic convention the
// vacuum has unit quadrature variance. Heterodyne detection adds one vacuum
// unit and halves, so the Measured vacuum is again the identity and the
// separability bound Var(u) + Var(v) >= 2 reads the same in both.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace rase {

enum class Convention { Intrinsic, Measured };

const char* to_string(Convention c);

class TwoModeGaussianState {
 public:
  /// The covariance is symmetrised on construction.
  TwoModeGaussianState(const Eigen::Matrix4d& cov, const Eigen::Vector4d& mean,
                       Convention convention);

  static TwoModeGaussianState vacuum(Convention convention);

  const Eigen::Matrix4d& cov() const { return cov_; }
  const Eigen::Vector4d& mean() const { return mean_; }
  Convention convention() const { return convention_; }

 private:
  Eigen::Matrix4d cov_;
  Eigen::Vector4d mean_;
  Convention convention_;
};

/// Physical knobs of the model. `excess` is a per-quadrature variance added
/// to the RASE arm, in measured units.
struct RasePhysicsParams {
  double alpha_l = 0.0;
  double eta = 0.0;
  double excess = 0.0;

  /// Throws Domain on any out-of-range field.
  void validate() const;
};

inline constexpr double kMaxOpticalDepth = 10.0;
inline constexpr double kPhysicalityTolerance = 1e-12;

/// Intensity gain e^{alpha_l} of an inverted medium of optical depth alpha_l.
double amplifier_gain(double alpha_l);

/// Two-mode-squeezed ASE/atom pair with the atomic mode read out through a
/// beamsplitter of transmissivity eta, plus additive RASE excess noise.
/// The x cross-covariance is -c and the p cross-covariance +c, so both
/// EPR combinations u = sqrt(b) x1 + sqrt(1-b) x2 and
/// v = sqrt(b) p1 - sqrt(1-b) p2 are squeezed.
TwoModeGaussianState ase_rase_state(const RasePhysicsParams& params);

/// Measured = (Intrinsic + I) / 2.
TwoModeGaussianState heterodyne_map(const TwoModeGaussianState& state);

struct PhysicalityReport {
  bool physical = false;
  double min_eigenvalue = 0.0;  // of cov + i*Omega
  std::string diagnostic;
};

PhysicalityReport check_physicality(const TwoModeGaussianState& state);

/// Var(u) + Var(v) for the weight b, from an arbitrary 4x4 covariance.
/// No convention check; used by estimators working on sample covariances.
double inseparability_from_cov(const Eigen::Matrix4d& cov, double b);

double inseparability_sum(const TwoModeGaussianState& state, double b);

struct InseparabilityMinimum {
  double b_star = 0.0;
  double s_star = 0.0;
};

/// Dense grid (step 1e-3) plus golden-section refinement; ties resolve to
/// the smaller b.
InseparabilityMinimum min_inseparability(const TwoModeGaussianState& state);

/// Bisects eta in [0, 1] (excess = 0) so that the minimum over b of S hits
/// target_dip. Throws Numeric naming the attainable range if it cannot.
double calibrate_eta(double alpha_l, double target_dip);

struct QuadratureDraw {
  double x1 = 0.0, p1 = 0.0, x2 = 0.0, p2 = 0.0;
};

/// i.i.d. zero-mean draws with covariance state.cov() through the symmetric
/// square root. Deterministic for a fixed seed.
std::vector<QuadratureDraw> sample_quadratures(const TwoModeGaussianState& state,
                                               std::size_t n_shots,
                                               std::uint64_t seed);

/// Symmetric PSD square root. Throws Numeric when an eigenvalue is below
/// -1e-12 * max(1, |lambda_max|).
Eigen::Matrix4d symmetric_sqrt(const Eigen::Matrix4d& m);

}  // namespace rase
