// Copyright 2026 The rase-echo Authors
// SPDX-License-Identifier: Apache-2.0
#include "rase/shot_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "rase/cv_gaussian.hpp"
#include "rase/error.hpp"
#include "rase/fft.hpp"
#include "rase/parallel.hpp"

namespace rase {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const Window& window_of(const HeterodyneRecord& rec, std::string_view l) {
  for (const auto& w : rec.windows)
    if (w.label == l) return w;
  fail(ErrorKind::Config, "record has no '" + std::string(l) + "' window");
}

Timeline timeline_of(std::span<const HeterodyneRecord> shots) {
  if (shots.empty()) fail(ErrorKind::Config, "no shots to analyse");
  const auto& r = shots.front();
  return Timeline(r.windows, r.samples.size(), r.sample_rate);
}

bool overlaps_sentinel(const Timeline& t, const Window& w) {
  for (const auto& s : t.windows())
    if (is_sentinel_label(s.label) && s.start < w.end && w.start < s.end) return true;
  return false;
}

}  // namespace

// ---------------------------------------------------------------------------

double vacuum_scale(double pooled_vacuum_variance, std::size_t total_samples) {
  if (total_samples < 1000) {
    std::ostringstream os;
    os << "vacuum window holds " << total_samples
       << " samples across shots; need >= 1000";
    fail(ErrorKind::Config, os.str());
  }
  if (!(pooled_vacuum_variance >= 1e-6))
    fail(ErrorKind::Numeric, "vacuum variance below 1e-6: dead input");
  return std::sqrt(2.0 / pooled_vacuum_variance);
}

double pooled_variance(std::span<const HeterodyneRecord> shots, const Window& window) {
  if (shots.empty()) fail(ErrorKind::Config, "no shots");
  VarianceAccumulator acc(shots.front().samples.size());
  for (const auto& s : shots) acc.add(s);
  return acc.pooled(window);
}

double normalize_to_vacuum(std::span<HeterodyneRecord> shots, std::string_view vacuum_label) {
  if (shots.empty()) fail(ErrorKind::Config, "no shots to normalise");
  const Window* vac = nullptr;
  for (const auto& w : shots.front().windows)
    if (w.label == vacuum_label) vac = &w;
  if (!vac || vac->size() == 0)
    fail(ErrorKind::Config, "empty or missing vacuum window '" + std::string(vacuum_label) + "'");
  const Window window = *vac;
  const double pooled = pooled_variance(shots, window);
  const double scale = vacuum_scale(pooled, window.size() * shots.size());
  for (auto& rec : shots)
    for (auto& s : rec.samples) s *= scale;
  return scale;
}

PhaseReference apply_phase_reference(HeterodyneRecord& shot, std::string_view reference_label) {
  const Window& ref = window_of(shot, reference_label);
  PhaseReference out;
  std::complex<double> mean(0.0, 0.0);
  for (std::size_t i = ref.start; i < ref.end; ++i) mean += shot.samples[i];
  mean /= static_cast<double>(ref.size());
  out.amplitude = std::abs(mean);
  out.phase = std::arg(mean);

  for (const auto& w : shot.windows) {
    if (w.label != label::kVacuum || w.size() < 2) continue;
    std::complex<double> m(0.0, 0.0);
    for (std::size_t i = w.start; i < w.end; ++i) m += shot.samples[i];
    m /= static_cast<double>(w.size());
    double ss = 0.0;
    for (std::size_t i = w.start; i < w.end; ++i) ss += std::norm(shot.samples[i] - m);
    out.vacuum_sigma = std::sqrt(ss / (2.0 * (w.size() - 1)));
  }

  if (out.amplitude < kMinReferenceSnr * out.vacuum_sigma) {
    std::ostringstream os;
    os << "shot " << shot.shot_index << ": reference amplitude " << out.amplitude
       << " below " << kMinReferenceSnr << "x vacuum sigma; rotation skipped";
    out.warning = os.str();
    return out;
  }
  const std::complex<double> rot = std::polar(1.0, -out.phase);
  for (auto& s : shot.samples) s *= rot;
  out.applied = true;
  return out;
}

// ---------------------------------------------------------------------------

VarianceAccumulator::VarianceAccumulator(std::size_t n_samples)
    : sum_(n_samples), sum_sq_(n_samples, 0.0) {}

void VarianceAccumulator::add(const HeterodyneRecord& shot) {
  if (shot.samples.size() != sum_.size())
    fail(ErrorKind::Config, "record length differs from accumulator length");
  for (std::size_t i = 0; i < sum_.size(); ++i) {
    sum_[i] += shot.samples[i];
    sum_sq_[i] += std::norm(shot.samples[i]);
  }
  ++n_shots_;
}

void VarianceAccumulator::merge(const VarianceAccumulator& other) {
  for (std::size_t i = 0; i < sum_.size(); ++i) {
    sum_[i] += other.sum_[i];
    sum_sq_[i] += other.sum_sq_[i];
  }
  n_shots_ += other.n_shots_;
}

std::vector<double> VarianceAccumulator::per_sample(double scale) const {
  std::vector<double> v(sum_.size(), kNaN);
  if (n_shots_ == 0) return v;
  const double n = static_cast<double>(n_shots_);
  const double s2 = scale * scale;
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = n_shots_ >= 2 ? (sum_sq_[i] - std::norm(sum_[i]) / n) / (n - 1.0) * s2
                         : sum_sq_[i] * s2;
  }
  return v;
}

double VarianceAccumulator::pooled(const Window& window, double scale) const {
  if (window.size() == 0 || window.end > sum_.size())
    fail(ErrorKind::Config, "window '" + window.label + "' is empty or out of range");
  if (n_shots_ == 1) {
    // One shot: pool over the window about its own mean.
    std::complex<double> m(0.0, 0.0);
    double ss = 0.0;
    for (std::size_t i = window.start; i < window.end; ++i) {
      m += sum_[i];
      ss += sum_sq_[i];
    }
    const double n = static_cast<double>(window.size());
    if (window.size() < 2) return ss / n * scale * scale;
    return (ss - std::norm(m) / n) / (n - 1.0) * scale * scale;
  }
  const auto v = per_sample(scale);
  double acc = 0.0;
  for (std::size_t i = window.start; i < window.end; ++i) acc += v[i];
  return acc / static_cast<double>(window.size());
}

VarianceTrace VarianceAccumulator::trace(const Timeline& timeline, std::size_t bin_samples,
                                         double scale) const {
  if (bin_samples < 2) fail(ErrorKind::Config, "variance trace bins need >= 2 samples");
  const auto v = per_sample(scale);

  struct Segment {
    std::string region;
    std::size_t start, end;
  };
  std::vector<Segment> segs;
  std::size_t t = 0;
  for (const auto& w : timeline.windows()) {
    if (w.start > t) segs.push_back({"gap", t, w.start});
    segs.push_back({w.label, w.start, w.end});
    t = w.end;
  }
  if (t < timeline.n_samples()) segs.push_back({"gap", t, timeline.n_samples()});

  VarianceTrace tr;
  for (const auto& seg : segs) {
    for (std::size_t b = seg.start; b < seg.end; b += bin_samples) {
      const std::size_t e = std::min(seg.end, b + bin_samples);
      double acc = 0.0;
      for (std::size_t i = b; i < e; ++i) acc += v[i];
      tr.time.push_back(0.5 * static_cast<double>(b + e - 1) / timeline.sample_rate());
      tr.var_sum.push_back(acc / static_cast<double>(e - b));
      tr.samples.push_back(static_cast<double>((e - b) * n_shots_));
      tr.region.push_back(seg.region);
      tr.sentinel.push_back(is_sentinel_label(seg.region));
    }
  }
  return tr;
}

VarianceTrace variance_trace(std::span<const HeterodyneRecord> shots, double bin_width) {
  const Timeline tl = timeline_of(shots);
  const double min_width = 2.0 / tl.sample_rate();
  if (!(bin_width >= min_width * (1.0 - 1e-9)))
    fail(ErrorKind::Config, "bin_width must be >= 2/sample_rate");
  VarianceAccumulator acc(tl.n_samples());
  for (const auto& s : shots) acc.add(s);
  const auto bins = static_cast<std::size_t>(std::llround(bin_width * tl.sample_rate()));
  return acc.trace(tl, bins);
}

// ---------------------------------------------------------------------------

SpectrumAccumulator::SpectrumAccumulator(const Timeline& timeline, const Window& window)
    : window_(window), sample_rate_(timeline.sample_rate()), sum_power_(window.size(), 0.0) {
  if (window.size() < 16)
    fail(ErrorKind::Config, "spectrum window '" + window.label + "' has < 16 samples");
  if (window.end > timeline.n_samples())
    fail(ErrorKind::Config, "spectrum window '" + window.label + "' out of range");
  if (overlaps_sentinel(timeline, window))
    fail(ErrorKind::Config,
         "spectrum window '" + window.label + "' overlaps a saturated pi-pulse (sentinel)");
}

void SpectrumAccumulator::add(const HeterodyneRecord& shot) {
  std::vector<std::complex<double>> x(shot.samples.begin() + window_.start,
                                      shot.samples.begin() + window_.end);
  double ms = 0.0;
  for (const auto& s : x) ms += std::norm(s);
  sum_mean_square_ += ms / static_cast<double>(x.size());
  const auto spec = dft(x);
  const double inv_n = 1.0 / static_cast<double>(x.size());
  for (std::size_t k = 0; k < spec.size(); ++k) sum_power_[k] += std::norm(spec[k]) * inv_n;
  ++n_shots_;
}

void SpectrumAccumulator::merge(const SpectrumAccumulator& other) {
  for (std::size_t k = 0; k < sum_power_.size(); ++k) sum_power_[k] += other.sum_power_[k];
  sum_mean_square_ += other.sum_mean_square_;
  n_shots_ += other.n_shots_;
}

Spectrum SpectrumAccumulator::result(double scale) const {
  Spectrum s;
  s.window = window_.label;
  s.n_shots = n_shots_;
  if (n_shots_ == 0) return s;
  const std::size_t n = sum_power_.size();
  const double norm = scale * scale / static_cast<double>(n_shots_);
  const auto half = static_cast<long long>(n / 2);
  for (std::size_t q = 0; q < n; ++q) {
    const long long k = static_cast<long long>(q) - half;
    const std::size_t src = static_cast<std::size_t>((k + static_cast<long long>(n)) %
                                                     static_cast<long long>(n));
    s.frequency.push_back(static_cast<double>(k) * sample_rate_ / static_cast<double>(n));
    s.power.push_back(sum_power_[src] * norm);
  }
  s.mean_square = sum_mean_square_ * norm;
  return s;
}

Spectrum spectral_power(std::span<const HeterodyneRecord> shots, std::string_view window_label) {
  const Timeline tl = timeline_of(shots);
  SpectrumAccumulator acc(tl, tl.at(window_label));
  for (const auto& s : shots) acc.add(s);
  return acc.result();
}

// ---------------------------------------------------------------------------

CrossCorrelationAccumulator::CrossCorrelationAccumulator(const Timeline& timeline,
                                                         std::string_view ase_label,
                                                         std::string_view rase_label,
                                                         double tau_step)
    : ase_(timeline.at(ase_label)),
      rase_(timeline.at(rase_label)),
      reflection_sum_(timeline.reflection_sum()),
      sample_rate_(timeline.sample_rate()) {
  if (tau_step > 0.0 && tau_step > (1.0 + 1e-9) / sample_rate_)
    fail(ErrorKind::Config, "cross-correlation tau grid coarser than 1/sample_rate");
  if (ase_.start < rase_.end && rase_.start < ase_.end)
    fail(ErrorKind::Config, "ASE and RASE windows overlap");
  if (overlaps_sentinel(timeline, ase_) || overlaps_sentinel(timeline, rase_))
    fail(ErrorKind::Config, "cross-correlation windows overlap a sentinel pulse");
  const std::size_t lags = ase_.size() + rase_.size() - 1;
  sum_.assign(lags, {0.0, 0.0});
  sum_sq_.assign(lags, 0.0);
}

std::vector<std::complex<double>> CrossCorrelationAccumulator::correlate(
    const HeterodyneRecord& shot) const {
  const std::size_t lags = sum_.size();
  std::size_t nfft = 1;
  while (nfft < lags) nfft <<= 1;
  std::vector<std::complex<double>> a(nfft), c(nfft);
  for (std::size_t n = 0; n < ase_.size(); ++n) a[n] = shot.samples[ase_.start + n];
  for (std::size_t j = 0; j < rase_.size(); ++j) c[j] = std::conj(shot.samples[rase_.start + j]);
  auto fa = dft(a);
  auto fc = dft(c);
  for (std::size_t k = 0; k < nfft; ++k) fa[k] *= fc[k];
  auto conv = idft(fa);
  const double inv = 1.0 / static_cast<double>(nfft);
  std::vector<std::complex<double>> out(lags);
  for (std::size_t k = 0; k < lags; ++k) out[k] = conv[k] * inv;
  return out;
}

void CrossCorrelationAccumulator::add(const HeterodyneRecord& shot) {
  add_correlation(correlate(shot));
}

void CrossCorrelationAccumulator::add_correlation(const std::vector<std::complex<double>>& c) {
  if (c.size() != sum_.size()) fail(ErrorKind::Config, "correlation length mismatch");
  for (std::size_t k = 0; k < c.size(); ++k) {
    sum_[k] += c[k];
    sum_sq_[k] += std::norm(c[k]);
  }
  ++n_shots_;
}

void CrossCorrelationAccumulator::merge(const CrossCorrelationAccumulator& other) {
  for (std::size_t k = 0; k < sum_.size(); ++k) {
    sum_[k] += other.sum_[k];
    sum_sq_[k] += other.sum_sq_[k];
  }
  n_shots_ += other.n_shots_;
}

CrossCorrelation CrossCorrelationAccumulator::result(double scale) const {
  CrossCorrelation out;
  out.n_shots = n_shots_;
  if (n_shots_ == 0) return out;
  // conv index k corresponds to lag m = k - K, K = R - ase.start - rase.start.
  const double k0 = static_cast<double>(reflection_sum_) - static_cast<double>(ase_.start) -
                    static_cast<double>(rase_.start);
  const double n = static_cast<double>(n_shots_);
  const double s2 = scale * scale;
  for (std::size_t k = 0; k < sum_.size(); ++k) {
    const std::complex<double> m = sum_[k] / n;
    out.tau.push_back((static_cast<double>(k) - k0) / sample_rate_);
    out.mean.push_back(m * s2);
    out.magnitude.push_back(std::abs(m) * s2);
    const double var = n_shots_ >= 2 ? std::max(0.0, sum_sq_[k] / n - std::norm(m)) * n / (n - 1.0)
                                     : kNaN;
    out.std_error.push_back(std::sqrt(var / n) * s2);
  }
  return out;
}

CrossCorrelation cross_correlation(std::span<const HeterodyneRecord> shots,
                                   std::string_view ase_label, std::string_view rase_label,
                                   double tau_step) {
  const Timeline tl = timeline_of(shots);
  CrossCorrelationAccumulator acc(tl, ase_label, rase_label, tau_step);
  for (const auto& s : shots) acc.add(s);
  return acc.result();
}

namespace {
// Where y crosses `half` between the adjacent samples `below` and `above`.
// With w > 0 a least-squares line through the 2w samples around the
// crossing (kept on the peak's side of i0) replaces the two-point
// interpolation, which damps estimator noise in the crossing position.
double crossing(const std::vector<double>& x, const std::vector<double>& y, std::size_t below,
                std::size_t above, std::size_t i0, double half, std::size_t w) {
  const double x_lin =
      x[below] + (half - y[below]) * (x[above] - x[below]) / (y[above] - y[below]);
  if (w == 0) return x_lin;
  const bool left = below < i0;
  std::size_t lo = std::min(below, above), hi = std::max(below, above);
  lo = lo >= w - 1 ? lo - (w - 1) : 0;
  hi = std::min(y.size() - 1, hi + (w - 1));
  if (left) hi = std::min(hi, i0);
  else lo = std::max(lo, i0);
  if (hi - lo < 2) return x_lin;
  double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = lo; i <= hi; ++i) {
    const double u = x[i] - x[below];
    n += 1;
    sx += u;
    sy += y[i];
    sxx += u * u;
    sxy += u * y[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double icpt = (sy - slope * sx) / n;
  if (!(left ? slope > 0.0 : slope < 0.0)) return x_lin;
  const double xf = x[below] + (half - icpt) / slope;
  if (!(xf >= x[lo] && xf <= x[hi])) return x_lin;
  return xf;
}

// Full width at `half` for a sampled curve, searching outward from index
// i0. NaN if either side never drops below half.
double half_max_width(const std::vector<double>& x, const std::vector<double>& y,
                      std::size_t i0, double half, std::size_t w = 0) {
  std::size_t l = i0;
  while (l > 0 && y[l] >= half) --l;
  std::size_t r = i0;
  while (r + 1 < y.size() && y[r] >= half) ++r;
  if (y[l] >= half || y[r] >= half) return kNaN;
  return crossing(x, y, r, r - 1, i0, half, w) - crossing(x, y, l, l + 1, i0, half, w);
}
}  // namespace

namespace {
// 7-point quadratic Savitzky-Golay smoothing; the three samples at each end
// are left as they are.
std::vector<double> savitzky_golay7(const std::vector<double>& y) {
  static constexpr double kW[7] = {-2, 3, 6, 7, 6, 3, -2};
  std::vector<double> out = y;
  for (std::size_t i = 3; i + 3 < y.size(); ++i) {
    double acc = 0.0;
    for (int j = 0; j < 7; ++j) acc += kW[j] * y[i + j - 3];
    out[i] = acc / 21.0;
  }
  return out;
}
}  // namespace

CorrelationPeak correlation_peak(const CrossCorrelation& c) {
  CorrelationPeak p;
  if (c.magnitude.empty()) return p;
  // Lags carry nearly independent noise, so the peak is located and sized
  // on a smoothed curve rather than the raw maximum.
  std::vector<double> power(c.magnitude.size());
  for (std::size_t k = 0; k < power.size(); ++k) {
    const double se = std::isfinite(c.std_error[k]) ? c.std_error[k] : 0.0;
    power[k] = c.magnitude[k] * c.magnitude[k] - se * se;  // unbiased for |E C|^2
  }
  const auto mag_s = savitzky_golay7(c.magnitude);
  const auto pow_s = savitzky_golay7(power);
  const auto it = std::max_element(mag_s.begin(), mag_s.end());
  const auto i0 = static_cast<std::size_t>(it - mag_s.begin());
  p.tau = c.tau[i0];
  p.height = *it;
  p.height_se = c.std_error[i0];
  p.fwhm_magnitude = half_max_width(c.tau, mag_s, i0, 0.5 * p.height);
  const auto ip = static_cast<std::size_t>(std::max_element(pow_s.begin(), pow_s.end()) -
                                           pow_s.begin());
  p.fwhm_power = half_max_width(c.tau, pow_s, ip, 0.5 * pow_s[ip]);
  return p;
}

// ---------------------------------------------------------------------------

std::vector<QuadratureSample> project_modes(const HeterodyneRecord& shot,
                                            const TemporalModeBasis& basis) {
  std::vector<QuadratureSample> out;
  out.reserve(basis.size());
  for (std::size_t k = 0; k < basis.size(); ++k) {
    const ModeTile& t = basis.tile(k);
    if (t.ase_start + t.length > shot.samples.size() ||
        t.rase_start + t.length > shot.samples.size())
      fail(ErrorKind::Config, "mode basis extends past the record");
    const double w = basis.weight(k);
    std::complex<double> a(0.0, 0.0), r(0.0, 0.0);
    for (std::size_t i = 0; i < t.length; ++i) {
      a += shot.samples[t.ase_start + i];
      r += shot.samples[t.rase_start + i];
    }
    a *= w;
    r = std::conj(r * w);
    out.push_back({a.real(), a.imag(), r.real(), r.imag(), shot.shot_index, k});
  }
  return out;
}

namespace {

struct Moments {
  double s[4] = {};
  double ss[4][4] = {};
  double n = 0.0;

  void add(const QuadratureSample& q) {
    const double v[4] = {q.x1, q.p1, q.x2, q.p2};
    for (int i = 0; i < 4; ++i) {
      s[i] += v[i];
      for (int j = i; j < 4; ++j) ss[i][j] += v[i] * v[j];
    }
    n += 1.0;
  }

  Eigen::Matrix4d cov() const {
    Eigen::Matrix4d c;
    for (int i = 0; i < 4; ++i)
      for (int j = i; j < 4; ++j)
        c(i, j) = c(j, i) = (ss[i][j] - s[i] * s[j] / n) / (n - 1.0);
    return c;
  }
};

void require_samples(std::span<const QuadratureSample> samples) {
  if (samples.size() < kMinInseparabilitySamples) {
    std::ostringstream os;
    os << "need >= " << kMinInseparabilitySamples << " quadrature samples, got "
       << samples.size();
    fail(ErrorKind::Domain, os.str());
  }
  const Eigen::Matrix4d c = sample_covariance(samples);
  for (int i = 0; i < 4; ++i)
    if (!(c(i, i) > 0.0)) fail(ErrorKind::Numeric, "degenerate samples: zero quadrature variance");
}

// Row r holds S*(b_j) for bootstrap resample r.
Eigen::MatrixXd bootstrap_s(std::span<const QuadratureSample> samples,
                            std::span<const double> b_grid, const BootstrapOptions& opt) {
  if (opt.resamples < 2) fail(ErrorKind::Domain, "bootstrap needs >= 2 resamples");
  const std::size_t n = samples.size();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(opt.resamples),
                      static_cast<Eigen::Index>(b_grid.size()));
  parallel_for(opt.resamples, [&](std::size_t r) {
    auto eng = stream_engine(opt.seed, stream_tag::kBootstrap, r);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    Moments m;
    for (std::size_t i = 0; i < n; ++i) m.add(samples[pick(eng)]);
    const Eigen::Matrix4d c = m.cov();
    for (std::size_t j = 0; j < b_grid.size(); ++j)
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) =
          inseparability_from_cov(c, b_grid[j]);
  });
  return out;
}

double quantile_sorted(const std::vector<double>& v, double q) {
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

Eigen::Matrix4d sample_covariance(std::span<const QuadratureSample> samples) {
  if (samples.size() < 2) fail(ErrorKind::Domain, "sample covariance needs >= 2 samples");
  Moments m;
  for (const auto& q : samples) m.add(q);
  return m.cov();
}

Eigen::Matrix4d covariance_standard_errors(const Eigen::Matrix4d& cov, std::size_t n) {
  Eigen::Matrix4d se;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      se(i, j) = std::sqrt((cov(i, i) * cov(j, j) + cov(i, j) * cov(i, j)) /
                           static_cast<double>(n));
  return se;
}

std::vector<double> default_b_grid(double step) {
  if (!(step > 0.0 && step <= 1.0)) fail(ErrorKind::Config, "b grid step must be in (0, 1]");
  const auto n = static_cast<std::size_t>(std::llround(1.0 / step));
  std::vector<double> g(n + 1);
  for (std::size_t i = 0; i <= n; ++i) g[i] = std::min(1.0, static_cast<double>(i) / n);
  return g;
}

InseparabilityCurve inseparability_curve(std::span<const QuadratureSample> samples,
                                         std::span<const double> b_grid,
                                         double confidence_level,
                                         const BootstrapOptions& options) {
  require_samples(samples);
  if (!(confidence_level > 0.0 && confidence_level < 1.0))
    fail(ErrorKind::Domain, "confidence level must be in (0, 1)");
  for (double b : b_grid)
    if (!(b >= 0.0 && b <= 1.0)) fail(ErrorKind::Domain, "b grid values must lie in [0, 1]");
  if (!std::is_sorted(b_grid.begin(), b_grid.end()))
    fail(ErrorKind::Domain, "b grid must be ascending");

  InseparabilityCurve curve;
  curve.b_grid.assign(b_grid.begin(), b_grid.end());
  curve.n_shots = samples.size();
  curve.confidence_level = confidence_level;
  curve.resamples = options.resamples;

  const Eigen::Matrix4d c = sample_covariance(samples);
  for (double b : b_grid) curve.s_values.push_back(inseparability_from_cov(c, b));

  const Eigen::MatrixXd boot = bootstrap_s(samples, b_grid, options);
  const double lo_q = 0.5 * (1.0 - confidence_level);
  const double hi_q = 0.5 * (1.0 + confidence_level);
  std::vector<double> col(options.resamples);
  for (std::size_t j = 0; j < b_grid.size(); ++j) {
    for (std::size_t r = 0; r < options.resamples; ++r)
      col[r] = boot(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j));
    const double mean = std::accumulate(col.begin(), col.end(), 0.0) / col.size();
    double var = 0.0;
    for (double v : col) var += (v - mean) * (v - mean);
    curve.sigma_band.push_back(std::sqrt(var / (col.size() - 1.0)));
    std::sort(col.begin(), col.end());
    curve.ci_low.push_back(std::min(quantile_sorted(col, lo_q), curve.s_values[j]));
    curve.ci_high.push_back(std::max(quantile_sorted(col, hi_q), curve.s_values[j]));
  }
  return curve;
}

DipSignificance dip_significance(std::span<const QuadratureSample> samples, double b,
                                 const BootstrapOptions& options) {
  require_samples(samples);
  if (!(b >= 0.0 && b <= 1.0)) fail(ErrorKind::Domain, "b outside [0, 1]");
  const double grid[1] = {b};
  const Eigen::MatrixXd boot = bootstrap_s(samples, grid, options);
  DipSignificance d;
  d.s_hat = inseparability_from_cov(sample_covariance(samples), b);
  const Eigen::VectorXd col = boot.col(0);
  const double mean = col.mean();
  d.sigma = std::sqrt((col.array() - mean).square().sum() / (col.size() - 1.0));
  d.confidence_below_2 = (col.array() < 2.0).cast<double>().mean();
  return d;
}

// ---------------------------------------------------------------------------

DecayFit fit_exponential_decay(const VarianceTrace& trace, double floor,
                               std::string_view region) {
  // ln(y) = a - t / tau with weights ~ 1/var(ln y) = y^2 * N / (2 v^2).
  double sw = 0.0, st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  std::vector<std::array<double, 3>> pts;
  for (std::size_t i = 0; i < trace.time.size(); ++i) {
    if (trace.region[i] != region || trace.sentinel[i]) continue;
    const double v = trace.var_sum[i];
    const double y = v - floor;
    if (!(y > 0.0)) continue;
    const double w = y * y * trace.samples[i] / (2.0 * v * v);
    pts.push_back({trace.time[i], std::log(y), w});
  }
  if (pts.size() < 3) fail(ErrorKind::Numeric, "decay fit: fewer than 3 bins above the floor");
  for (const auto& [t, ly, w] : pts) {
    sw += w;
    st += w * t;
    sy += w * ly;
    stt += w * t * t;
    sty += w * t * ly;
  }
  const double det = sw * stt - st * st;
  const double slope = (sw * sty - st * sy) / det;
  const double icpt = (sy - slope * st) / sw;
  if (!(slope < 0.0)) fail(ErrorKind::Numeric, "decay fit: trace does not decay");
  double chi2 = 0.0;
  for (const auto& [t, ly, w] : pts) chi2 += w * std::pow(ly - icpt - slope * t, 2);
  const double dof = static_cast<double>(pts.size()) - 2.0;
  const double slope_var = std::max(1.0, dof > 0 ? chi2 / dof : 1.0) * sw / det;
  DecayFit fit;
  fit.tau = -1.0 / slope;
  fit.tau_sigma = std::sqrt(slope_var) / (slope * slope);
  fit.amplitude = std::exp(icpt);
  fit.bins_used = pts.size();
  return fit;
}

FwhmFit fit_spectral_fwhm(const Spectrum& spectrum, double floor) {
  const auto& p = spectrum.power;
  const auto& f = spectrum.frequency;
  if (p.size() < 16 || spectrum.n_shots == 0) fail(ErrorKind::Numeric, "FWHM fit: empty spectrum");
  const auto it = std::max_element(p.begin(), p.end());
  const auto i0 = static_cast<std::size_t>(it - p.begin());
  const double rel_noise = 1.0 / std::sqrt(static_cast<double>(spectrum.n_shots));
  if (!(*it - floor > 5.0 * rel_noise * *it))
    fail(ErrorKind::Numeric, "FWHM fit: no peak stands clear of the floor");

  // Peak height from a parabola over the top 20% of the peak.
  const double top = floor + 0.8 * (*it - floor);
  std::size_t l = i0, r = i0;
  while (l > 0 && p[l - 1] >= top) --l;
  while (r + 1 < p.size() && p[r + 1] >= top) ++r;
  double peak = *it, peak_f = f[i0];
  if (r - l >= 4) {
    Eigen::MatrixXd a(r - l + 1, 3);
    Eigen::VectorXd y(r - l + 1);
    for (std::size_t i = l; i <= r; ++i) {
      const double u = f[i] - f[i0];
      a.row(static_cast<Eigen::Index>(i - l)) << 1.0, u, u * u;
      y[static_cast<Eigen::Index>(i - l)] = p[i];
    }
    const Eigen::Vector3d c = a.colPivHouseholderQr().solve(y);
    if (c[2] < 0.0) {
      const double u = -c[1] / (2.0 * c[2]);
      peak = c[0] + c[1] * u + c[2] * u * u;
      peak_f = f[i0] + u;
    }
  }
  const double half = floor + 0.5 * (peak - floor);

  std::size_t lc = i0, rc = i0;
  while (lc > 0 && p[lc] >= half) --lc;
  while (rc + 1 < p.size() && p[rc] >= half) ++rc;
  const std::size_t w = (r - l) >= 8 ? (r - l) / 4 : 0;
  const double width = half_max_width(f, p, i0, half, w);
  if (!(width > 0.0)) fail(ErrorKind::Numeric, "FWHM fit: peak has no resolved half-max crossing");

  // Crossing-position error from the local slope and the periodogram noise
  // averaged over the fitted bins.
  const double slope = std::abs((p[rc + 1 < p.size() ? rc + 1 : rc] - p[rc > 0 ? rc - 1 : rc]) /
                                (2.0 * (f[1] - f[0])));
  FwhmFit fit;
  fit.fwhm = width;
  fit.fwhm_sigma = slope > 0.0 ? std::sqrt(2.0 / std::max(1.0, 2.0 * w)) * half * rel_noise / slope
                               : kNaN;
  fit.peak_frequency = peak_f;
  fit.peak_power = peak;
  return fit;
}

}  // namespace rase
