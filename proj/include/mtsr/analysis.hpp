// Closed-form predictions and scaling-law fits for tau_N.
#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <ratio>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace mtsr {

// 2D percolation exponents of the cluster-size distribution.
using PercolationDelta = std::ratio<187, 91>;
using PercolationSigma = std::ratio<36, 91>;
// Predicted power-law exponent of tau_N in N: delta - 1.
using PowerLawExponent = std::ratio_subtract<PercolationDelta, std::ratio<1>>;

template <class R>
constexpr double as_double() {
  return static_cast<double>(R::num) / static_cast<double>(R::den);
}

inline constexpr double kTriangularSiteThreshold = 0.5;

// Probability that an independent oscillator |C_a|^2 = cos^2(k t + phase)
// lies in the reset zone [P0, 1 - P0].
inline double reset_zone_probability(double p0) {
  if (!(p0 > 0.0 && p0 < 0.5)) throw std::domain_error("P0 must lie in (0, 0.5)");
  return 1.0 - (2.0 / std::numbers::pi) * std::acos(1.0 - 2.0 * p0);
}

// Period between zone entries of a synchronized cluster: acos(1 - 2 P0) / (2k), in t0.
inline double tau_sync(double k, double p0) {
  if (!(k > 0.0)) throw std::domain_error("tau_sync needs k > 0");
  if (!(p0 > 0.0 && p0 < 0.5)) throw std::domain_error("P0 must lie in (0, 0.5)");
  return std::acos(1.0 - 2.0 * p0) / (2.0 * k);
}

struct PercolationPrediction {
  double p = 0.0;
  double p_c = kTriangularSiteThreshold;
  double delta = as_double<PercolationDelta>();
  double sigma = as_double<PercolationSigma>();

  static PercolationPrediction for_zone(double p0) { return {reset_zone_probability(p0)}; }

  // z = (p_c - p) N^sigma; the power law holds while z <~ 1.
  double scaling_variable(double n) const { return (p_c - p) * std::pow(n, sigma); }
  bool in_power_law_window(double n) const { return p < p_c && scaling_variable(n) <= 1.0; }
  // Largest N with z <= 1 (infinite at or above p_c).
  double power_law_limit() const {
    if (p >= p_c) return INFINITY;
    return std::pow(1.0 / (p_c - p), 1.0 / sigma);
  }
  // Decay rate c of p_N ~ exp(-c N), up to a constant: (p_c - p)^{1/sigma}.
  double relative_decay_rate() const { return std::pow(std::max(p_c - p, 0.0), 1.0 / sigma); }
};

enum class LawModel { Power, Exponential };

constexpr std::string_view name(LawModel m) { return m == LawModel::Power ? "power" : "exponential"; }

struct FitPoint {
  double x;  // N (or k)
  double y;  // tau
};

struct FitRange {
  double lo = -INFINITY;
  double hi = INFINITY;
  bool contains(double x) const { return x >= lo && x <= hi; }
};

// tau = a N^b (power) or tau = a exp(c N) (exponential); `rate` is b or c.
struct FitResult {
  LawModel model = LawModel::Power;
  double prefactor = 0.0;
  double rate = 0.0;
  double prefactor_error = 0.0;
  double rate_error = 0.0;
  FitRange range;
  int points = 0;
  double residual_norm = 0.0;  // sqrt of the sum of squared log residuals

  double predict(double x) const {
    return model == LawModel::Power ? prefactor * std::pow(x, rate) : prefactor * std::exp(rate * x);
  }
};

namespace detail {

inline FitResult log_linear_fit(std::span<const FitPoint> pts, FitRange range, LawModel model) {
  std::vector<double> xs, ys;
  for (const auto& p : pts) {
    if (!range.contains(p.x)) continue;
    if (!(p.y > 0.0) || (model == LawModel::Power && !(p.x > 0.0)))
      throw std::invalid_argument("fit points must be positive");
    xs.push_back(model == LawModel::Power ? std::log(p.x) : p.x);
    ys.push_back(std::log(p.y));
  }
  const std::size_t n = xs.size();
  if (n < 3) throw std::invalid_argument("fit range holds fewer than 3 points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit range is degenerate (all abscissae equal)");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ys[i] - (intercept + slope * xs[i]);
    ssr += r * r;
  }
  const double s2 = ssr / static_cast<double>(n - 2);
  FitResult f;
  f.model = model;
  f.rate = slope;
  f.prefactor = std::exp(intercept);
  f.rate_error = std::sqrt(s2 / sxx);
  f.prefactor_error = f.prefactor * std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
  f.range = range;
  f.points = static_cast<int>(n);
  f.residual_norm = std::sqrt(ssr);
  return f;
}

}  // namespace detail

// Least squares of log tau against log N.
inline FitResult fit_power_law(std::span<const FitPoint> points, FitRange range = {}) {
  return detail::log_linear_fit(points, range, LawModel::Power);
}

// Least squares of log tau against N.
inline FitResult fit_exponential(std::span<const FitPoint> points, FitRange range = {}) {
  return detail::log_linear_fit(points, range, LawModel::Exponential);
}

// Two-center integrals of hydrogen-like 1s orbitals exp(-r / l) whose
// centers are `separation` apart, in nm and V0 units (e^2 / eps = 1 V0 nm).
struct HoppingIntegrals {
  double overlap = 0.0;    // <a|b>
  double resonance = 0.0;  // <a| 1/|r - r_a| |b>
  double coulomb = 0.0;    // <a| 1/|r - r_b| |a>
  double k = 0.0;          // (resonance - overlap * coulomb) / (1 - overlap^2)
};

inline HoppingIntegrals hopping_integrals(double radius, double separation) {
  if (!(radius > 0.0) || !(separation > 0.0))
    throw std::domain_error("orbital radius and separation must be positive");
  const double rho = separation / radius;
  const double e = std::exp(-rho);
  HoppingIntegrals h;
  h.overlap = e * (1.0 + rho + rho * rho / 3.0);
  h.resonance = e * (1.0 + rho) / radius;
  h.coulomb = (1.0 - std::exp(-2.0 * rho) * (1.0 + rho)) / separation;
  h.k = (h.resonance - h.overlap * h.coulomb) / (1.0 - h.overlap * h.overlap);
  return h;
}

inline double hopping_estimate(double radius, double separation = 4.0) {
  return hopping_integrals(radius, separation).k;
}

// Smallest N with a0 * eps * exp(c N) >= tau_target (seconds); 0 when the
// target is already met at N = 0.
inline int min_cluster_size(double tau_target, double epsilon, double a0_seconds, double rate) {
  if (!(tau_target > 0) || !(epsilon > 0) || !(a0_seconds > 0) || !(rate > 0))
    throw std::domain_error("min_cluster_size needs positive inputs");
  const double base = a0_seconds * epsilon;
  if (tau_target <= base) return 0;
  return static_cast<int>(std::ceil(std::log(tau_target / base) / rate));
}

struct KneePoint {
  double k;
  std::optional<double> tau;  // empty: no reduction observed
};

// Largest k whose tau_N departs from tau_sync(k, P0) by more than
// `threshold` (relative); censored points count as departures. Empty when
// the whole series follows the synchronized law.
inline std::optional<double> detect_knee(std::span<const KneePoint> series, double p0, double threshold = 0.2) {
  std::optional<double> knee;
  for (const auto& pt : series) {
    const double sync = tau_sync(pt.k, p0);
    const bool departs = !pt.tau || std::abs(*pt.tau - sync) > threshold * sync;
    if (departs && (!knee || pt.k > *knee)) knee = pt.k;
  }
  return knee;
}

}  // namespace mtsr
