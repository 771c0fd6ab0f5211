#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "dkg/evolution.hpp"
#include "dkg/spectral.hpp"

namespace dkg {

/// Threshold hierarchy mu_0 > ... > mu_4 > 0 and the detection cutoff.
struct DiagnosticsConfig {
  std::array<double, 5> mu{1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
  double detection_cutoff = 0.0;  // 0: Nyquist / 8
  double tail_cutoff = 0.0;       // 0: Nyquist / 4
  double exterior_radius = 10.0;

  void validate() const {
    for (int i = 0; i < 5; ++i) {
      if (!(mu[i] > 0.0) || !std::isfinite(mu[i])) throw UsageError("thresholds mu must be positive and finite");
      if (i > 0 && !(mu[i] < mu[i - 1])) throw UsageError("thresholds must satisfy mu0 > mu1 > mu2 > mu3 > mu4");
    }
    if (detection_cutoff < 0.0 || tail_cutoff < 0.0) throw UsageError("frequency cutoffs must be nonnegative");
    if (!(exterior_radius > 0.0)) throw UsageError("exterior radius must be positive");
  }

  double detection_frequency(const SpectralGrid& g) const {
    return detection_cutoff > 0.0 ? detection_cutoff : g.nyquist() / 8.0;
  }
  double tail_frequency(const SpectralGrid& g) const { return tail_cutoff > 0.0 ? tail_cutoff : g.nyquist() / 4.0; }

  /// min(2 / mu_3, box / 4).
  double separation_radius(const SpectralGrid& g) const { return std::min(2.0 / mu[3], g.box_length() / 4.0); }
};

// ---------------------------------------------------------------------------
// Frequency tails
// ---------------------------------------------------------------------------

struct FrequencyTail {
  double h1_u = 0.0;   // ||P_{>=N} u||_{H^1}
  double l2_ut = 0.0;  // ||P_{>=N} u_t||_2
};

inline FrequencyTail frequency_tail(const FieldState& s, double cutoff, CutoffShape shape = CutoffShape::Smooth) {
  const auto& g = s.grid;
  check_cutoff(g, cutoff);
  const auto w = [&](const ModeInfo& m) {
    const double h = high_pass_weight(std::sqrt(m.k2), cutoff, shape);
    return h * h;
  };
  const auto U = forward_transform(g, s.u);
  const auto V = forward_transform(g, s.ut);
  FrequencyTail t;
  t.h1_u = std::sqrt(spectral_quadrature(g, U, [&](const ModeInfo& m) {
    return w(m) * (1.0 + detail::gradient_symbol(g, m));
  }));
  t.l2_ut = std::sqrt(spectral_quadrature(g, V, w));
  return t;
}

// ---------------------------------------------------------------------------
// Good times
// ---------------------------------------------------------------------------

struct GoodTime {
  double window_lo = 0.0;
  double window_hi = 0.0;
  double t = 0.0;
  double ut_l2 = 0.0;
};

/// Sample in [lo, hi] minimizing ||u_t||_2; ties go to the earliest time.
inline GoodTime select_good_time(std::span<const TrajectorySample> samples, double lo, double hi) {
  GoodTime best{lo, hi, 0.0, std::numeric_limits<double>::infinity()};
  bool found = false;
  for (const auto& s : samples) {
    if (s.t < lo || s.t > hi) continue;
    if (!found || s.norms.l2_ut < best.ut_l2) {
      best.t = s.t;
      best.ut_l2 = s.norms.l2_ut;
      found = true;
    }
  }
  if (!found) throw UsageError("no samples in the good-time window");
  return best;
}

// ---------------------------------------------------------------------------
// Concentration points
// ---------------------------------------------------------------------------

struct ConcentrationSet {
  double t = 0.0;
  std::vector<Point> centers;
  std::vector<std::size_t> indices;  // flat grid index of each center
  std::vector<double> amplitudes;    // |P_{<N} u| at each center
  double separation_radius = 0.0;

  std::size_t size() const noexcept { return centers.size(); }
};

/// |P_{<N} u| on the grid (smooth low-pass).
inline RealField low_frequency_amplitude(const SpectralGrid& g, std::span<const double> u, double cutoff) {
  auto low = apply_projector(g, u, {cutoff, Band::Low, CutoffShape::Smooth});
  for (auto& v : low) v = std::abs(v);
  return low;
}

/// Greedy maximal separated set over grid points with amplitude >= threshold,
/// scanned by amplitude descending, flat index ascending.
inline std::vector<std::size_t> greedy_separated_set(const SpectralGrid& g, std::span<const double> amplitude,
                                                     double threshold, double radius) {
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < amplitude.size(); ++i)
    if (amplitude[i] >= threshold) candidates.push_back(i);
  std::sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
    return amplitude[a] != amplitude[b] ? amplitude[a] > amplitude[b] : a < b;
  });
  std::vector<std::size_t> chosen;
  std::vector<Point> pts;
  for (std::size_t c : candidates) {
    const auto x = g.point(c);
    const bool far = std::all_of(pts.begin(), pts.end(), [&](const Point& p) { return g.periodic_distance(x, p) >= radius; });
    if (far) {
      chosen.push_back(c);
      pts.push_back(x);
    }
  }
  return chosen;
}

inline ConcentrationSet detect_concentration_points(const FieldState& s, const DiagnosticsConfig& cfg) {
  cfg.validate();
  s.require_finite();
  const auto& g = s.grid;
  const auto amp = low_frequency_amplitude(g, s.u, cfg.detection_frequency(g));
  ConcentrationSet set;
  set.t = s.t;
  set.separation_radius = cfg.separation_radius(g);
  set.indices = greedy_separated_set(g, amp, cfg.mu[3], set.separation_radius);
  for (std::size_t i : set.indices) {
    set.centers.push_back(g.point(i));
    set.amplitudes.push_back(amp[i]);
  }
  return set;
}

/// Smallest pairwise periodic distance; NaN for fewer than two centers.
inline double min_separation(const SpectralGrid& g, std::span<const Point> centers) {
  double best = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < centers.size(); ++i)
    for (std::size_t j = i + 1; j < centers.size(); ++j) {
      const double d = g.periodic_distance(centers[i], centers[j]);
      if (!(d >= best)) best = d;
    }
  return best;
}

// ---------------------------------------------------------------------------
// Exterior energy and dissipation
// ---------------------------------------------------------------------------

/// Quadrature of the local energy density over {dist(x, centers) > radius}.
inline double exterior_energy(const FieldState& s, std::span<const Point> centers, double radius) {
  if (!(radius > 0.0)) throw UsageError("exterior radius must be positive");
  if (centers.empty()) throw UsageError("exterior energy needs at least one center");
  const auto& g = s.grid;
  const auto dist = distance_field(g, centers);
  const auto e = local_energy_density(s);
  double acc = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i)
    if (dist[i] > radius) acc += e[i];
  return acc * g.cell_volume();
}

/// Trapezoid integral of sampled ||u_t||_2^2 over [from, to], with linear
/// interpolation of the integrand at endpoints between samples.
inline double dissipation_integral(std::span<const TrajectorySample> samples, double from, double to) {
  if (!(to >= from)) throw UsageError("dissipation interval is reversed");
  if (samples.empty() || from < samples.front().t || to > samples.back().t)
    throw UsageError("samples do not cover the requested interval");
  const auto f = [](const TrajectorySample& s) { return s.norms.l2_ut * s.norms.l2_ut; };
  const auto value_at = [&](std::size_t i, double t) {  // on segment [i, i+1]
    const auto& a = samples[i];
    const auto& b = samples[i + 1];
    const double w = (t - a.t) / (b.t - a.t);
    return (1.0 - w) * f(a) + w * f(b);
  };
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
    const double a = std::max(from, samples[i].t);
    const double b = std::min(to, samples[i + 1].t);
    if (b <= a) continue;
    acc += 0.5 * (b - a) * (value_at(i, a) + value_at(i, b));
  }
  return acc;
}

}  // namespace dkg
