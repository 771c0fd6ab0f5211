#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include "dkg/fft.hpp"
#include "dkg/field.hpp"
#include "dkg/grid.hpp"

namespace dkg {

// ---------------------------------------------------------------------------
// Frequency projectors
// ---------------------------------------------------------------------------

enum class Band { Low, High, Dyadic };
enum class CutoffShape { Smooth, Sharp };

/// Littlewood-Paley style multiplier around the cutoff wavenumber N.
///
/// Smooth high-pass is 0 for |k| <= N/2, 1 for |k| >= N, with a raised cosine
/// in log2|k| across the octave in between. Low = 1 - High. The dyadic band at
/// N is High(N) - High(2N). Sharp variants jump at |k| = N (band: [N, 2N)).
struct ProjectorSpec {
  double cutoff = 1.0;
  Band band = Band::High;
  CutoffShape shape = CutoffShape::Smooth;
};

inline double high_pass_weight(double k, double cutoff, CutoffShape shape) noexcept {
  if (shape == CutoffShape::Sharp) return k >= cutoff ? 1.0 : 0.0;
  if (k <= 0.5 * cutoff) return 0.0;
  if (k >= cutoff) return 1.0;
  const double s = std::log2(2.0 * k / cutoff);
  return 0.5 * (1.0 - std::cos(std::numbers::pi * s));
}

inline double transfer(const ProjectorSpec& spec, double k) noexcept {
  switch (spec.band) {
    case Band::Low:
      return 1.0 - high_pass_weight(k, spec.cutoff, spec.shape);
    case Band::High:
      return high_pass_weight(k, spec.cutoff, spec.shape);
    case Band::Dyadic:
      return high_pass_weight(k, spec.cutoff, spec.shape) - high_pass_weight(k, 2.0 * spec.cutoff, spec.shape);
  }
  return 0.0;
}

inline void check_cutoff(const SpectralGrid& g, double cutoff) {
  if (!(cutoff > 0.0)) throw UsageError("projector cutoff must be positive");
  if (cutoff > g.nyquist() * (1.0 + 1e-12))
    throw UsageError("projector cutoff " + format_number(cutoff) + " exceeds the Nyquist wavenumber " +
                     format_number(g.nyquist()));
}

/// Multiply every stored mode by `mult(ModeInfo)`.
template <class Mult>
void apply_multiplier(const SpectralGrid& g, Spectrum& spec, Mult&& mult) {
  g.for_each_mode([&](std::size_t s, const ModeInfo& m) { spec[s] *= mult(m); });
}

inline void apply_projector(const SpectralGrid& g, Spectrum& spec, const ProjectorSpec& p) {
  check_cutoff(g, p.cutoff);
  apply_multiplier(g, spec, [&](const ModeInfo& m) { return transfer(p, std::sqrt(m.k2)); });
}

inline RealField apply_projector(const SpectralGrid& g, std::span<const double> field, const ProjectorSpec& p) {
  auto spec = forward_transform(g, field);
  apply_projector(g, spec, p);
  return inverse_transform(g, spec);
}

/// Filters both components of the state.
inline FieldState apply_projector(const FieldState& s, const ProjectorSpec& p) {
  FieldState out = s;
  out.u = apply_projector(s.grid, s.u, p);
  out.ut = apply_projector(s.grid, s.ut, p);
  return out;
}

// ---------------------------------------------------------------------------
// Quadrature and norms
// ---------------------------------------------------------------------------

namespace detail {

inline bool axis_nyquist(const SpectralGrid& g, const ModeInfo& m, int axis) noexcept {
  const int half = g.n() / 2;
  return axis == g.dim() - 1 ? m.m[axis] == half : m.m[axis] == -half;
}

// |grad|^2 multiplier with the unpaired Nyquist component of each axis dropped,
// so the spectral sum equals the quadrature of the physical gradient.
inline double gradient_symbol(const SpectralGrid& g, const ModeInfo& m) noexcept {
  double s = 0.0;
  for (int a = 0; a < g.dim(); ++a)
    if (!axis_nyquist(g, m, a)) s += m.k[a] * m.k[a];
  return s;
}

}  // namespace detail

/// (2L)^d * sum over the full spectrum of w(mode) |c|^2.
template <class Weight>
double spectral_quadrature(const SpectralGrid& g, const Spectrum& spec, Weight&& w) {
  double acc = 0.0;
  g.for_each_mode([&](std::size_t s, const ModeInfo& m) { acc += m.weight * w(m) * std::norm(spec[s]); });
  return acc * std::pow(g.box_length(), g.dim());
}

inline double l2_norm_sq(const SpectralGrid& g, std::span<const double> f) {
  double acc = 0.0;
  for (double v : f) acc += v * v;
  return acc * g.cell_volume();
}

inline double l2_norm(const SpectralGrid& g, std::span<const double> f) { return std::sqrt(l2_norm_sq(g, f)); }

inline double gradient_norm_sq(const SpectralGrid& g, const Spectrum& spec) {
  return spectral_quadrature(g, spec, [&](const ModeInfo& m) { return detail::gradient_symbol(g, m); });
}

inline double h1_norm_sq(const SpectralGrid& g, std::span<const double> f) {
  return l2_norm_sq(g, f) + gradient_norm_sq(g, forward_transform(g, f));
}

inline double h1_norm(const SpectralGrid& g, std::span<const double> f) { return std::sqrt(h1_norm_sq(g, f)); }

inline double sup_norm(std::span<const double> f) noexcept {
  double m = 0.0;
  for (double v : f) m = std::max(m, std::abs(v));
  return m;
}

struct NormReport {
  double l2_u = 0.0;
  double h1_u = 0.0;
  double l2_ut = 0.0;
  double linf_u = 0.0;
  double h_norm = 0.0;  // (h1_u^2 + l2_ut^2)^(1/2)
};

inline NormReport norms(const FieldState& s) {
  s.require_finite();
  const auto& g = s.grid;
  const double l2u = l2_norm_sq(g, s.u);
  const double grad = gradient_norm_sq(g, forward_transform(g, s.u));
  const double l2ut = l2_norm_sq(g, s.ut);
  NormReport r;
  r.l2_u = std::sqrt(l2u);
  r.h1_u = std::sqrt(l2u + grad);
  r.l2_ut = std::sqrt(l2ut);
  r.linf_u = sup_norm(s.u);
  r.h_norm = std::sqrt(l2u + grad + l2ut);
  return r;
}

/// E(u, u_t) = integral of |grad u|^2/2 + u^2/2 + u_t^2/2 - |u|^(p+1)/(p+1).
inline double energy(const FieldState& s) {
  s.require_finite();
  const auto& g = s.grid;
  const double grad = gradient_norm_sq(g, forward_transform(g, s.u));
  double potential = 0.0;
  for (double v : s.u) potential += abs_power_plus_one(v, s.p);
  potential *= g.cell_volume() / (s.p + 1.0);
  return 0.5 * (grad + l2_norm_sq(g, s.u) + l2_norm_sq(g, s.ut)) - potential;
}

/// Spectral gradient, one field per axis.
inline std::vector<RealField> gradient(const SpectralGrid& g, std::span<const double> f) {
  const auto spec = forward_transform(g, f);
  std::vector<RealField> out;
  for (int a = 0; a < g.dim(); ++a) {
    Spectrum d = spec;
    g.for_each_mode([&](std::size_t s, const ModeInfo& m) {
      d[s] *= detail::axis_nyquist(g, m, a) ? std::complex<double>(0.0) : std::complex<double>(0.0, m.k[a]);
    });
    out.push_back(inverse_transform(g, d));
  }
  return out;
}

inline RealField laplacian(const SpectralGrid& g, std::span<const double> f) {
  auto spec = forward_transform(g, f);
  apply_multiplier(g, spec, [](const ModeInfo& m) { return -m.k2; });
  return inverse_transform(g, spec);
}

/// e = |grad u|^2 + u^2 + u_t^2 pointwise; its quadrature is the squared H-norm.
inline RealField local_energy_density(const FieldState& s) {
  s.require_finite();
  RealField e(s.grid.size());
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = s.u[i] * s.u[i] + s.ut[i] * s.ut[i];
  for (const auto& d : gradient(s.grid, s.u))
    for (std::size_t i = 0; i < e.size(); ++i) e[i] += d[i] * d[i];
  return e;
}

inline double integrate(const SpectralGrid& g, std::span<const double> f) {
  double acc = 0.0;
  for (double v : f) acc += v;
  return acc * g.cell_volume();
}

// ---------------------------------------------------------------------------
// Geometry
// ---------------------------------------------------------------------------

/// tau_h f(x) = f(x - h) via spectral phase shift. The unpaired Nyquist
/// component keeps only its real (cosine) factor, so the result stays real.
inline void translate(const SpectralGrid& g, Spectrum& spec, const Point& shift) {
  g.for_each_mode([&](std::size_t s, const ModeInfo& m) {
    std::complex<double> phase(1.0, 0.0);
    for (int a = 0; a < g.dim(); ++a) {
      const double arg = m.k[a] * shift[a];
      phase *= detail::axis_nyquist(g, m, a) ? std::complex<double>(std::cos(arg), 0.0)
                                              : std::polar(1.0, -arg);
    }
    spec[s] *= phase;
  });
}

inline RealField translate(const SpectralGrid& g, std::span<const double> f, const Point& shift) {
  auto spec = forward_transform(g, f);
  translate(g, spec, shift);
  return inverse_transform(g, spec);
}

/// Minimum periodic distance from each grid point to the center set.
inline RealField distance_field(const SpectralGrid& g, std::span<const Point> centers) {
  if (centers.empty()) throw UsageError("distance field needs at least one center");
  RealField d(g.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    const Point x = g.point(i);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : centers) best = std::min(best, g.periodic_distance(x, c));
    d[i] = best;
  }
  return d;
}

}  // namespace dkg
