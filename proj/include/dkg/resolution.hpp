#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dkg/diagnostics.hpp"
#include "dkg/equilibria.hpp"

namespace dkg {

// ---------------------------------------------------------------------------
// Partition of unity and components
// ---------------------------------------------------------------------------

struct PartitionWeights {
  std::vector<Point> centers;
  std::vector<RealField> psi;  // psi[j](x) = <x - x_j>^-1 / sum_l <x - x_l>^-1
};

inline PartitionWeights partition_weights(const SpectralGrid& g, std::span<const Point> centers) {
  if (centers.empty()) throw UsageError("partition of unity needs at least one center");
  const double tiny = 1e-9 * g.spacing();
  for (std::size_t i = 0; i < centers.size(); ++i)
    for (std::size_t j = i + 1; j < centers.size(); ++j)
      if (g.periodic_distance(centers[i], centers[j]) < tiny) throw UsageError("duplicate centers in partition");

  PartitionWeights pw;
  pw.centers.assign(centers.begin(), centers.end());
  pw.psi.assign(centers.size(), RealField(g.size()));
  RealField total(g.size(), 0.0);
  for (std::size_t j = 0; j < centers.size(); ++j)
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double d = g.periodic_distance(g.point(i), centers[j]);
      pw.psi[j][i] = 1.0 / std::sqrt(1.0 + d * d);
      total[i] += pw.psi[j][i];
    }
  for (auto& psi : pw.psi)
    for (std::size_t i = 0; i < g.size(); ++i) psi[i] /= total[i];
  return pw;
}

/// tau_h f(x) = f(x - h). Shifts by whole grid cells are exact index rolls;
/// anything else goes through the spectral phase shift.
inline RealField shift_field(const SpectralGrid& g, std::span<const double> f, const Point& h) {
  std::array<long, 3> cells{};
  bool whole = true;
  for (int a = 0; a < g.dim(); ++a) {
    const double c = h[a] / g.spacing();
    cells[a] = std::lround(c);
    if (std::abs(c - static_cast<double>(cells[a])) > 1e-9) whole = false;
  }
  if (!whole) return translate(g, f, h);
  const long n = g.n();
  RealField out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    auto idx = g.index(i);
    for (int a = 0; a < g.dim(); ++a) idx[a] = static_cast<int>(((idx[a] + cells[a]) % n + n) % n);
    out[g.flat(idx)] = f[i];
  }
  return out;
}

inline Point negate(const Point& p) { return {-p[0], -p[1], -p[2]}; }

struct Component {
  Point center{};
  RealField w;  // tau_{-x_j}(psi_j u)
  RealField v;  // tau_{-x_j}(psi_j u_t)
  double h_norm = 0.0;
};

inline std::vector<Component> split_components(const FieldState& s, std::span<const Point> centers) {
  const auto& g = s.grid;
  const auto pw = partition_weights(g, centers);
  std::vector<Component> out;
  for (std::size_t j = 0; j < centers.size(); ++j) {
    RealField pu(g.size()), pv(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      pu[i] = pw.psi[j][i] * s.u[i];
      pv[i] = pw.psi[j][i] * s.ut[i];
    }
    Component c;
    c.center = centers[j];
    c.w = shift_field(g, pu, negate(centers[j]));
    c.v = shift_field(g, pv, negate(centers[j]));
    c.h_norm = std::sqrt(h1_norm_sq(g, c.w) + l2_norm_sq(g, c.v));
    out.push_back(std::move(c));
  }
  return out;
}

/// sum_j tau_{x_j} w_j and sum_j tau_{x_j} v_j.
inline std::pair<RealField, RealField> reconstruct(const SpectralGrid& g, std::span<const Component> parts) {
  RealField u(g.size(), 0.0), ut(g.size(), 0.0);
  for (const auto& c : parts) {
    const auto a = shift_field(g, c.w, c.center);
    const auto b = shift_field(g, c.v, c.center);
    for (std::size_t i = 0; i < g.size(); ++i) {
      u[i] += a[i];
      ut[i] += b[i];
    }
  }
  return {std::move(u), std::move(ut)};
}

// ---------------------------------------------------------------------------
// Matching against the equilibrium library
// ---------------------------------------------------------------------------

inline constexpr double kUnmatchedRatio = 0.5;

namespace detail {

// H^1 cross-correlation C(s) = <target, tau_s profile>_{H^1} as a band-limited
// trigonometric sum over stored modes: C(s) = V sum w_k Re(a_k e^{i k.s}).
class Correlation {
 public:
  Correlation(const SpectralGrid& g, const Spectrum& target, const Spectrum& profile) : g_(g) {
    a_.resize(target.size());
    g.for_each_mode([&](std::size_t i, const ModeInfo& m) {
      a_[i] = m.nyquist ? 0.0 : (1.0 + m.k2) * target[i] * std::conj(profile[i]);
    });
  }

  /// C at every whole-cell shift s = j h (flat index j, axis offsets in [0, n)).
  RealField on_grid() const {
    Spectrum b = a_;
    RealField out;
    inverse_transform_destructive(g_, b, out);
    const double vol = std::pow(g_.box_length(), g_.dim());
    for (auto& x : out) x *= vol;
    return out;
  }

  /// Value, gradient and Hessian at an arbitrary shift.
  void evaluate(const Point& s, double& value, std::array<double, 3>& grad, std::array<double, 9>& hess) const {
    value = 0.0;
    grad.fill(0.0);
    hess.fill(0.0);
    const int d = g_.dim();
    g_.for_each_mode([&](std::size_t i, const ModeInfo& m) {
      if (a_[i] == 0.0) return;
      double phase = 0.0;
      for (int ax = 0; ax < d; ++ax) phase += m.k[ax] * s[ax];
      const auto z = m.weight * a_[i] * std::polar(1.0, phase);
      value += z.real();
      for (int p = 0; p < d; ++p) {
        grad[p] -= m.k[p] * z.imag();
        for (int q = 0; q < d; ++q) hess[3 * p + q] -= m.k[p] * m.k[q] * z.real();
      }
    });
    const double vol = std::pow(g_.box_length(), d);
    value *= vol;
    for (auto& x : grad) x *= vol;
    for (auto& x : hess) x *= vol;
  }

 private:
  const SpectralGrid& g_;
  Spectrum a_;
};

inline bool solve_small(int d, std::array<double, 9> A, std::array<double, 3> b, std::array<double, 3>& x) {
  // Gaussian elimination with partial pivoting on a d x d system.
  for (int c = 0; c < d; ++c) {
    int piv = c;
    for (int r = c + 1; r < d; ++r)
      if (std::abs(A[3 * r + c]) > std::abs(A[3 * piv + c])) piv = r;
    if (std::abs(A[3 * piv + c]) < 1e-300) return false;
    if (piv != c) {
      for (int k = 0; k < d; ++k) std::swap(A[3 * c + k], A[3 * piv + k]);
      std::swap(b[c], b[piv]);
    }
    for (int r = c + 1; r < d; ++r) {
      const double f = A[3 * r + c] / A[3 * c + c];
      for (int k = c; k < d; ++k) A[3 * r + k] -= f * A[3 * c + k];
      b[r] -= f * b[c];
    }
  }
  for (int r = d - 1; r >= 0; --r) {
    double acc = b[r];
    for (int k = r + 1; k < d; ++k) acc -= A[3 * r + k] * x[k];
    x[r] = acc / A[3 * r + r];
  }
  return true;
}

/// Newton ascent on the correlation from `s`, kept within one cell of the start.
inline Point polish_peak(const SpectralGrid& g, const Correlation& corr, Point s) {
  const int d = g.dim();
  const Point start = s;
  for (int it = 0; it < 30; ++it) {
    double value;
    std::array<double, 3> grad;
    std::array<double, 9> hess;
    corr.evaluate(s, value, grad, hess);
    std::array<double, 3> step{};
    for (auto& x : hess) x = -x;  // solve (-H) step = grad
    if (!solve_small(d, hess, grad, step)) break;
    double size = 0.0;
    for (int a = 0; a < d; ++a) size = std::max(size, std::abs(step[a]));
    if (!std::isfinite(size)) break;
    for (int a = 0; a < d; ++a) s[a] += step[a];
    for (int a = 0; a < d; ++a)
      if (std::abs(s[a] - start[a]) > g.spacing()) return start;  // left the basin; keep the sub-grid estimate
    if (size < 1e-13 * g.spacing()) break;
  }
  return s;
}

/// Peak of the correlation: best whole-cell shift, quadratic sub-cell
/// estimate per axis, then Newton polish. Returned in [-L, L)^d.
inline Point correlation_peak(const SpectralGrid& g, const Correlation& corr) {
  const auto c = corr.on_grid();
  const std::size_t best = static_cast<std::size_t>(std::max_element(c.begin(), c.end()) - c.begin());
  const auto idx = g.index(best);
  const int n = g.n();
  Point s{};
  for (int a = 0; a < g.dim(); ++a) {
    auto lo = idx, hi = idx;
    lo[a] = (idx[a] + n - 1) % n;
    hi[a] = (idx[a] + 1) % n;
    const double cm = c[g.flat(lo)], c0 = c[best], cp = c[g.flat(hi)];
    const double denom = cm - 2.0 * c0 + cp;
    const double delta = denom < 0.0 ? std::clamp(0.5 * (cm - cp) / denom, -0.5, 0.5) : 0.0;
    s[a] = g.wrap((idx[a] + delta) * g.spacing());
  }
  return polish_peak(g, corr, s);
}

}  // namespace detail

struct MatchResult {
  bool matched = false;
  std::optional<std::size_t> library_index;
  std::string label = "unmatched";
  int sign = 0;
  Point offset{};        // refined center relative to the component center
  double residual = 0.0; // ||w - tau_offset Q||_{H^1} for the best entry
  double component_norm = 0.0;
};

/// Profiles of `library` embedded at the origin of `g`; entries that do not
/// fit the box are left empty and skipped by the matcher.
inline std::vector<std::optional<RealField>> embed_library(const SpectralGrid& g,
                                                           std::span<const EquilibriumProfile> library) {
  std::vector<std::optional<RealField>> out;
  for (const auto& q : library) {
    try {
      out.emplace_back(embed_on_grid(q, g, {0.0, 0.0, 0.0}).field);
    } catch (const UsageError&) {
      out.emplace_back(std::nullopt);
    }
  }
  return out;
}

inline MatchResult match_equilibrium(const SpectralGrid& g, std::span<const double> w,
                                     std::span<const EquilibriumProfile> library,
                                     std::span<const std::optional<RealField>> embedded) {
  if (library.empty()) throw UsageError("equilibrium library is empty");
  MatchResult best;
  best.component_norm = h1_norm(g, w);
  best.residual = std::numeric_limits<double>::infinity();
  const auto W = forward_transform(g, w);
  for (std::size_t e = 0; e < library.size(); ++e) {
    if (!embedded[e]) continue;
    const auto P = forward_transform(g, *embedded[e]);
    const detail::Correlation corr(g, W, P);
    const Point s = detail::correlation_peak(g, corr);
    const auto fitted = translate(g, *embedded[e], s);
    RealField diff(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) diff[i] = w[i] - fitted[i];
    const double r = h1_norm(g, diff);
    if (r < best.residual) {
      best.residual = r;
      best.library_index = e;
      best.label = library[e].label();
      best.sign = library[e].sign;
      best.offset = s;
    }
  }
  if (!best.library_index) {
    best.residual = best.component_norm;
    return best;
  }
  best.matched = best.component_norm > 0.0 && best.residual <= kUnmatchedRatio * best.component_norm;
  if (!best.matched) {
    best.label = "unmatched";
    best.library_index.reset();
    best.sign = 0;
  }
  return best;
}

inline MatchResult match_equilibrium(const SpectralGrid& g, std::span<const double> w,
                                     std::span<const EquilibriumProfile> library) {
  const auto embedded = embed_library(g, library);
  return match_equilibrium(g, w, library, embedded);
}

// ---------------------------------------------------------------------------
// Decomposition
// ---------------------------------------------------------------------------

struct DecomposedComponent {
  Point detected{};       // grid point from the detector
  Point center{};         // refined center
  std::string label = "unmatched";
  std::optional<std::size_t> library_index;
  int sign = 0;
  double residual = 0.0;  // component-level H^1 residual
  double component_norm = 0.0;
};

struct ResolutionDecomposition {
  double t = 0.0;
  int J = 0;
  std::vector<DecomposedComponent> components;
  double global_residual = 0.0;  // ||u - sum_j tau_{x_j} Q^j||_{H^1}
  double ut_l2 = 0.0;
  double min_separation = std::numeric_limits<double>::quiet_NaN();
};

struct DecomposeOptions {
  int joint_sweeps = 3;  // Gauss-Seidel passes re-fitting each center on the full field
};

/// Detect, split, match, then jointly refine the matched centers against
/// u - sum_{l != j} tau_{x_l} Q^l and report the global residual.
inline ResolutionDecomposition decompose(const FieldState& s, const DiagnosticsConfig& cfg,
                                         std::span<const EquilibriumProfile> library,
                                         std::span<const std::optional<RealField>> embedded,
                                         const DecomposeOptions& opt = {}) {
  if (library.empty()) throw UsageError("equilibrium library is empty");
  s.require_finite();
  const auto& g = s.grid;
  const auto set = detect_concentration_points(s, cfg);

  ResolutionDecomposition out;
  out.t = s.t;
  out.J = static_cast<int>(set.size());
  out.ut_l2 = l2_norm(g, s.ut);
  if (set.size() == 0) {
    out.global_residual = h1_norm(g, s.u);
    return out;
  }

  const auto parts = split_components(s, set.centers);
  std::vector<RealField> placed(parts.size());  // tau_{x_j} Q^j, empty when unmatched
  for (std::size_t j = 0; j < parts.size(); ++j) {
    const auto m = match_equilibrium(g, parts[j].w, library, embedded);
    DecomposedComponent c;
    c.detected = parts[j].center;
    c.component_norm = m.component_norm;
    c.residual = m.residual;
    c.label = m.label;
    c.sign = m.sign;
    c.library_index = m.library_index;
    for (int a = 0; a < g.dim(); ++a) c.center[a] = g.wrap(parts[j].center[a] + m.offset[a]);
    if (m.matched) placed[j] = translate(g, *embedded[*m.library_index], c.center);
    out.components.push_back(c);
  }

  for (int sweep = 0; sweep < opt.joint_sweeps; ++sweep) {
    for (std::size_t j = 0; j < parts.size(); ++j) {
      auto& c = out.components[j];
      if (!c.library_index) continue;
      RealField target(s.u.begin(), s.u.end());
      for (std::size_t l = 0; l < parts.size(); ++l)
        if (l != j && !placed[l].empty())
          for (std::size_t i = 0; i < g.size(); ++i) target[i] -= placed[l][i];
      const auto& q = *embedded[*c.library_index];
      const detail::Correlation corr(g, forward_transform(g, target), forward_transform(g, q));
      const Point s_new = detail::polish_peak(g, corr, c.center);
      for (int a = 0; a < g.dim(); ++a) c.center[a] = g.wrap(s_new[a]);
      placed[j] = translate(g, q, c.center);
    }
  }

  RealField rest(s.u.begin(), s.u.end());
  std::vector<Point> centers;
  for (std::size_t j = 0; j < parts.size(); ++j) {
    centers.push_back(out.components[j].center);
    if (!placed[j].empty())
      for (std::size_t i = 0; i < g.size(); ++i) rest[i] -= placed[j][i];
  }
  out.global_residual = h1_norm(g, rest);
  out.min_separation = min_separation(g, centers);
  return out;
}

inline ResolutionDecomposition decompose(const FieldState& s, const DiagnosticsConfig& cfg,
                                         std::span<const EquilibriumProfile> library,
                                         const DecomposeOptions& opt = {}) {
  const auto embedded = embed_library(s.grid, library);
  return decompose(s, cfg, library, embedded, opt);
}

// ---------------------------------------------------------------------------
// Classification
// ---------------------------------------------------------------------------

enum class Verdict { Blowup, UnboundedSuspected, Resolved, Undecided };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Blowup:
      return "blowup";
    case Verdict::UnboundedSuspected:
      return "unbounded-suspected";
    case Verdict::Resolved:
      return "resolved";
    case Verdict::Undecided:
      return "undecided";
  }
  return "undecided";
}

struct ClassifyThresholds {
  double tol_v = 1e-3;          // final ||u_t||_2
  double tol_r = 1e-2;          // final global residual
  double growth_slope = 0.01;   // per unit time, on log H
};

struct TrichotomyVerdict {
  Verdict verdict = Verdict::Undecided;
  std::optional<BlowupReport> blowup;
  double growth_slope = 0.0;  // least-squares slope of log ||(u, u_t)||_H over the last half
  double final_residual = std::numeric_limits<double>::quiet_NaN();
  double final_ut = std::numeric_limits<double>::quiet_NaN();
  int J = 0;
};

/// Least-squares slope of log H over samples with t >= t_end / 2 (t_end the
/// last sample time); zero-norm samples are skipped; 0 with < 2 points.
inline double log_growth_slope(std::span<const TrajectorySample> samples) {
  if (samples.empty()) return 0.0;
  const double t0 = samples.front().t, t1 = samples.back().t;
  const double half = t0 + 0.5 * (t1 - t0);
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int n = 0;
  for (const auto& s : samples) {
    if (s.t < half || !(s.norms.h_norm > 0.0)) continue;
    const double y = std::log(s.norms.h_norm);
    sx += s.t;
    sy += y;
    sxx += s.t * s.t;
    sxy += s.t * y;
    ++n;
  }
  const double den = n * sxx - sx * sx;
  if (n < 2 || !(den > 0.0)) return 0.0;
  return (n * sxy - sx * sy) / den;
}

inline TrichotomyVerdict classify(std::span<const TrajectorySample> samples, const std::optional<BlowupReport>& blowup,
                                  const std::optional<ResolutionDecomposition>& final_decomposition,
                                  const ClassifyThresholds& th = {}) {
  TrichotomyVerdict v;
  if (blowup && blowup->flag) {
    v.verdict = Verdict::Blowup;
    v.blowup = blowup;
    return v;
  }
  v.growth_slope = log_growth_slope(samples);
  if (final_decomposition) {
    v.final_residual = final_decomposition->global_residual;
    v.final_ut = final_decomposition->ut_l2;
    v.J = final_decomposition->J;
  } else if (!samples.empty()) {
    v.final_ut = samples.back().norms.l2_ut;
  }
  if (v.growth_slope > th.growth_slope)
    v.verdict = Verdict::UnboundedSuspected;
  else if (v.final_ut <= th.tol_v && v.final_residual <= th.tol_r)
    v.verdict = Verdict::Resolved;
  else
    v.verdict = Verdict::Undecided;
  return v;
}

}  // namespace dkg
