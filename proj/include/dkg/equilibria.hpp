#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dkg/field.hpp"
#include "dkg/grid.hpp"
#include "dkg/spectral.hpp"

namespace dkg {

/// A stationary solution Q of -Laplacian Q + Q = |Q|^(p-1) Q.
///
/// Stored either as the classical 1D closed form, as radial samples from a
/// solver or file, or as samples on a specific grid (Petviashvili output,
/// centered at the origin). `sign` multiplies whatever is stored.
struct EquilibriumProfile {
  enum class Kind { ClosedForm, Radial, Grid };

  Kind kind = Kind::Radial;
  int dim = 1;
  double p = 3.0;
  int nodes = 0;
  int sign = 1;

  std::vector<double> radius;  // Radial: increasing, radius[0] == 0
  std::vector<double> values;  // Radial: unsigned profile values

  std::optional<SpectralGrid> grid;  // Grid
  RealField samples;                 // Grid: unsigned samples centered at 0

  /// Stationarity residual from the last check (ODE or embedding grid).
  double residual = std::numeric_limits<double>::quiet_NaN();

  std::string label() const {
    std::string base = nodes == 0 ? "ground" : "nodal" + std::to_string(nodes);
    return base + (sign > 0 ? "+" : "-");
  }

  EquilibriumProfile negated() const {
    EquilibriumProfile q = *this;
    q.sign = -sign;
    return q;
  }

  double central_value() const {
    switch (kind) {
      case Kind::ClosedForm:
        return sign * closed_form_amplitude(p);
      case Kind::Radial:
        return sign * values.front();
      case Kind::Grid:
        return sign * sup_norm(samples);
    }
    return 0.0;
  }

  /// Profile value at radius r >= 0. Grid profiles have no radial evaluation.
  double value_at(double r) const {
    r = std::abs(r);
    switch (kind) {
      case Kind::ClosedForm:
        return sign * closed_form_value(p, r);
      case Kind::Radial:
        return sign * interpolate(r);
      case Kind::Grid:
        throw UsageError("grid-sampled profiles cannot be evaluated at arbitrary radius");
    }
    return 0.0;
  }

  static double closed_form_amplitude(double p) { return std::pow((p + 1.0) / 2.0, 1.0 / (p - 1.0)); }

  static double closed_form_value(double p, double r) {
    const double s = 1.0 / std::cosh(0.5 * (p - 1.0) * r);
    return closed_form_amplitude(p) * std::pow(s, 2.0 / (p - 1.0));
  }

  /// Second derivative of the closed form, from its analytic expression.
  static double closed_form_second_derivative(double p, double r) {
    const double beta = 2.0 / (p - 1.0);
    const double gamma = 0.5 * (p - 1.0);
    const double s = 1.0 / std::cosh(gamma * r);
    return closed_form_amplitude(p) * gamma * gamma *
           (beta * beta * std::pow(s, beta) - beta * (beta + 1.0) * std::pow(s, beta + 2.0));
  }

 private:
  // Four-point Lagrange interpolation with the even extension across r = 0.
  double interpolate(double r) const {
    if (radius.empty()) return 0.0;
    if (r >= radius.back()) return r == radius.back() ? values.back() : 0.0;
    const auto it = std::upper_bound(radius.begin(), radius.end(), r);
    const long i = static_cast<long>(it - radius.begin()) - 1;  // radius[i] <= r < radius[i+1]
    const long last = static_cast<long>(radius.size()) - 1;
    long start = std::clamp(i - 1, -2L, last - 3);
    double xs[4], ys[4];
    for (int j = 0; j < 4; ++j) {
      const long idx = start + j;
      if (idx < 0) {
        xs[j] = -radius[static_cast<std::size_t>(-idx)];
        ys[j] = values[static_cast<std::size_t>(-idx)];
      } else {
        xs[j] = radius[static_cast<std::size_t>(idx)];
        ys[j] = values[static_cast<std::size_t>(idx)];
      }
    }
    double acc = 0.0;
    for (int j = 0; j < 4; ++j) {
      double w = 1.0;
      for (int m = 0; m < 4; ++m)
        if (m != j) w *= (r - xs[m]) / (xs[j] - xs[m]);
      acc += w * ys[j];
    }
    return acc;
  }
};

// ---------------------------------------------------------------------------
// Closed form (d = 1)
// ---------------------------------------------------------------------------

/// Q(x) = ((p+1)/2)^(1/(p-1)) sech^(2/(p-1))((p-1)x/2).
inline EquilibriumProfile closed_form_ground_state_1d(double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw UsageError("closed-form ground state needs p > 1");
  EquilibriumProfile q;
  q.kind = EquilibriumProfile::Kind::ClosedForm;
  q.dim = 1;
  q.p = p;
  double worst = 0.0;
  for (int i = 0; i <= 4000; ++i) {
    const double r = 0.01 * i;
    const double v = EquilibriumProfile::closed_form_value(p, r);
    const double res = -EquilibriumProfile::closed_form_second_derivative(p, r) + v - signed_power(v, p);
    worst = std::max(worst, std::abs(res));
  }
  q.residual = worst;
  return q;
}

// ---------------------------------------------------------------------------
// Radial shooting
// ---------------------------------------------------------------------------

struct ShootingConfig {
  double bracket_lo = 0.0;  // 0: start from half the 1D closed-form central value
  double bracket_hi = 0.0;  // 0: start from four times that value
  double r_max = 40.0;
  double step = 1e-3;
  double decay_tolerance = 1e-8;
  int max_iterations = 200;
};

namespace detail {

enum class ShotOutcome { Undershoot, Overshoot };

struct Shot {
  ShotOutcome outcome = ShotOutcome::Undershoot;
  std::vector<double> q;   // samples at r = i * step
  std::vector<double> dq;
};

// Q'' + (d-1)/r Q' = Q - |Q|^(p-1) Q, started from the Taylor series at r = step.
inline Shot shoot(int dim, double p, int nodes, double a, const ShootingConfig& cfg, bool record) {
  const double h = cfg.step;
  const auto rhs = [&](double r, double q, double dq) {
    return q - signed_power(q, p) - (dim - 1) / r * dq;
  };
  const double f0 = a - signed_power(a, p);
  const double c = f0 / (2.0 * dim);
  const double e = (1.0 - p * std::pow(std::abs(a), p - 1.0)) * c / (4.0 * dim + 8.0);

  const auto rk4 = [&](double r, double& q, double& dq, double step) {
    const double k1q = dq, k1d = rhs(r, q, dq);
    const double k2q = dq + 0.5 * step * k1d, k2d = rhs(r + 0.5 * step, q + 0.5 * step * k1q, dq + 0.5 * step * k1d);
    const double k3q = dq + 0.5 * step * k2d, k3d = rhs(r + 0.5 * step, q + 0.5 * step * k2q, dq + 0.5 * step * k2d);
    const double k4q = dq + step * k3d, k4d = rhs(r + step, q + step * k3q, dq + step * k3d);
    q += step / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
    dq += step / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
  };

  // Series at r = h / 64, then fine steps out to r = h.
  constexpr int kStartDivisions = 64;
  const double r0 = h / kStartDivisions;
  double q = a + c * r0 * r0 + e * r0 * r0 * r0 * r0;
  double dq = 2.0 * c * r0 + 4.0 * e * r0 * r0 * r0;
  for (int k = 1; k < kStartDivisions; ++k) rk4(k * r0, q, dq, r0);
  double r = h;

  Shot shot;
  if (record) {
    shot.q = {a, q};
    shot.dq = {0.0, dq};
  }

  int crossings = 0;
  bool rising = false;  // |Q| increasing since the last crossing
  const long steps = static_cast<long>(std::ceil(cfg.r_max / h));
  for (long i = 1; i < steps; ++i) {
    double qn = q, dqn = dq;
    // The (d-1)/r coefficient degrades RK4 near the origin: refine there.
    const int sub = r < 32.0 * h ? 16 : 1;
    for (int k = 0; k < sub; ++k) rk4(r + k * h / sub, qn, dqn, h / sub);
    r = static_cast<double>(i + 1) * h;

    if (!std::isfinite(qn) || std::abs(qn) > 1e6) {
      shot.outcome = crossings > nodes ? ShotOutcome::Overshoot : ShotOutcome::Undershoot;
      return shot;
    }
    if ((qn > 0.0) != (q > 0.0) && qn != 0.0) {
      ++crossings;
      rising = true;
      if (crossings > nodes) {
        shot.outcome = ShotOutcome::Overshoot;
        return shot;
      }
    } else if (qn * dqn > 0.0 && !rising) {
      // |Q| turned back up before reaching zero.
      shot.outcome = ShotOutcome::Undershoot;
      return shot;
    } else if (qn * dqn <= 0.0) {
      rising = false;
    }
    q = qn;
    dq = dqn;
    if (record) {
      shot.q.push_back(q);
      shot.dq.push_back(dq);
    }
  }
  shot.outcome = ShotOutcome::Undershoot;
  return shot;
}

// Decaying solution of the linearized tail equation, up to a constant.
inline double decaying_tail(int dim, double r) {
  switch (dim) {
    case 1:
      return std::exp(-r);
    case 2:
      return std::cyl_bessel_k(0.0, r);
    default:
      return std::exp(-r) / r;
  }
}

inline int sign_changes(std::span<const double> v) {
  int count = 0;
  double prev = 0.0;
  for (double x : v) {
    if (x == 0.0) continue;
    if (prev != 0.0 && (x > 0.0) != (prev > 0.0)) ++count;
    prev = x;
  }
  return count;
}

}  // namespace detail

/// Radial bound state with `nodes` sign changes, by bisection on Q(0).
///
/// The ODE is integrated only while the two bracketing shots agree; beyond
/// that point the profile continues along the decaying linearized tail,
/// which the bisection error would otherwise swamp.
inline EquilibriumProfile radial_shoot(int dim, double p, int nodes, const ShootingConfig& cfg = {}) {
  require_admissible(dim, p);
  if (nodes < 0) throw UsageError("node count must be nonnegative");
  if (!(cfg.step > 0.0) || !(cfg.r_max >= 30.0)) throw UsageError("shooting needs step > 0 and r_max >= 30");
  if (dim == 1 && nodes > 0)
    throw NoConvergenceError("no decaying even solution with sign changes exists in one dimension");

  using detail::ShotOutcome;
  const double cf = EquilibriumProfile::closed_form_amplitude(p);
  double lo = cfg.bracket_lo > 0.0 ? cfg.bracket_lo : 0.5 * cf;
  double hi = cfg.bracket_hi > 0.0 ? cfg.bracket_hi : 4.0 * cf;
  const auto outcome = [&](double a) { return detail::shoot(dim, p, nodes, a, cfg, false).outcome; };

  int widen = 0;
  while (outcome(lo) != ShotOutcome::Undershoot) {
    lo *= 0.5;
    if (++widen > 60) throw NoConvergenceError("shooting bracket: no undershoot found below " + format_number(lo));
  }
  widen = 0;
  while (outcome(hi) != ShotOutcome::Overshoot) {
    hi *= 2.0;
    if (++widen > 30) throw NoConvergenceError("shooting bracket: no overshoot found up to " + format_number(hi));
  }
  for (int it = 0; it < cfg.max_iterations && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (outcome(mid) == ShotOutcome::Overshoot ? hi : lo) = mid;
  }

  const auto below = detail::shoot(dim, p, nodes, lo, cfg, true);
  const auto above = detail::shoot(dim, p, nodes, hi, cfg, true);
  const std::size_t common = std::min(below.q.size(), above.q.size());
  const double agree = 1e-10 * lo;

  // Last index where the two shots still agree and the profile is decaying.
  std::size_t match = 0;
  for (std::size_t i = 1; i < common; ++i) {
    if (std::abs(below.q[i] - above.q[i]) > agree) break;
    match = i;
  }
  while (match > 0 && below.q[match] * below.dq[match] >= 0.0) --match;
  if (match == 0) throw NoConvergenceError("shooting: bracketing solutions never agreed on a decaying tail");

  const double h = cfg.step;
  const std::size_t total = static_cast<std::size_t>(std::ceil(cfg.r_max / h)) + 1;
  EquilibriumProfile q;
  q.kind = EquilibriumProfile::Kind::Radial;
  q.dim = dim;
  q.p = p;
  q.nodes = nodes;
  q.radius.resize(total);
  q.values.resize(total);
  const double rm = static_cast<double>(match) * h;
  const double qm = 0.5 * (below.q[match] + above.q[match]);
  const double scale = qm / detail::decaying_tail(dim, rm);
  for (std::size_t i = 0; i < total; ++i) {
    const double r = static_cast<double>(i) * h;
    q.radius[i] = r;
    q.values[i] = i <= match ? 0.5 * (below.q[i] + above.q[i]) : scale * detail::decaying_tail(dim, r);
  }

  if (std::abs(q.values.back()) > cfg.decay_tolerance)
    throw NoConvergenceError("shooting: |Q(r_max)| = " + format_number(std::abs(q.values.back())) +
                             " exceeds the decay tolerance");
  const int found = detail::sign_changes(q.values);
  if (found != nodes)
    throw InternalError("shooting converged to a profile with " + std::to_string(found) + " sign changes, wanted " +
                        std::to_string(nodes));

  // Fourth-order centered differences of the radial ODE, even extension at r = 0.
  const auto at = [&](long j) { return q.values[static_cast<std::size_t>(j < 0 ? -j : j)]; };
  double worst = 0.0;
  for (long i = 1; i + 2 < static_cast<long>(total); ++i) {
    const double r = q.radius[static_cast<std::size_t>(i)];
    const double d2 = (-at(i - 2) + 16.0 * at(i - 1) - 30.0 * at(i) + 16.0 * at(i + 1) - at(i + 2)) / (12.0 * h * h);
    const double d1 = (at(i - 2) - 8.0 * at(i - 1) + 8.0 * at(i + 1) - at(i + 2)) / (12.0 * h);
    const double res = d2 + (dim - 1) / r * d1 - at(i) + signed_power(at(i), p);
    worst = std::max(worst, std::abs(res));
  }
  q.residual = worst;
  return q;
}

// ---------------------------------------------------------------------------
// Embedding
// ---------------------------------------------------------------------------

/// Sup-norm of -Laplacian Q + Q - |Q|^(p-1) Q on the grid.
inline double stationarity_residual(const SpectralGrid& g, std::span<const double> q, double p) {
  const auto lap = laplacian(g, q);
  double worst = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i)
    worst = std::max(worst, std::abs(-lap[i] + q[i] - signed_power(q[i], p)));
  return worst;
}

struct Embedding {
  RealField field;
  double residual = 0.0;  // stationarity residual on the grid
  double edge_tail = 0.0; // |Q| at distance L from the center
};

inline constexpr double kEmbeddingTailLimit = 1e-10;
inline constexpr double kStationarityLimit = 1e-6;

/// Samples Q(x - center) at the minimum-image distance from `center`.
inline Embedding embed_on_grid(const EquilibriumProfile& q, const SpectralGrid& g, const Point& center) {
  if (q.dim != g.dim())
    throw UsageError("profile dimension " + std::to_string(q.dim) + " differs from grid dimension " +
                     std::to_string(g.dim()));
  Embedding e;
  if (q.kind == EquilibriumProfile::Kind::Grid) {
    if (!q.grid || !(*q.grid == g)) throw UsageError("grid-sampled profile embedded on a different grid");
    e.field = translate(g, q.samples, center);
    for (auto& v : e.field) v *= q.sign;
    e.edge_tail = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto idx = g.index(i);
      if (idx[0] == 0) e.edge_tail = std::max(e.edge_tail, std::abs(q.samples[i]));
    }
  } else {
    e.edge_tail = std::abs(q.value_at(g.half_length()));
    if (e.edge_tail > kEmbeddingTailLimit)
      throw UsageError("box too small for profile: |Q(L)| = " + format_number(e.edge_tail) + " exceeds " +
                       format_number(kEmbeddingTailLimit));
    e.field.resize(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) e.field[i] = q.value_at(g.periodic_distance(g.point(i), center));
  }
  e.residual = stationarity_residual(g, e.field, q.p);
  return e;
}

/// Embedding that rejects profiles failing the stationarity check.
inline Embedding embed_stationary(const EquilibriumProfile& q, const SpectralGrid& g, const Point& center) {
  auto e = embed_on_grid(q, g, center);
  if (e.residual > kStationarityLimit)
    throw NoConvergenceError(q.label() + " profile rejected: stationarity residual " + format_number(e.residual) +
                             " on this grid exceeds " + format_number(kStationarityLimit));
  return e;
}

// ---------------------------------------------------------------------------
// Petviashvili iteration
// ---------------------------------------------------------------------------

struct PetviashviliConfig {
  double tolerance = 1e-12;
  int max_iterations = 5000;
};

/// One step u -> M^(-gamma) (1 - Laplacian)^(-1) |u|^(p-1) u, with
/// M = <(1 - Laplacian)^(-1)|u|^(p-1)u, u> / <u, u> and gamma = p / (p - 1).
inline RealField petviashvili_step(const SpectralGrid& g, double p, std::span<const double> u) {
  RealField nl(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) nl[i] = signed_power(u[i], p);
  auto spec = forward_transform(g, nl);
  apply_multiplier(g, spec, [](const ModeInfo& m) { return m.nyquist ? 0.0 : 1.0 / (1.0 + m.k2); });
  auto v = inverse_transform(g, spec);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    num += v[i] * u[i];
    den += u[i] * u[i];
  }
  if (!(den > 0.0) || !(num > 0.0)) throw NoConvergenceError("Petviashvili iteration collapsed");
  const double factor = std::pow(num / den, -p / (p - 1.0));
  for (auto& x : v) x *= factor;
  return v;
}

inline EquilibriumProfile petviashvili(const SpectralGrid& g, double p, std::span<const double> seed,
                                       const PetviashviliConfig& cfg = {}) {
  require_admissible(g.dim(), p);
  if (seed.size() != g.size()) throw UsageError("seed does not match grid");
  double peak = 0.0;
  for (double v : seed) {
    if (v < 0.0) throw UsageError("Petviashvili seed must be nonnegative");
    peak = std::max(peak, v);
  }
  if (!(peak > 0.0)) throw UsageError("Petviashvili seed must be nonzero");

  RealField u(seed.begin(), seed.end());
  for (int it = 0; it < cfg.max_iterations; ++it) {
    auto next = petviashvili_step(g, p, u);
    double diff = 0.0, size = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      diff = std::max(diff, std::abs(next[i] - u[i]));
      size = std::max(size, std::abs(next[i]));
    }
    if (!std::isfinite(size) || size > 1e8 || size < 1e-8)
      throw NoConvergenceError("Petviashvili iteration diverged or collapsed at step " + std::to_string(it));
    u = std::move(next);
    if (diff <= cfg.tolerance * std::max(1.0, size)) {
      EquilibriumProfile q;
      q.kind = EquilibriumProfile::Kind::Grid;
      q.dim = g.dim();
      q.p = p;
      q.grid = g;
      q.samples = std::move(u);
      q.residual = stationarity_residual(g, q.samples, p);
      return q;
    }
  }
  throw NoConvergenceError("Petviashvili iteration did not reach tolerance in " +
                           std::to_string(cfg.max_iterations) + " steps");
}

// ---------------------------------------------------------------------------
// Library
// ---------------------------------------------------------------------------

/// Ground state for (d, p): closed form in 1D, shooting otherwise.
inline EquilibriumProfile ground_state(int dim, double p) {
  if (dim == 1) return closed_form_ground_state_1d(p);
  return radial_shoot(dim, p, 0);
}

/// Default matching library: +/- ground state, plus +/- radial nodal states
/// with up to `max_nodes` sign changes in d = 2. (None exist in d = 1; in
/// d = 3 their central values are too large to resolve on practical grids.)
inline std::vector<EquilibriumProfile> default_library(int dim, double p, int max_nodes = 2) {
  std::vector<EquilibriumProfile> lib;
  const auto g = ground_state(dim, p);
  lib.push_back(g);
  lib.push_back(g.negated());
  if (dim == 2) {
    for (int k = 1; k <= max_nodes; ++k) {
      const auto q = radial_shoot(dim, p, k);
      lib.push_back(q);
      lib.push_back(q.negated());
    }
  }
  return lib;
}

}  // namespace dkg
