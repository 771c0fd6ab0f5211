#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "dkg/aligned.hpp"
#include "dkg/errors.hpp"
#include "dkg/grid.hpp"

namespace dkg {

/// Largest admissible exponent for a dimension (infinite for d = 1, 2).
inline double max_exponent(int dim) noexcept {
  if (dim <= 2) return std::numeric_limits<double>::infinity();
  return 1.0 + 4.0 / (dim - 2);
}

inline bool admissible(int dim, double p) noexcept {
  return dim >= 1 && dim <= 3 && std::isfinite(p) && p > 1.0 && p < max_exponent(dim);
}

inline void require_admissible(int dim, double p) {
  if (!admissible(dim, p))
    throw UsageError("exponent p = " + format_number(p) + " is not admissible in dimension " +
                     std::to_string(dim) + " (need 1 < p < " + format_number(max_exponent(dim)) + ")");
}

/// Outcome of a sup-norm escape or a non-finite sample.
struct BlowupReport {
  bool flag = false;
  double time = std::numeric_limits<double>::quiet_NaN();
  double value = std::numeric_limits<double>::quiet_NaN();
};

struct BlowupError : Error {
  explicit BlowupError(BlowupReport r)
      : Error("solution blew up at t = " + format_number(r.time)), report(r) {}
  BlowupReport report;
};

/// Phase-space point (u, du/dt) on a periodic grid, with the model parameters.
struct FieldState {
  FieldState(SpectralGrid grid_, RealField u_, RealField ut_, double p_, double alpha_, double t_ = 0.0)
      : grid(grid_), u(std::move(u_)), ut(std::move(ut_)), t(t_), p(p_), alpha(alpha_) {
    if (u.size() != grid.size() || ut.size() != grid.size())
      throw UsageError("field shapes do not match the grid");
    require_admissible(grid.dim(), p);
    if (!(alpha >= 0.0)) throw UsageError("damping must be nonnegative");
    if (!(t >= 0.0)) throw UsageError("time must be nonnegative");
  }

  static FieldState zero(const SpectralGrid& g, double p, double alpha) {
    return FieldState(g, RealField(g.size(), 0.0), RealField(g.size(), 0.0), p, alpha);
  }

  bool finite() const noexcept {
    for (double v : u)
      if (!std::isfinite(v)) return false;
    for (double v : ut)
      if (!std::isfinite(v)) return false;
    return true;
  }

  /// Throws BlowupError when any sample is not finite.
  void require_finite() const {
    if (!finite()) throw BlowupError(BlowupReport{true, t, std::numeric_limits<double>::quiet_NaN()});
  }

  SpectralGrid grid;
  RealField u;
  RealField ut;
  double t = 0.0;
  double p;
  double alpha;
  bool blown_up = false;
};

/// |u|^(p-1) u evaluated as sign(u)|u|^p, with multiply-only paths for small integer p.
inline double signed_power(double u, double p) noexcept {
  if (p == 3.0) return u * u * u;
  if (p == 2.0) return std::abs(u) * u;
  if (p == 5.0) {
    const double u2 = u * u;
    return u2 * u2 * u;
  }
  return std::copysign(std::pow(std::abs(u), p), u);
}

/// |u|^(p+1).
inline double abs_power_plus_one(double u, double p) noexcept {
  if (p == 3.0) {
    const double u2 = u * u;
    return u2 * u2;
  }
  return std::pow(std::abs(u), p + 1.0);
}

}  // namespace dkg
