#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dkg/fft.hpp"
#include "dkg/field.hpp"
#include "dkg/spectral.hpp"

namespace dkg {

struct EvolutionConfig {
  double dt = 1e-3;
  double final_time = 1.0;
  double blowup_threshold = 1e6;  // on sup |u|
  int stride = 100;               // steps between samples
  bool dealias = true;
  bool nonlinear = true;          // false: pure linear damped Klein-Gordon flow
};

struct TrajectorySample {
  double t = 0.0;
  NormReport norms;
  double energy = 0.0;
  double dissipation = 0.0;  // 2 alpha * integral_0^t ||u_t||_2^2, trapezoid per step
};

/// Exact solution operator of u'' + 2 alpha u' + (1 + k^2) u = 0 over `dt`,
/// acting on (u, u') of one Fourier mode.
struct ModePropagator {
  double uu = 1.0, uv = 0.0;
  double vu = 0.0, vv = 1.0;

  static ModePropagator make(double k2, double alpha, double dt) {
    const double w2 = 1.0 + k2 - alpha * alpha;
    double dc = 0.0;  // e^{-alpha dt} * cos-like factor
    double ds = 0.0;  // e^{-alpha dt} * sin-like factor / omega
    if (w2 > 0.0) {
      const double w = std::sqrt(w2);
      const double decay = std::exp(-alpha * dt);
      dc = decay * std::cos(w * dt);
      ds = decay * std::sin(w * dt) / w;
    } else if (w2 < 0.0) {
      // Overdamped: both exponents -alpha +/- kappa are <= 0 for dt > 0.
      const double kappa = std::sqrt(-w2);
      const double fast = std::exp((-alpha - kappa) * dt);
      const double slow = std::exp((-alpha + kappa) * dt);
      dc = 0.5 * (slow + fast);
      ds = std::abs(kappa * dt) < 1.0 ? std::exp(-alpha * dt) * std::sinh(kappa * dt) / kappa
                                      : 0.5 * (slow - fast) / kappa;
    } else {
      const double decay = std::exp(-alpha * dt);
      dc = decay;
      ds = decay * dt;
    }
    ModePropagator m;
    m.uu = dc + alpha * ds;
    m.uv = ds;
    m.vu = -(1.0 + k2) * ds;
    m.vv = dc - alpha * ds;
    return m;
  }

  void apply(std::complex<double>& u, std::complex<double>& v) const noexcept {
    const auto un = uu * u + uv * v;
    const auto vn = vu * u + vv * v;
    u = un;
    v = vn;
  }
};

/// Advance the linear part exactly by `dt` (any sign; negative runs backward).
inline FieldState linear_flow(const FieldState& s, double dt) {
  const auto& g = s.grid;
  auto U = forward_transform(g, s.u);
  auto V = forward_transform(g, s.ut);
  g.for_each_mode([&](std::size_t i, const ModeInfo& m) {
    ModePropagator::make(m.k2, s.alpha, dt).apply(U[i], V[i]);
  });
  FieldState out = s;
  inverse_transform_destructive(g, U, out.u);
  inverse_transform_destructive(g, V, out.ut);
  out.t = s.t + dt;
  return out;
}

/// dt * sqrt(1 + k_max^2) for the grid's Nyquist wavenumber.
inline double stability_number(const SpectralGrid& g, double dt) {
  return dt * std::sqrt(1.0 + g.nyquist() * g.nyquist());
}

inline constexpr double kStabilityLimit = 0.5;

/// Largest dt passing the stability check on `g`.
inline double max_stable_dt(const SpectralGrid& g) {
  return kStabilityLimit / std::sqrt(1.0 + g.nyquist() * g.nyquist());
}

inline void validate(const EvolutionConfig& c, const SpectralGrid& g) {
  if (!(c.dt > 0.0)) throw UsageError("time step must be positive");
  if (!(c.final_time >= 0.0)) throw UsageError("final time must be nonnegative");
  if (!(c.blowup_threshold > 0.0)) throw UsageError("blowup threshold must be positive");
  if (c.stride < 1) throw UsageError("sampling stride must be at least one step");
  const double s = stability_number(g, c.dt);
  if (s > kStabilityLimit)
    throw UsageError("dt * sqrt(1 + k_max^2) = " + format_number(s) + " exceeds " + format_number(kStabilityLimit) +
                     "; dt must be <= " + format_number(max_stable_dt(g)));
}

/// Strang-split stepper holding the state in Fourier space between steps.
///
/// One step: exact linear flow over dt/2, kick u_t += dt * P(|Pu|^(p-1) Pu)
/// with P the dealias mask, exact linear flow over dt/2.
class Evolver {
 public:
  Evolver(const FieldState& init, const EvolutionConfig& cfg)
      : grid_(init.grid), cfg_(cfg), p_(init.p), alpha_(init.alpha), t0_(init.t) {
    if (!(cfg.dt > 0.0)) throw UsageError("time step must be positive");
    U_ = forward_transform(grid_, init.u);
    V_ = forward_transform(grid_, init.ut);
    const auto modes = grid_.modes();
    half_.reserve(modes.size());
    mask_.reserve(modes.size());
    for (const auto& m : modes) {
      half_.push_back(ModePropagator::make(m.k2, alpha_, 0.5 * cfg.dt));
      mask_.push_back(cfg.dealias ? (m.retained ? 1.0 : 0.0) : (m.nyquist ? 0.0 : 1.0));
      weight_.push_back(m.weight);
    }
    scratch_spec_.resize(U_.size());
    ut_sq_ = ut_l2_sq();
  }

  /// Returns false when the step produced non-finite values or crossed the threshold.
  bool step() {
    half_step();
    if (cfg_.nonlinear) {
      for (std::size_t i = 0; i < U_.size(); ++i) scratch_spec_[i] = U_[i] * mask_[i];
      inverse_transform_destructive(grid_, scratch_spec_, scratch_real_);
      double peak = 0.0;
      bool finite = true;
      for (auto& x : scratch_real_) {
        const double a = std::abs(x);
        if (!std::isfinite(x)) finite = false;
        peak = std::max(peak, a);
        x = signed_power(x, p_);
      }
      ++steps_;
      if (!finite || peak > cfg_.blowup_threshold) {
        blowup_ = BlowupReport{true, time(), finite ? peak : std::numeric_limits<double>::infinity()};
        return false;
      }
      forward_transform(grid_, scratch_real_, scratch_spec_);
      for (std::size_t i = 0; i < V_.size(); ++i) V_[i] += cfg_.dt * mask_[i] * scratch_spec_[i];
    } else {
      ++steps_;
    }
    half_step();
    const double next = ut_l2_sq();
    if (!std::isfinite(next)) {
      blowup_ = BlowupReport{true, time(), std::numeric_limits<double>::infinity()};
      return false;
    }
    dissipation_ += alpha_ * cfg_.dt * (ut_sq_ + next);
    ut_sq_ = next;
    return true;
  }

  double time() const noexcept { return t0_ + static_cast<double>(steps_) * cfg_.dt; }
  long steps() const noexcept { return steps_; }
  double dissipation() const noexcept { return dissipation_; }
  const std::optional<BlowupReport>& blowup() const noexcept { return blowup_; }

  FieldState state() const {
    Spectrum u = U_, v = V_;
    RealField uu, vv;
    inverse_transform_destructive(grid_, u, uu);
    inverse_transform_destructive(grid_, v, vv);
    FieldState s(grid_, std::move(uu), std::move(vv), p_, alpha_, time());
    return s;
  }

  /// ||u_t||_2^2 by Parseval.
  double ut_l2_sq() const {
    double acc = 0.0;
    for (std::size_t i = 0; i < V_.size(); ++i) acc += weight_[i] * std::norm(V_[i]);
    return acc * std::pow(grid_.box_length(), grid_.dim());
  }

 private:
  void half_step() {
    for (std::size_t i = 0; i < U_.size(); ++i) half_[i].apply(U_[i], V_[i]);
  }

  SpectralGrid grid_;
  EvolutionConfig cfg_;
  double p_;
  double alpha_;
  double t0_;
  long steps_ = 0;
  Spectrum U_, V_;
  std::vector<ModePropagator> half_;
  std::vector<double> mask_;
  std::vector<double> weight_;
  Spectrum scratch_spec_;
  RealField scratch_real_;
  double ut_sq_ = 0.0;
  double dissipation_ = 0.0;
  std::optional<BlowupReport> blowup_;
};

/// One Strang step from `s`; throws BlowupError on threshold escape.
inline FieldState step(const FieldState& s, const EvolutionConfig& cfg) {
  s.require_finite();
  Evolver ev(s, cfg);
  if (!ev.step()) throw BlowupError(*ev.blowup());
  return ev.state();
}

inline TrajectorySample make_sample(const FieldState& s, double dissipation) {
  TrajectorySample smp;
  smp.t = s.t;
  smp.norms = norms(s);
  smp.energy = energy(s);
  smp.dissipation = dissipation;
  return smp;
}

struct EvolutionResult {
  std::vector<TrajectorySample> samples;
  std::optional<BlowupReport> blowup;
  FieldState final_state;  // end state, or the last sampled state before blowup
};

using Observer = std::function<void(const FieldState&, const TrajectorySample&)>;

/// Number of steps to reach `final_time`; it must be a whole multiple of dt.
inline long step_count(const EvolutionConfig& cfg) {
  const double ratio = cfg.final_time / cfg.dt;
  const long steps = std::lround(ratio);
  if (std::abs(ratio - static_cast<double>(steps)) > 1e-9 * std::max(1.0, ratio))
    throw UsageError("final time must be a whole number of time steps");
  return steps;
}

/// Advance `initial` by `cfg.final_time`, sampling every `cfg.stride` steps
/// (and at the last step). Blowup ends the run and is reported, not thrown.
inline EvolutionResult evolve(const FieldState& initial, const EvolutionConfig& cfg, const Observer& observer = {}) {
  validate(cfg, initial.grid);
  initial.require_finite();
  const long total = step_count(cfg);

  Evolver ev(initial, cfg);
  EvolutionResult out{{}, std::nullopt, initial};
  const auto record = [&](FieldState s) {
    auto smp = make_sample(s, ev.dissipation());
    out.samples.push_back(smp);
    if (observer) observer(s, smp);
    out.final_state = std::move(s);
  };
  record(ev.state());
  for (long i = 1; i <= total; ++i) {
    if (!ev.step()) {
      out.blowup = ev.blowup();
      out.final_state.blown_up = true;
      return out;
    }
    if (i % cfg.stride == 0 || i == total) record(ev.state());
  }
  return out;
}

/// max over sample pairs of |E(t2) - E(t1) + 2 alpha int_{t1}^{t2} ||u_t||^2| / max(1, |E(t1)|).
inline double dissipation_identity_defect(const std::vector<TrajectorySample>& samples) {
  if (samples.size() < 2) throw UsageError("identity check needs at least two samples");
  double worst = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i)
    for (std::size_t j = i + 1; j < samples.size(); ++j) {
      const auto& a = samples[i];
      const auto& b = samples[j];
      const double defect = std::abs(b.energy - a.energy + (b.dissipation - a.dissipation));
      worst = std::max(worst, defect / std::max(1.0, std::abs(a.energy)));
    }
  return worst;
}

inline double dissipation_identity_defect(const EvolutionResult& run) {
  if (run.blowup) throw UsageError("identity check is undefined on a blown-up run");
  return dissipation_identity_defect(run.samples);
}

}  // namespace dkg
