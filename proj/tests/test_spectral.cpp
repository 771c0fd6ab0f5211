#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "test_support.hpp"

using namespace dkg;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using testing_support::max_abs_diff;

TEST_CASE("grid rejects bad geometry", "[grid]") {
  CHECK_THROWS_AS(SpectralGrid(1, 8, 1.0), UsageError);
  CHECK_THROWS_AS(SpectralGrid(1, 24, 1.0), UsageError);
  CHECK_THROWS_AS(SpectralGrid(4, 16, 1.0), UsageError);
  CHECK_THROWS_AS(SpectralGrid(1, 16, 0.0), UsageError);
  const SpectralGrid g(2, 32, 5.0);
  CHECK(g.spacing() == 10.0 / 32);
  CHECK(g.size() == 32 * 32);
  CHECK(g.spectral_size() == 32 * 17);
}

TEST_CASE("wavenumbers are symmetric except the Nyquist mode", "[grid]") {
  const SpectralGrid g(1, 16, 2.0);
  for (int i = 1; i < 8; ++i) CHECK(g.wavenumber(g.mode_of(i)) == -g.wavenumber(g.mode_of(16 - i)));
  CHECK(g.mode_of(8) == -8);
  CHECK_THAT(g.nyquist(), WithinRel(std::numbers::pi * 16 / 4.0, 1e-15));
}

TEST_CASE("forward transform of simple fields", "[fft]") {
  SECTION("constant field lives in mode 0") {
    for (int d : {1, 2, 3}) {
      const SpectralGrid g(d, 16, 3.0);
      RealField one(g.size(), 1.0);
      const auto spec = forward_transform(g, one);
      CHECK_THAT(spec[0].real(), WithinAbs(1.0, 1e-15));
      double rest = 0.0;
      for (std::size_t s = 1; s < spec.size(); ++s) rest += std::abs(spec[s]);
      CHECK(rest < 1e-13);
    }
  }
  SECTION("single harmonic has two conjugate modes") {
    const SpectralGrid g(1, 64, 4.0);
    RealField f(g.size());
    for (int i = 0; i < g.n(); ++i) f[i] = std::cos(std::numbers::pi * g.coordinate(i) / g.half_length());
    const auto spec = forward_transform(g, f);
    int nonzero = 0;
    for (int m = -32; m < 32; ++m) {
      const auto c = spectrum_at(g, spec, {m, 0, 0});
      if (std::abs(c) > 1e-13) {
        ++nonzero;
        CHECK(std::abs(m) == 1);
      }
    }
    CHECK(nonzero == 2);
    const auto plus = spectrum_at(g, spec, {1, 0, 0});
    const auto minus = spectrum_at(g, spec, {-1, 0, 0});
    CHECK_THAT(std::abs(plus - std::conj(minus)), WithinAbs(0.0, 1e-15));
    CHECK_THAT(std::abs(plus), WithinAbs(0.5, 1e-14));
  }
  SECTION("shape mismatch is a usage error") {
    const SpectralGrid g(1, 16, 1.0);
    RealField f(17, 0.0);
    CHECK_THROWS_AS(forward_transform(g, f), UsageError);
  }
}

TEST_CASE("forward transform agrees with a direct DFT", "[fft]") {
  const SpectralGrid g(1, 64, 2.5);
  std::mt19937_64 rng(11);
  const auto f = testing_support::random_field(g, rng);
  const auto spec = forward_transform(g, f);
  const auto ref = oracle::naive_dft(std::vector<double>(f.begin(), f.end()));
  for (int m = -32; m < 32; ++m) {
    const auto c = spectrum_at(g, spec, {m, 0, 0});
    CHECK(std::abs(c - ref[m + 32]) < 1e-14);
  }
}

TEST_CASE("transform round trip", "[fft]") {
  std::mt19937_64 rng(7);
  for (int d : {1, 2, 3}) {
    const SpectralGrid g(d, d == 3 ? 16 : 64, 1.7);
    const auto f = testing_support::random_field(g, rng);
    const auto back = inverse_transform(g, forward_transform(g, f));
    CHECK(max_abs_diff(f, back) / sup_norm(f) <= 1e-12);
  }
}

TEST_CASE("Plancherel: physical and modal L2 agree", "[fft]") {
  std::mt19937_64 rng(3);
  for (int d : {1, 2}) {
    const SpectralGrid g(d, 32, 2.0);
    const auto f = testing_support::random_field(g, rng);
    const double phys = l2_norm_sq(g, f);
    const double modal = spectral_quadrature(g, forward_transform(g, f), [](const ModeInfo&) { return 1.0; });
    CHECK_THAT(modal, WithinRel(phys, 1e-12));
  }
}

TEST_CASE("projectors partition unity", "[projector]") {
  std::mt19937_64 rng(5);
  for (int d : {1, 2}) {
    const SpectralGrid g(d, 64, 3.0);
    const auto f = testing_support::random_field(g, rng);
    for (auto shape : {CutoffShape::Smooth, CutoffShape::Sharp}) {
      for (double N : {0.3, 2.0, 10.0, g.nyquist()}) {
        const auto lo = apply_projector(g, f, {N, Band::Low, shape});
        const auto hi = apply_projector(g, f, {N, Band::High, shape});
        double err = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) err = std::max(err, std::abs(lo[i] + hi[i] - f[i]));
        CHECK(err <= 1e-13);
      }
    }
  }
}

TEST_CASE("projector transfer functions lie in [0, 1]", "[projector]") {
  for (auto band : {Band::Low, Band::High, Band::Dyadic})
    for (auto shape : {CutoffShape::Smooth, CutoffShape::Sharp})
      for (int i = 0; i <= 4000; ++i) {
        const double v = transfer({3.0, band, shape}, 0.005 * i);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
      }
  // Smooth high-pass is zero up to N/2 and one from N.
  CHECK(high_pass_weight(1.0, 2.0, CutoffShape::Smooth) == 0.0);
  CHECK(high_pass_weight(2.0, 2.0, CutoffShape::Smooth) == 1.0);
  CHECK_THAT(high_pass_weight(std::sqrt(2.0), 2.0, CutoffShape::Smooth), WithinAbs(0.5, 1e-15));
}

TEST_CASE("low-pass keeps slow harmonics", "[projector]") {
  const SpectralGrid g(1, 256, 10.0);
  RealField f(g.size());
  for (int i = 0; i < g.n(); ++i) f[i] = std::sin(3.0 * std::numbers::pi * g.coordinate(i) / g.half_length());
  const double k = 3.0 * std::numbers::pi / 10.0;
  const auto lo = apply_projector(g, f, {8.0 * k, Band::Low, CutoffShape::Smooth});
  CHECK(max_abs_diff(lo, f) <= 1e-12);
}

TEST_CASE("projector cutoff validation", "[projector]") {
  const SpectralGrid g(1, 32, 1.0);
  RealField f(g.size(), 0.0);
  CHECK_THROWS_AS(apply_projector(g, f, {0.0}), UsageError);
  CHECK_THROWS_AS(apply_projector(g, f, {-1.0}), UsageError);
  CHECK_THROWS_AS(apply_projector(g, f, {2.0 * g.nyquist()}), UsageError);
}

namespace {

// ||P_{>=N} Q||_{H^1} for Q = sqrt(2) sech x on a periodic box of length 2L,
// from its Fourier transform sqrt(2) pi sech(pi k / 2) sampled at k = pi m / L
// (periodization and aliasing errors are below e^{-L}).
double sech_tail_oracle(double N, double L) {
  double acc = 0.0;
  for (int m = -4000; m <= 4000; ++m) {
    const double k = std::numbers::pi * m / L;
    const double F = std::sqrt(2.0) * std::numbers::pi / std::cosh(0.5 * std::numbers::pi * k);
    const double w = high_pass_weight(std::abs(k), N, CutoffShape::Smooth);
    acc += (1.0 + k * k) * w * w * F * F;
  }
  return std::sqrt(acc / (2.0 * L));
}

// Same quantity for the line, by Simpson quadrature in k.
double sech_tail_line(double N) {
  const auto integrand = [&](double k) {
    const double F = std::sqrt(2.0) * std::numbers::pi / std::cosh(0.5 * std::numbers::pi * k);
    const double w = high_pass_weight(k, N, CutoffShape::Smooth);
    return (1.0 + k * k) * w * w * F * F;
  };
  return std::sqrt(2.0 * oracle::simpson(integrand, 0.5 * N, 80.0, 200000) / (2.0 * std::numbers::pi));
}

}  // namespace

TEST_CASE("soliton frequency tail decays exponentially", "[projector]") {
  const SpectralGrid g(1, 1024, 40.0);
  const auto q = testing_support::sech_soliton(g);
  double prev_log = 0.0;
  double prev_slope = 0.0;
  for (double N : {2.0, 4.0, 8.0}) {
    const auto tail = apply_projector(g, q, {N, Band::High, CutoffShape::Smooth});
    const double measured = h1_norm(g, tail);
    CHECK_THAT(measured, WithinRel(sech_tail_oracle(N, 40.0), 1e-10));
    CHECK_THAT(measured, WithinRel(sech_tail_line(N), 1e-4));
    const double lg = std::log(measured);
    if (N > 2.0) {
      const double slope = (lg - prev_log) / (N / 2.0);  // per unit N over [N/2, N]
      CHECK(slope < -0.5);
      if (N > 4.0) CHECK(slope <= prev_slope + 1e-12);
      prev_slope = slope;
    }
    prev_log = lg;
  }
}

TEST_CASE("norms of reference states", "[norms]") {
  SECTION("zero state") {
    const auto s = FieldState::zero(SpectralGrid(2, 16, 1.0), 3.0, 0.1);
    const auto r = norms(s);
    CHECK(r.l2_u == 0.0);
    CHECK(r.h1_u == 0.0);
    CHECK(r.l2_ut == 0.0);
    CHECK(r.linf_u == 0.0);
    CHECK(r.h_norm == 0.0);
    CHECK(energy(s) == 0.0);
  }
  SECTION("constant field") {
    const SpectralGrid g(1, 64, 3.0);
    FieldState s(g, RealField(g.size(), -0.7), RealField(g.size(), 0.0), 3.0, 0.0);
    CHECK_THAT(norms(s).l2_u, WithinRel(0.7 * std::sqrt(6.0), 1e-14));
    CHECK_THAT(norms(s).h1_u, WithinRel(0.7 * std::sqrt(6.0), 1e-14));
  }
  SECTION("sech soliton matches closed-form integrals") {
    const SpectralGrid g(1, 1024, 40.0);
    FieldState s(g, testing_support::sech_soliton(g), RealField(g.size(), 0.0), 3.0, 0.0);
    const auto r = norms(s);
    CHECK_THAT(r.l2_u * r.l2_u, WithinAbs(4.0, 1e-8));
    CHECK_THAT(r.h1_u * r.h1_u - r.l2_u * r.l2_u, WithinAbs(4.0 / 3.0, 1e-8));
    CHECK_THAT(r.h1_u, WithinAbs(std::sqrt(16.0 / 3.0), 1e-8));
    CHECK(r.h_norm * r.h_norm == r.h1_u * r.h1_u + r.l2_ut * r.l2_ut);
  }
  SECTION("non-finite samples raise a blowup error") {
    const SpectralGrid g(1, 16, 1.0);
    FieldState s = FieldState::zero(g, 3.0, 0.0);
    s.u[3] = std::nan("");
    CHECK_THROWS_AS(norms(s), BlowupError);
    CHECK_THROWS_AS(energy(s), BlowupError);
    CHECK_THROWS_AS(local_energy_density(s), BlowupError);
  }
}

TEST_CASE("energy of reference states", "[energy]") {
  SECTION("constant field, no gradient") {
    const double L = 7.0;
    const SpectralGrid g(1, 32, L);
    FieldState s(g, RealField(g.size(), 1.0), RealField(g.size(), 0.0), 3.0, 0.0);
    CHECK_THAT(energy(s), WithinRel(L / 2.0, 1e-14));
  }
  SECTION("ground state energy is 4/3") {
    const SpectralGrid g(1, 1024, 40.0);
    FieldState s(g, testing_support::sech_soliton(g), RealField(g.size(), 0.0), 3.0, 0.0);
    CHECK_THAT(energy(s), WithinAbs(4.0 / 3.0, 1e-8));
  }
}

TEST_CASE("energy density integrates to the squared H-norm", "[energy]") {
  std::mt19937_64 rng(9);
  for (int d : {1, 2, 3}) {
    const SpectralGrid g(d, d == 3 ? 16 : 32, 2.0);
    FieldState s(g, testing_support::random_field(g, rng), testing_support::random_field(g, rng), 3.0, 0.1);
    const auto e = local_energy_density(s);
    for (double v : e) CHECK(v >= 0.0);
    const double h = norms(s).h_norm;
    CHECK_THAT(integrate(g, e), WithinRel(h * h, 1e-12));
  }
  SECTION("zero state has zero density") {
    const auto s = FieldState::zero(SpectralGrid(1, 16, 1.0), 3.0, 0.0);
    CHECK(sup_norm(local_energy_density(s)) == 0.0);
  }
  SECTION("soliton density peaks at the center") {
    const SpectralGrid g(1, 256, 20.0);
    FieldState s(g, testing_support::sech_soliton(g), RealField(g.size(), 0.0), 3.0, 0.0);
    const auto e = local_energy_density(s);
    const auto peak = std::max_element(e.begin(), e.end()) - e.begin();
    CHECK(g.coordinate(static_cast<int>(peak)) == 0.0);
  }
}

TEST_CASE("norms and energy are even in u", "[energy]") {
  std::mt19937_64 rng(21);
  const SpectralGrid g(2, 32, 3.0);
  FieldState s(g, testing_support::random_field(g, rng), testing_support::random_field(g, rng), 2.5, 0.0);
  FieldState m = s;
  for (auto& v : m.u) v = -v;
  for (auto& v : m.ut) v = -v;
  CHECK(energy(m) == energy(s));
  CHECK(norms(m).h_norm == norms(s).h_norm);
}

TEST_CASE("translation", "[translate]") {
  std::mt19937_64 rng(13);
  const SpectralGrid g(1, 128, 6.0);
  const auto f = testing_support::random_band_limited(g, rng, 40);
  SECTION("zero shift is the identity") { CHECK(max_abs_diff(translate(g, f, {0.0, 0.0, 0.0}), f) <= 1e-14); }
  SECTION("one grid spacing is an index roll") {
    const auto r = testing_support::random_field(g, rng);
    const auto shifted = translate(g, r, {g.spacing(), 0.0, 0.0});
    double err = 0.0;
    for (int i = 0; i < g.n(); ++i) err = std::max(err, std::abs(shifted[i] - r[(i + g.n() - 1) % g.n()]));
    CHECK(err <= 1e-12);
  }
  SECTION("L2 norm preserved for a fractional shift") {
    const auto t = translate(g, f, {3.7, 0.0, 0.0});
    CHECK_THAT(l2_norm(g, t), WithinRel(l2_norm(g, f), 1e-12));
  }
  SECTION("energy is translation invariant") {
    const SpectralGrid g2(2, 64, 5.0);
    FieldState s(g2, testing_support::random_band_limited(g2, rng, 15),
                 testing_support::random_band_limited(g2, rng, 15), 3.0, 0.1);
    const Point h{1.3, -2.9, 0.0};
    FieldState t(g2, translate(g2, s.u, h), translate(g2, s.ut, h), 3.0, 0.1);
    CHECK_THAT(energy(t), WithinRel(energy(s), 1e-12));
  }
  SECTION("translate then translate back") {
    const SpectralGrid g2(2, 32, 4.0);
    const auto h2 = testing_support::random_band_limited(g2, rng, 10);
    const auto there = translate(g2, h2, {0.37, 1.91, 0.0});
    const auto back = translate(g2, there, {-0.37, -1.91, 0.0});
    CHECK(max_abs_diff(back, h2) <= 1e-12);
  }
}

TEST_CASE("distance field", "[geometry]") {
  const SpectralGrid g(1, 64, 8.0);
  SECTION("single center at the origin") {
    const std::vector<Point> c{{0.0, 0.0, 0.0}};
    const auto d = distance_field(g, c);
    for (int i = 0; i < g.n(); ++i) CHECK_THAT(d[i], WithinAbs(std::abs(g.coordinate(i)), 1e-14));
  }
  SECTION("grid point on a center") {
    const std::vector<Point> c{{g.coordinate(10), 0.0, 0.0}};
    CHECK(distance_field(g, c)[10] == 0.0);
  }
  SECTION("symmetric pair") {
    const std::vector<Point> c{{-3.0, 0.0, 0.0}, {3.0, 0.0, 0.0}};
    CHECK_THAT(distance_field(g, c)[32], WithinAbs(3.0, 1e-14));
  }
  SECTION("periodic wrap") {
    const std::vector<Point> c{{7.5, 0.0, 0.0}};
    CHECK_THAT(distance_field(g, c)[0], WithinAbs(0.5, 1e-14));  // x = -8 is 0.5 from 7.5 across the boundary
  }
  SECTION("empty center set is rejected") { CHECK_THROWS_AS(distance_field(g, {}), UsageError); }
}
