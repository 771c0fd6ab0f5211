#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "dkg/profile_io.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace dkg;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using testing_support::max_abs_diff;

namespace {

// Hand-derived Q'' for Q = A sech^b(c x), b c = 1, c = (p-1)/2:
// Q'' = A (sech^b - (1 + c) sech^(b+2)).
double closed_form_q2(double p, double x) {
  const double A = std::pow((p + 1.0) / 2.0, 1.0 / (p - 1.0));
  const double c = 0.5 * (p - 1.0), b = 1.0 / c;
  const double s = 1.0 / std::cosh(c * x);
  return A * (std::pow(s, b) - (1.0 + c) * std::pow(s, b + 2.0));
}

// Central values frozen from an independent midpoint-rule shooting run with
// Richardson extrapolation (see oracle::richardson_central_value).
constexpr double kCentral3d = 4.337387679977015;
constexpr double kCentral2d = 2.2062008646507154;

}  // namespace

TEST_CASE("closed-form ground state", "[closed-form]") {
  SECTION("cubic") {
    const auto q = closed_form_ground_state_1d(3.0);
    CHECK_THAT(q.central_value(), WithinAbs(1.41421356237309505, 1e-15));
    CHECK(q.residual <= 1e-10);
    double worst = 0.0;
    for (double x = -12.0; x <= 12.0; x += 0.05) {
      const double Q = q.value_at(x);
      worst = std::max(worst, std::abs(-closed_form_q2(3.0, x) + Q - Q * Q * Q));
    }
    CHECK(worst <= 1e-10);
  }
  SECTION("quadratic") {
    const auto q = closed_form_ground_state_1d(2.0);
    CHECK_THAT(q.central_value(), WithinAbs(1.5, 1e-15));
    for (double x : {0.3, 1.0, 4.0, -7.5}) CHECK_THAT(q.value_at(x), WithinRel(1.5 / std::pow(std::cosh(x / 2), 2), 1e-14));
    double worst = 0.0;
    for (double x = -12.0; x <= 12.0; x += 0.05) {
      const double Q = q.value_at(x);
      worst = std::max(worst, std::abs(-closed_form_q2(2.0, x) + Q - std::abs(Q) * Q));
    }
    CHECK(worst <= 1e-10);
  }
  SECTION("decays monotonically in |x|") {
    const auto q = closed_form_ground_state_1d(3.0);
    double prev = q.value_at(0.0);
    for (double x = 0.1; x < 40.0; x += 0.1) {
      const double v = q.value_at(x);
      CHECK(v < prev);
      CHECK(v > 0.0);
      CHECK(q.value_at(-x) == v);
      prev = v;
    }
  }
  SECTION("p <= 1 is rejected") {
    CHECK_THROWS_AS(closed_form_ground_state_1d(1.0), UsageError);
    CHECK_THROWS_AS(closed_form_ground_state_1d(0.5), UsageError);
  }
}

TEST_CASE("oracle reproduces the frozen central values", "[oracle]") {
  CHECK_THAT(oracle::richardson_central_value(1, 3.0, 2e-3), WithinAbs(std::sqrt(2.0), 1e-7));
  CHECK_THAT(oracle::richardson_central_value(3, 3.0, 2e-3), WithinAbs(kCentral3d, 1e-7));
  CHECK_THAT(oracle::richardson_central_value(2, 3.0, 2e-3), WithinAbs(kCentral2d, 1e-7));
}

TEST_CASE("radial shooting", "[shooting]") {
  SECTION("d = 1 agrees with the closed form") {
    const auto q = radial_shoot(1, 3.0, 0);
    CHECK_THAT(q.central_value(), WithinAbs(std::sqrt(2.0), 1e-8));
    const auto c = closed_form_ground_state_1d(3.0);
    for (double r : {0.5, 2.0, 7.0, 15.0}) CHECK_THAT(q.value_at(r), WithinAbs(c.value_at(r), 1e-8));
  }
  SECTION("d = 3 cubic central value") {
    const auto q = radial_shoot(3, 3.0, 0);
    CHECK_THAT(q.central_value(), WithinAbs(kCentral3d, 1e-7));
    CHECK(q.residual <= 1e-6);
  }
  SECTION("d = 2 cubic central value") {
    const auto q = radial_shoot(2, 3.0, 0);
    CHECK_THAT(q.central_value(), WithinAbs(kCentral2d, 1e-7));
  }
  SECTION("ground states are positive and radially decreasing") {
    for (int d : {1, 2, 3}) {
      const auto q = radial_shoot(d, 3.0, 0);
      for (std::size_t i = 1; i < q.values.size(); ++i) {
        CHECK(q.values[i] > 0.0);
        CHECK(q.values[i] < q.values[i - 1]);
      }
      CHECK(std::abs(q.values.back()) <= 1e-8);
    }
  }
  SECTION("nodal states in d = 2 have the requested sign changes") {
    for (int k : {1, 2}) {
      const auto q = radial_shoot(2, 3.0, k);
      CHECK(detail::sign_changes(q.values) == k);
      CHECK(q.nodes == k);
      CHECK(q.residual <= 1e-6);
      CHECK(std::abs(q.values.back()) <= 1e-8);
      CHECK(std::abs(q.central_value()) > kCentral2d);
    }
  }
  SECTION("one-dimensional nodal states do not exist") {
    CHECK_THROWS_AS(radial_shoot(1, 3.0, 1), NoConvergenceError);
    CHECK_THROWS_AS(radial_shoot(1, 3.0, 2), NoConvergenceError);
  }
  SECTION("inadmissible input") {
    CHECK_THROWS_AS(radial_shoot(3, 5.0, 0), UsageError);
    CHECK_THROWS_AS(radial_shoot(3, 1.0, 0), UsageError);
    CHECK_THROWS_AS(radial_shoot(2, 3.0, -1), UsageError);
  }
  SECTION("an unreachable bracket is a convergence failure") {
    ShootingConfig cfg;
    cfg.bracket_lo = 1e-300;
    cfg.bracket_hi = 1e-300;
    CHECK_THROWS_AS(radial_shoot(2, 3.0, 0, cfg), NoConvergenceError);
  }
}

TEST_CASE("embedding on a grid", "[embed]") {
  const SpectralGrid g(1, 512, 30.0);
  const auto q = closed_form_ground_state_1d(3.0);
  SECTION("centered embedding is even with its peak at the center cell") {
    const auto e = embed_on_grid(q, g, {0.0, 0.0, 0.0});
    const int mid = g.n() / 2;
    CHECK(g.coordinate(mid) == 0.0);
    for (int i = 1; i < mid; ++i) CHECK(e.field[mid + i] == e.field[mid - i]);
    CHECK(std::max_element(e.field.begin(), e.field.end()) - e.field.begin() == mid);
    CHECK(e.residual <= 1e-6);
  }
  SECTION("embedding commutes with translation") {
    const Point a{1.3, 0.0, 0.0};
    const auto shifted = embed_on_grid(q, g, a).field;
    const auto moved = translate(g, embed_on_grid(q, g, {0.0, 0.0, 0.0}).field, a);
    CHECK(max_abs_diff(shifted, moved) <= 1e-8);
  }
  SECTION("sign symmetry") {
    const auto plus = embed_on_grid(q, g, {2.0, 0.0, 0.0});
    const auto minus = embed_on_grid(q.negated(), g, {2.0, 0.0, 0.0});
    CHECK(minus.residual == plus.residual);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(minus.field[i] == -plus.field[i]);
  }
  SECTION("box too small") {
    const SpectralGrid small(1, 128, 10.0);
    try {
      embed_on_grid(q, small, {0.0, 0.0, 0.0});
      FAIL("expected a usage error");
    } catch (const UsageError& e) {
      CHECK(std::string(e.what()).find("|Q(L)|") != std::string::npos);
    }
  }
  SECTION("under-resolved grids fail the stationarity check") {
    const SpectralGrid coarse(1, 32, 30.0);
    CHECK_THROWS_AS(embed_stationary(q, coarse, {0.0, 0.0, 0.0}), NoConvergenceError);
  }
  SECTION("dimension mismatch") {
    CHECK_THROWS_AS(embed_on_grid(q, SpectralGrid(2, 64, 30.0), {0.0, 0.0, 0.0}), UsageError);
  }
  SECTION("radial ground state in 2D passes the residual check") {
    const auto q2 = radial_shoot(2, 3.0, 0);
    const SpectralGrid g2(2, 512, 26.0);
    const auto e = embed_stationary(q2, g2, {0.0, 0.0, 0.0});
    CHECK(e.residual <= 1e-6);
    CHECK(embed_stationary(q2.negated(), g2, {0.0, 0.0, 0.0}).residual == e.residual);
  }
}

TEST_CASE("Petviashvili iteration", "[petviashvili]") {
  SECTION("1D cubic from a gaussian seed") {
    const SpectralGrid g(1, 512, 30.0);
    RealField seed(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) seed[i] = std::exp(-std::pow(g.coordinate(static_cast<int>(i)), 2));
    const auto q = petviashvili(g, 3.0, seed);
    CHECK(max_abs_diff(q.samples, testing_support::sech_soliton(g)) <= 1e-8);
    CHECK(q.residual <= 1e-6);
  }
  SECTION("1D quadratic matches its closed form") {
    const SpectralGrid g(1, 512, 40.0);
    RealField seed(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) seed[i] = std::exp(-std::pow(g.coordinate(static_cast<int>(i)), 2));
    const auto q = petviashvili(g, 2.0, seed);
    const auto ref = embed_on_grid(closed_form_ground_state_1d(2.0), g, {0.0, 0.0, 0.0});
    CHECK(max_abs_diff(q.samples, ref.field) <= 1e-8);
  }
  SECTION("the exact ground state is a fixed point") {
    const SpectralGrid g(1, 512, 30.0);
    const auto Q = testing_support::sech_soliton(g);
    CHECK(max_abs_diff(petviashvili_step(g, 3.0, Q), Q) <= 1e-10);
  }
  SECTION("the step is invariant under rescaling the input") {
    const SpectralGrid g(1, 256, 20.0);
    RealField seed(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) seed[i] = std::exp(-std::pow(g.coordinate(static_cast<int>(i)), 2));
    RealField big = seed;
    for (auto& v : big) v *= 7.0;
    CHECK(max_abs_diff(petviashvili_step(g, 3.0, seed), petviashvili_step(g, 3.0, big)) <= 1e-12);
  }
  SECTION("2D cubic agrees with shooting") {
    const SpectralGrid g(2, 512, 26.0);
    RealField seed(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto x = g.point(i);
      seed[i] = 2.0 * std::exp(-(x[0] * x[0] + x[1] * x[1]) / 2.0);
    }
    const auto q = petviashvili(g, 3.0, seed);
    CHECK(q.residual <= 1e-6);
    const auto shot = embed_on_grid(radial_shoot(2, 3.0, 0), g, {0.0, 0.0, 0.0});
    CHECK(max_abs_diff(q.samples, shot.field) <= 1e-5);
    CHECK_THAT(q.central_value(), WithinAbs(kCentral2d, 1e-5));
  }
  SECTION("bad seeds") {
    const SpectralGrid g(1, 64, 10.0);
    CHECK_THROWS_AS(petviashvili(g, 3.0, RealField(g.size(), 0.0)), UsageError);
    RealField neg(g.size(), -1.0);
    CHECK_THROWS_AS(petviashvili(g, 3.0, neg), UsageError);
    CHECK_THROWS_AS(petviashvili(g, 3.0, RealField(10, 1.0)), UsageError);
  }
  SECTION("iteration budget exhausted") {
    const SpectralGrid g(1, 256, 20.0);
    RealField seed(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) seed[i] = std::exp(-std::pow(g.coordinate(static_cast<int>(i)), 2));
    CHECK_THROWS_AS(petviashvili(g, 3.0, seed, {1e-12, 2}), NoConvergenceError);
  }
}

TEST_CASE("grid-sampled profiles embed by translation", "[embed]") {
  const SpectralGrid g(1, 512, 30.0);
  EquilibriumProfile q;
  q.kind = EquilibriumProfile::Kind::Grid;
  q.dim = 1;
  q.p = 3.0;
  q.grid = g;
  q.samples = testing_support::sech_soliton(g);
  const auto e = embed_on_grid(q.negated(), g, {-4.25, 0.0, 0.0});
  CHECK(max_abs_diff(e.field, testing_support::sech_soliton(g, -4.25, -1.0)) <= 1e-10);
  CHECK_THROWS_AS(embed_on_grid(q, SpectralGrid(1, 256, 30.0), {0.0, 0.0, 0.0}), UsageError);
  CHECK_THROWS_AS(q.value_at(1.0), UsageError);
}

TEST_CASE("default library", "[library]") {
  const auto one = default_library(1, 3.0);
  REQUIRE(one.size() == 2);
  CHECK(one[0].label() == "ground+");
  CHECK(one[1].label() == "ground-");
  CHECK(one[1].central_value() == -one[0].central_value());

  const auto two = default_library(2, 3.0);
  REQUIRE(two.size() == 6);
  CHECK(two[2].label() == "nodal1+");
  CHECK(two[5].label() == "nodal2-");
}

TEST_CASE("profile files", "[io]") {
  SECTION("radial profile round trip is bit-exact") {
    const auto q = radial_shoot(2, 3.0, 1).negated();
    std::stringstream buf;
    write_profile(buf, q);
    const auto back = read_profile(buf);
    CHECK(back.dim == 2);
    CHECK(back.p == 3.0);
    CHECK(back.nodes == 1);
    CHECK(back.sign == -1);
    CHECK(back.radius == q.radius);
    CHECK(back.values == q.values);
    CHECK(back.value_at(1.234) == q.value_at(1.234));
  }
  SECTION("closed form is tabulated") {
    const auto q = closed_form_ground_state_1d(3.0);
    std::stringstream buf;
    write_profile(buf, q);
    const auto back = read_profile(buf);
    CHECK_THAT(back.value_at(0.7777), WithinAbs(q.value_at(0.7777), 1e-12));
  }
  SECTION("header layout") {
    std::stringstream buf;
    write_profile(buf, radial_shoot(3, 3.0, 0));
    const std::string s = buf.str();
    CHECK(s.substr(0, 4) == "DKGQ");
    CHECK(static_cast<unsigned char>(s[4]) == 1);
    CHECK(static_cast<unsigned char>(s[8]) == 3);
  }
  SECTION("corrupt input") {
    std::stringstream bad("XXXX1234");
    CHECK_THROWS_AS(read_profile(bad), IoError);
    std::stringstream buf;
    write_profile(buf, closed_form_ground_state_1d(3.0));
    std::stringstream cut(buf.str().substr(0, 100));
    CHECK_THROWS_AS(read_profile(cut), IoError);
    CHECK_THROWS_AS(read_profile(std::filesystem::path("/nonexistent/profile.dkgq")), IoError);
  }
}
