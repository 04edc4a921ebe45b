#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <stdexcept>
#include <tuple>

#include "isophase/errors.hpp"
#include "isophase/scattering.hpp"
#include "support.hpp"

using namespace isophase;
using cd = std::complex<double>;

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kDeg = 180.0 / kPi;
}  // namespace

TEST_CASE("jost function structure") {
  SUBCASE("empty chain is unity") {
    CHECK(jost(ChainSpec{}, {0.7, 0.2}) == cd(1.0, 0.0));
  }
  SUBCASE("shallow chain matches the explicit rational form") {
    const auto ps = testsupport::np1s0_poles();
    std::mt19937 rng(2);
    std::uniform_real_distribution<double> re(-2.0, 2.0), im(0.0, 1.5);
    for (int trial = 0; trial < 25; ++trial) {
      const cd k(re(rng), im(rng));
      const cd direct = k * k * (k - cd(0, ps.a[0])) * (k - cd(0, ps.a[1])) /
                        ((k + cd(0, ps.b[0])) * (k + cd(0, ps.b[1])) * (k + cd(0, ps.b[2])) *
                         (k + cd(0, ps.a[2])));
      const cd got = jost(testsupport::np1s0_shallow(), k);
      CHECK(std::abs(got - direct) <= 1e-12 * std::abs(direct));
    }
  }
  SUBCASE("pole evaluation is rejected") {
    CHECK_THROWS_AS(jost(testsupport::np1s0_shallow(), cd(0.0, -0.6152)), NumericalError);
  }
  SUBCASE("factor bookkeeping") {
    const auto f6 = jost_factor(testsupport::np1s0_shallow());
    CHECK(f6.nu_power == 2);
    CHECK(f6.poles.size() == 4);
    CHECK(f6.zeros.size() == 2);
    const auto f8 = jost_factor(testsupport::np1s0_v8());
    CHECK(f8.nu_power == 0);
    CHECK(f8.poles.size() == 4);
    CHECK(f8.zeros.size() == 4);
    CHECK((int)f6.poles.size() == (int)f6.zeros.size() + f6.nu_power);
    CHECK((int)f8.poles.size() == (int)f8.zeros.size() + f8.nu_power);
  }
}

TEST_CASE("family members differ by real rational factors on the real axis") {
  const double a3 = 4.1650, kappa = 3.7944;
  for (double k = 0.05; k < 2.6; k += 0.11) {
    const cd ratio_deep =
        jost(testsupport::np1s0_deep(0.0), {k, 0.0}) / jost(testsupport::np1s0_shallow(), {k, 0.0});
    CHECK(std::abs(ratio_deep.imag()) < 1e-12 * std::abs(ratio_deep));
    CHECK(ratio_deep.real() == doctest::Approx((k * k + a3 * a3) / (k * k)).epsilon(1e-12));

    const cd ratio_v8 =
        jost(testsupport::np1s0_v8(), {k, 0.0}) / jost(testsupport::np1s0_shallow(), {k, 0.0});
    CHECK(std::abs(ratio_v8.imag()) < 1e-12 * std::abs(ratio_v8));
    CHECK(ratio_v8.real() == doctest::Approx((k * k + kappa * kappa) / (k * k)).epsilon(1e-12));
  }
}

TEST_CASE("phase shift against the published table edges") {
  const auto ps = testsupport::np1s0_poles();
  CHECK(phase_shift(ps, 0.0) == 0.0);
  CHECK(phase_shift(ps, k_from_elab(0.1).k) * kDeg == doctest::Approx(38.422).epsilon(1.5e-3));
  CHECK(phase_shift(ps, k_from_elab(350.0).k) * kDeg == doctest::Approx(-10.074).epsilon(5e-3));
  CHECK(phase_shift(ps, 1e9) == doctest::Approx(-kPi).epsilon(1e-8));
  CHECK(phase_shift_at_infinity(ps) == doctest::Approx(-kPi));
  CHECK_THROWS_AS(phase_shift(ps, -0.1), std::domain_error);
}

TEST_CASE("phase shift ignores the family assignment entirely") {
  const auto shallow_ps = testsupport::np1s0_shallow().pole_set();
  const auto deep_ps = testsupport::np1s0_deep(1e6).pole_set();
  const auto v8_ps = testsupport::np1s0_v8().pole_set();
  REQUIRE(shallow_ps.a == deep_ps.a);
  REQUIRE(shallow_ps.b == deep_ps.b);
  REQUIRE(shallow_ps.a == v8_ps.a);
  REQUIRE(shallow_ps.b == v8_ps.b);
  for (double k = 0.02; k < 2.2; k += 0.13) {
    const double d = phase_shift(shallow_ps, k);
    CHECK(phase_shift(deep_ps, k) == d);  // bit identical, same formula, same poles
    CHECK(phase_shift(v8_ps, k) == d);
  }
}

TEST_CASE("s-matrix unitarity and route agreement") {
  const auto ps = testsupport::np1s0_poles();
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> kat(1e-3, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double k = kat(rng);
    const cd s = s_matrix(ps, k);
    CHECK(std::abs(std::abs(s) - 1.0) < 1e-12);
    for (const auto& chain :
         {testsupport::np1s0_shallow(), testsupport::np1s0_deep(0.5), testsupport::np1s0_v8()}) {
      const cd via_jost = s_matrix_from_jost(chain, k);
      CHECK(std::abs(s - via_jost) < 1e-10);
    }
  }
  CHECK(s_matrix(ps, 0.0) == cd(1.0, 0.0));
  CHECK(std::abs(s_matrix(PoleSet{}, 1.0) - cd(1.0, 0.0)) < 1e-15);
}

TEST_CASE("observables from the pole expansion") {
  SUBCASE("np 1S0 values") {
    const auto obs = observables(testsupport::np1s0_poles());
    REQUIRE(obs.finite);
    // published: a = -23.7032 fm, r = 2.6235 fm; the four-digit poles land
    // a little off, inside the documented windows
    CHECK(obs.scattering_length == doctest::Approx(-23.7032).epsilon(2.2e-3));
    CHECK(obs.scattering_length == doctest::Approx(-23.69132076).epsilon(1e-9));
    CHECK(obs.effective_range == doctest::Approx(2.6235).epsilon(8e-3));
    CHECK(obs.effective_range == doctest::Approx(2.62360372).epsilon(1e-8));
    CHECK(obs.scattering_length > -23.75);
    CHECK(obs.scattering_length < -23.65);
    CHECK(obs.effective_range > 2.60);
    CHECK(obs.effective_range < 2.64);
  }
  SUBCASE("single pole") {
    PoleSet ps;
    ps.b = {1.0};
    const auto obs = observables(ps);
    CHECK(obs.scattering_length == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(obs.effective_range == doctest::Approx(0.0));
  }
  SUBCASE("degenerate inverse-pole sum flags infinity") {
    PoleSet ps;
    ps.a = {-1.0};
    ps.b = {1.0};
    const auto obs = observables(ps);
    CHECK(!obs.finite);
  }
}

TEST_CASE("effective range expansion cross-check against k cot delta") {
  // independent route: straight-line fit of k cot(delta) against k^2
  const auto ps = testsupport::np1s0_poles();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (double k = 1e-3; k <= 0.1; k += 0.0033) {
    const double y = k / std::tan(phase_shift(ps, k));
    const double x = k * k;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double intercept = (sy - slope * sx) / n;
  const auto obs = observables(ps);
  CHECK(-1.0 / intercept == doctest::Approx(obs.scattering_length).epsilon(1e-3));
  CHECK(2.0 * slope == doctest::Approx(obs.effective_range).epsilon(1e-3));
}

TEST_CASE("levinson accounting") {
  for (const auto& [chain, nu, levels] :
       {std::tuple{testsupport::np1s0_shallow(), 2, 0},
        std::tuple{testsupport::np1s0_deep(0.0), 0, 1},
        std::tuple{testsupport::np1s0_v8(), 0, 1}}) {
    const auto rep = levinson_check(chain);
    CHECK(rep.pass);
    CHECK(rep.nu == nu);
    CHECK(rep.n_bound == levels);
    CHECK(rep.delta_drop == doctest::Approx(kPi));
  }
  const auto empty = levinson_check(ChainSpec{});
  CHECK(empty.pass);
  CHECK(empty.delta_drop == 0.0);
}

TEST_CASE("levinson holds across random admissible pole sets") {
  std::mt19937 rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    const auto ps = testsupport::random_pole_set(rng, 1 + (int)(rng() % 3));
    for (const auto& cfg : enumerate_configurations(ps)) CHECK(levinson_check(cfg.chain).pass);
  }
}

TEST_CASE("jost function from the transformed solution") {
  SUBCASE("empty chain") {
    CHECK(std::abs(jost_from_solution(ChainSpec{}, 1.0) - cd(1.0, 0.0)) < 1e-12);
  }
  SUBCASE("single regular function") {
    const double b = 0.8;
    ChainSpec chain;
    chain.functions = {RegularB{b}};
    for (double k : {0.3, 1.0, 2.2}) {
      const cd expect = cd(k, 0.0) / cd(k, b);
      const cd got = jost_from_solution(chain, k);
      CHECK(std::abs(got - expect) <= 1e-4 * std::abs(expect));
    }
  }
  SUBCASE("shallow chain against the closed form") {
    const auto chain = testsupport::np1s0_shallow();
    for (double k = 0.15; k <= 2.1; k += 0.4) {
      const cd expect = jost(chain, {k, 0.0});
      const cd got = jost_from_solution(chain, k);
      CHECK(std::abs(got - expect) <= 1e-3 * std::abs(expect));
    }
  }
  SUBCASE("paired chain carries the conjugate-zero factor") {
    const auto chain = testsupport::np1s0_v8();
    for (double k : {0.3, 0.9, 1.7}) {
      const cd expect = jost(chain, {k, 0.0});
      const cd got = jost_from_solution(chain, k);
      CHECK(std::abs(got - expect) <= 1e-3 * std::abs(expect));
    }
  }
}
