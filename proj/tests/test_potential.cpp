#include <doctest.h>

#include <cmath>
#include <complex>
#include <stdexcept>

#include "isophase/errors.hpp"
#include "isophase/potential.hpp"
#include "isophase/solver.hpp"
#include "support.hpp"

using namespace isophase;

namespace {

// least-squares slope of log|V| over [lo, hi]
double tail_rate(const PotentialTable& t, double lo, double hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < t.x.size(); ++i) {
    if (t.x[i] < lo || t.x[i] > hi) continue;
    const double y = std::log(std::abs(t.v[i]));
    sx += t.x[i];
    sy += y;
    sxx += t.x[i] * t.x[i];
    sxy += t.x[i] * y;
    ++n;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST_CASE("empty chain is the identity transformation") {
  const auto table = build_potential(ChainSpec{});
  REQUIRE(!table.x.empty());
  for (double v : table.v) CHECK(v == 0.0);
  CHECK(table.nu == 0);
}

TEST_CASE("short-range law of the shallow and deep potentials") {
  NumericPolicy policy;
  ChainPotential shallow(testsupport::np1s0_shallow(), policy);
  const double x = policy.grid_min;
  CHECK(x * x * shallow(x) == doctest::Approx(6.0).epsilon(0.01));

  ChainPotential deep(testsupport::np1s0_deep(0.0), policy);
  CHECK(std::abs(x * x * deep(x)) < 0.01);

  // below the grid the analytic law takes over
  CHECK(shallow(x / 4) == doctest::Approx(6.0 / (x / 4) / (x / 4)));
  CHECK(deep(x / 4) == 0.0);
  CHECK_THROWS_AS(shallow(-1.0), std::domain_error);
}

TEST_CASE("deep family: ratio shifts the well without changing its depth") {
  NumericPolicy policy;
  policy.grid_max = 8.0;
  const auto t0 = build_potential(testsupport::np1s0_deep(0.0), policy);
  const auto t6 = build_potential(testsupport::np1s0_deep(1e6), policy);
  const auto min0 = std::min_element(t0.v.begin(), t0.v.end());
  const auto min6 = std::min_element(t6.v.begin(), t6.v.end());
  CHECK(*min6 == doctest::Approx(*min0).epsilon(0.01));
  CHECK(t6.x[(std::size_t)(min6 - t6.v.begin())] > t0.x[(std::size_t)(min0 - t0.v.begin())]);
}

TEST_CASE("collapse limit: the well walks into the origin and a barrier rises") {
  NumericPolicy policy;
  policy.grid_max = 6.0;
  // max V outside the well: the wall a particle meets before reaching it
  auto profile = [&](double ratio) {
    const auto t = build_potential(testsupport::np1s0_deep(ratio), policy);
    const auto mn = std::min_element(t.v.begin(), t.v.end());
    const double argmin = t.x[(std::size_t)(mn - t.v.begin())];
    double barrier = -1e30;
    for (std::size_t i = (std::size_t)(mn - t.v.begin()); i < t.x.size(); ++i)
      barrier = std::max(barrier, t.v[i]);
    return std::tuple<double, double, double>{argmin, *mn, barrier};
  };
  const auto [x1, v1, b1] = profile(-0.5);
  const auto [x2, v2, b2] = profile(-0.8);
  const auto [x3, v3, b3] = profile(-0.95);
  const auto [x4, v4, b4] = profile(-0.99);
  // the well concentrates near the origin and deepens
  CHECK(x2 < x1);
  CHECK(x3 < x2);
  CHECK(x4 < x3);
  CHECK(v2 < v1);
  CHECK(v3 < v2);
  CHECK(v4 < v3);
  // close to the collapse a genuine repulsive wall appears and keeps growing
  CHECK(b3 > 0.0);
  CHECK(b3 > b1);
  CHECK(b3 > b2);
  CHECK(b4 > b3);
}

TEST_CASE("first-order step") {
  SUBCASE("pure exponential leaves the potential unchanged") {
    const auto t = first_order_step(nullptr, ExpSum::exponential(-0.9), -0.81);
    for (double v : t.v) CHECK(v == doctest::Approx(0.0).epsilon(1e-14));
  }
  SUBCASE("sinh gives the closed-form repulsive core") {
    const double b = 1.3;
    const auto t = first_order_step(nullptr, ExpSum::sinh_of(b), -b * b);
    for (std::size_t i = 0; i < t.x.size(); i += 50) {
      const double s = std::sinh(b * t.x[i]);
      CHECK(t.v[i] == doctest::Approx(2.0 * b * b / (s * s)).epsilon(1e-11));
    }
  }
}

TEST_CASE("one-shot determinant formula equals the composed first-order chain") {
  std::vector<double> xs;
  for (double x = 0.1; x <= 10.0; x += 0.05) xs.push_back(x);
  const auto composed = compose_first_order(testsupport::np1s0_shallow(), xs);
  ChainPotential pot(testsupport::np1s0_shallow());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double direct = pot(xs[i]);
    const double scale = std::max(std::abs(direct), 1e-3);
    CHECK(std::abs(composed[i] - direct) / scale < 1e-6);
  }
  CHECK_THROWS_AS(compose_first_order(testsupport::np1s0_v8(), xs), ValidationError);
}

TEST_CASE("transformed solutions") {
  SUBCASE("empty chain returns the free regular solution") {
    const auto v = eigenfunction(ChainSpec{}, {0.7, 0.0}, 1.9);
    CHECK(v.real() == doctest::Approx(std::sin(0.7 * 1.9)).epsilon(1e-14));
    CHECK(v.imag() == 0.0);
  }
  SUBCASE("single decaying function applies the first-order operator") {
    const double a = -0.62, k = 0.9;
    ChainSpec chain;
    chain.functions = {SingularDecaying{a}};
    for (double x : {0.5, 1.4, 3.3}) {
      const auto v = eigenfunction(chain, {k, 0.0}, x);
      CHECK(v.real() ==
            doctest::Approx(-k * std::cos(k * x) + a * std::sin(k * x)).epsilon(1e-12));
    }
  }
  SUBCASE("deep chain bound solution decays at the level rate") {
    const double a3 = 4.1650;
    ChainPotential pot(testsupport::np1s0_deep(0.0));
    const double l8 = std::log(std::abs(pot.solution({0.0, a3}, 8.0).real()));
    const double l12 = std::log(std::abs(pot.solution({0.0, a3}, 12.0).real()));
    CHECK((l12 - l8) / 4.0 == doctest::Approx(-a3).epsilon(0.02));
  }
  SUBCASE("paired chain bound solution decays at the pair rate") {
    const double kappa = 3.7944;
    ChainPotential pot(testsupport::np1s0_v8());
    const double l8 = std::log(std::abs(pot.solution({0.0, kappa}, 8.0).real()));
    const double l12 = std::log(std::abs(pot.solution({0.0, kappa}, 12.0).real()));
    CHECK((l12 - l8) / 4.0 == doctest::Approx(-kappa).epsilon(0.02));
  }
}

TEST_CASE("isospectral family: the level stays put while the ratio varies") {
  // oracle-extracted level energy across the family, all equal -a3^2
  const double expected = -4.1650 * 4.1650;
  for (double ratio : {0.1, 1.0, 10.0, 100.0}) {
    ChainPotential pot(testsupport::np1s0_deep(ratio));
    RadialSolver solver([&pot](double x) { return pot(x); },
                        SolverConfig::from_policy(pot.policy(), pot.nu()));
    const auto levels = solver.bound_states(-25.0, -10.0);
    REQUIRE(levels.size() == 1);
    CHECK(levels[0] == doctest::Approx(expected).epsilon(0.005));
  }
}

TEST_CASE("tail decay rate is stable under grid extension") {
  NumericPolicy policy;
  const auto t1 = build_potential(testsupport::np1s0_shallow(), policy);
  NumericPolicy wide = policy;
  wide.grid_max = 50.0;
  const auto t2 = build_potential(testsupport::np1s0_shallow(), wide);
  const double r1 = tail_rate(t1, 8.0, 14.0);
  const double r2 = tail_rate(t2, 14.0, 20.0);
  CHECK(r1 == doctest::Approx(r2).epsilon(0.02));
}

TEST_CASE("reference potentials") {
  CHECK(reference_reid68(1.0) ==
        doctest::Approx((-10.463 * std::exp(-0.7) - 1650.6 * std::exp(-2.8) +
                         6484.2 * std::exp(-4.9)) /
                        0.7)
            .epsilon(1e-14));
  CHECK(reference_kukulin(1.0) ==
        doctest::Approx(-1106.21 * std::exp(-1.6) -
                        10.464 * std::exp(-0.7) / 0.7 * (1.0 - std::exp(-3.0)))
            .epsilon(1e-14));
  CHECK(std::abs(reference_reid68(30.0)) < 1e-8);
  CHECK_THROWS_AS(reference_reid68(0.0), std::domain_error);
  CHECK_THROWS_AS(reference_kukulin(-2.0), std::domain_error);
}

TEST_CASE("a nodal wronskian aborts construction naming the offending radius") {
  // just past the collapse ratio the mixed function gains a node inside the
  // domain and the chain stops being admissible
  const auto chain = testsupport::np1s0_deep(-1.05);
  REQUIRE(validate(chain).ok);  // parameters alone cannot see the node
  NumericPolicy policy;
  policy.grid_max = 5.0;
  try {
    build_potential(chain, policy);
    FAIL("expected NodalWronskianError");
  } catch (const NodalWronskianError& e) {
    CHECK(e.x > 0.0);
    CHECK(e.x < 5.0);
    CHECK(std::string(e.what()).find("fm") != std::string::npos);
  }
}

TEST_CASE("potential table metadata") {
  const auto table = build_potential(testsupport::np1s0_v8());
  CHECK(table.nu == 0);
  REQUIRE(table.bound_states.size() == 1);
  CHECK(table.provenance == canonicalized(testsupport::np1s0_v8()).digest());
  for (std::size_t i = 1; i < table.x.size(); ++i) CHECK(table.x[i] > table.x[i - 1]);
}
