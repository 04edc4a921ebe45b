#include <doctest.h>

#include <cmath>

#include "isophase/constants.hpp"

using namespace isophase;

TEST_CASE("lab energy to momentum") {
  CHECK(k_from_elab(0.0).k == 0.0);

  // recompute the caption formula independently at two tabulated energies
  const double hc2 = 197.33 * 197.33;
  CHECK(k_from_elab(0.1).k == doctest::Approx(std::sqrt(940.0 * 0.1 / (2.0 * hc2))).epsilon(1e-14));
  CHECK(k_from_elab(0.1).k == doctest::Approx(0.034742).epsilon(2e-5));
  CHECK(k_from_elab(350.0).k == doctest::Approx(2.05540).epsilon(2e-5));

  CHECK_THROWS_AS(k_from_elab(-1.0), std::domain_error);
  CHECK_THROWS_AS(k_from_elab(1.0, Constants{-1.0, 197.33}), std::invalid_argument);
}

TEST_CASE("wavenumber-unit potential to MeV") {
  CHECK(potential_mev_from_wavenumber_units(0.0) == 0.0);
  CHECK(potential_mev_from_wavenumber_units(1.0) ==
        doctest::Approx(197.33 * 197.33 / 940.0).epsilon(1e-14));
  CHECK(potential_mev_from_wavenumber_units(1.0) == doctest::Approx(41.425).epsilon(1e-4));
  // the published deep-level energy, quoted to 0.1 MeV
  CHECK(potential_mev_from_wavenumber_units(14.397) == doctest::Approx(596.4).epsilon(1e-4));
  CHECK(potential_mev_from_wavenumber_units(3.7944 * 3.7944) ==
        doctest::Approx(596.42).epsilon(1e-4));
}

TEST_CASE("round trip and monotonicity") {
  double prev = -1.0;
  for (double e = 0.0; e <= 350.0; e += 3.5) {
    const Momentum k = k_from_elab(e);
    CHECK(elab_from_k(k) == doctest::Approx(e).epsilon(1e-12));
    CHECK(k.k > prev);
    prev = k.k;
  }
  // MeV conversion inverts as well
  for (double v : {-80.0, -1.3, 0.7, 596.42})
    CHECK(potential_wavenumber_units_from_mev(potential_mev_from_wavenumber_units(v)) ==
          doctest::Approx(v).epsilon(1e-14));
}
