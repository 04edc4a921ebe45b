// Physical constants, unit conversions and shared numeric policy.
//
// Internally everything runs in the E = k^2 convention: energies in fm^-2,
// lengths in fm, momenta in fm^-1.  MeV appears only at the I/O boundary,
// converted through the nucleon mass and hbar*c configured here.
#pragma once

#include <stdexcept>

namespace isophase {

struct Constants {
  double m_n = 940.0;      // nucleon mass [MeV]
  double hbar_c = 197.33;  // [MeV fm]

  void check() const {
    if (m_n <= 0.0 || hbar_c <= 0.0)
      throw std::invalid_argument("Constants: m_n and hbar_c must be positive");
  }
};

// On-shell momentum for the np system (reduced mass m_n/2), fm^-1.
struct Momentum {
  double k = 0.0;
};

struct NumericPolicy {
  double grid_min = 1e-3;      // fm
  double grid_max = 25.0;      // fm
  double grid_step = 5e-3;     // fm
  double det_rel_tol = 1e-10;  // numerical-zero threshold for determinants
  double ode_tol = 1e-9;       // relative tolerance of eigenvalue bisecting

  void check() const {
    if (!(grid_min > 0.0 && grid_min < grid_max))
      throw std::invalid_argument("NumericPolicy: need 0 < grid_min < grid_max");
    if (grid_step <= 0.0)
      throw std::invalid_argument("NumericPolicy: grid_step must be positive");
    if (!(det_rel_tol > 0.0 && det_rel_tol < 1.0) || !(ode_tol > 0.0 && ode_tol < 1.0))
      throw std::invalid_argument("NumericPolicy: tolerances must lie in (0,1)");
  }
};

// k = sqrt(m_n E_lab / (2 (hbar c)^2)).  Throws on negative energy.
Momentum k_from_elab(double e_lab_mev, const Constants& c = {});

// Inverse of k_from_elab.
double elab_from_k(const Momentum& k, const Constants& c = {});

// Converts a potential value from the k^2 convention (fm^-2) to MeV:
// multiplies by (hbar c)^2 / m_n, the hbar^2/(2 mu) factor with mu = m_n/2.
double potential_mev_from_wavenumber_units(double v_fm2, const Constants& c = {});

// MeV -> fm^-2, inverse of the above.
double potential_wavenumber_units_from_mev(double v_mev, const Constants& c = {});

}  // namespace isophase
