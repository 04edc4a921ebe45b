#include "isophase/constants.hpp"

#include <cmath>

namespace isophase {

Momentum k_from_elab(double e_lab_mev, const Constants& c) {
  c.check();
  if (e_lab_mev < 0.0)
    throw std::domain_error("k_from_elab: negative laboratory energy");
  return Momentum{std::sqrt(c.m_n * e_lab_mev / (2.0 * c.hbar_c * c.hbar_c))};
}

double elab_from_k(const Momentum& k, const Constants& c) {
  c.check();
  return 2.0 * c.hbar_c * c.hbar_c * k.k * k.k / c.m_n;
}

double potential_mev_from_wavenumber_units(double v_fm2, const Constants& c) {
  c.check();
  return v_fm2 * c.hbar_c * c.hbar_c / c.m_n;
}

double potential_wavenumber_units_from_mev(double v_mev, const Constants& c) {
  c.check();
  return v_mev * c.m_n / (c.hbar_c * c.hbar_c);
}

}  // namespace isophase
