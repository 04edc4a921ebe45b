// Analytic Jost functions, S-matrix, phase shifts, effective-range
// observables and Levinson accounting for a chain.
#pragma once

#include <complex>
#include <vector>

#include "isophase/chain.hpp"
#include "isophase/constants.hpp"

namespace isophase {

// Rational structure of the Jost function: F(k) = k^nu_power *
// prod (k - i zeros_j) / prod (k + i poles_j).
struct JostFactor {
  std::vector<double> zeros;  // signed; positive entries host bound states
  std::vector<double> poles;  // all positive
  int nu_power = 0;
};

JostFactor jost_factor(const ChainSpec& chain);

// F_N(k); throws at the poles k = -i poles_j.
std::complex<double> jost(const ChainSpec& chain, std::complex<double> k);

// delta(k) = -sum arctan(k/a_j) - sum arctan(k/b_j), radians, principal
// branch; family assignment drops out so a pole set suffices.
double phase_shift(const PoleSet& poles, double k);

// delta(infinity), from the arctan limits.
double phase_shift_at_infinity(const PoleSet& poles);

// S(k) = exp(2 i delta(k)); S(0) = 1.
std::complex<double> s_matrix(const PoleSet& poles, double k);

// The same through the Jost route (-1)^nu F(-k)/F(k); the sign factor is the
// k^nu contribution, absorbed in the sin(kx - nu pi/2 + delta) asymptote.
std::complex<double> s_matrix_from_jost(const ChainSpec& chain, double k);

struct Observables {
  double scattering_length = 0.0;  // fm
  double effective_range = 0.0;    // fm
  bool finite = true;
};

// Scattering length and effective range of the pole expansion.  A vanishing
// inverse-pole sum is reported through finite = false, not an exception.
Observables observables(const PoleSet& poles);

struct LevinsonReport {
  double delta_drop = 0.0;  // delta(0) - delta(infinity), radians
  double ledger = 0.0;      // (n_bound + nu/2) pi from the chain bookkeeping
  int n_bound = 0;
  int nu = 0;
  bool pass = false;
};

LevinsonReport levinson_check(const ChainSpec& chain);

// Verification route: the transformed Jost solution evaluated near the
// origin (weighted by (kx)^nu / (i^nu (2nu-1)!!)) over its plane-wave
// normalization at the far end of the grid.  Must reproduce jost().
std::complex<double> jost_from_solution(const ChainSpec& chain, double k,
                                        const NumericPolicy& policy = {});

}  // namespace isophase
