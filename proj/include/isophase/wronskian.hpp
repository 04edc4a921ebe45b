// Overflow-safe Wronskians of exponential-sum basis functions.
//
// Two evaluation paths:
//  * DirectWronskian - the N x N determinant of derivatives, columns scaled
//    by the dominant exponential of each function before the LU pass.
//  * ReducedWronskian - for N = 2m functions arranged in pairs, the m x m
//    determinant of normalized two-function Wronskians times the product of
//    factorization-constant differences.  A same-energy pair replaces its
//    diagonal entry by W2(x) = c + integral of u^2, the only representation
//    that stays finite when two factorization constants coincide.
//
// Derivatives use the bumped-row determinants (direct path) or the Jacobi
// expansion with the rank-one structure dM_ij/dx = f_odd,i * f_even,j
// (reduced path), so no finite differencing enters the potential formula.
#pragma once

#include <complex>
#include <span>
#include <vector>

#include "isophase/constants.hpp"
#include "isophase/expsum.hpp"

namespace isophase {

struct WronskianValue {
  double log_magnitude = 0.0;    // log |W|
  int sign = 0;                  // +1, -1, or 0 for a numerical zero
  double w_prime_over_w = 0.0;   // W'/W
  double w_second_over_w = 0.0;  // W''/W
  bool valid = false;            // false iff sign == 0

  // (log W)'' = W''/W - (W'/W)^2, the quantity the potential formula needs.
  double log_deriv2() const { return w_second_over_w - w_prime_over_w * w_prime_over_w; }
};

// mantissa * exp(log_scale); keeps tiny and huge determinants representable.
template <typename T>
struct ScaledValue {
  T mantissa{};
  double log_scale = 0.0;
  T value() const { return mantissa * T(std::exp(log_scale)); }
};

// A solution of the zero reference potential supplied pointwise: all higher
// derivatives follow from psi'' = -E psi, so value, slope and energy suffice.
struct BorderColumn {
  std::complex<double> value;
  std::complex<double> deriv;
  double energy;  // E = k^2 [fm^-2]
};

class DirectWronskian {
 public:
  DirectWronskian(std::vector<ExpSum> funcs, NumericPolicy policy = {});

  std::size_t size() const { return funcs_.size(); }
  const std::vector<ExpSum>& functions() const { return funcs_; }

  // W, W'/W, W''/W at x > 0.  A relative-zero base determinant yields
  // sign = 0 / valid = false; it is the caller's call whether that is fatal.
  WronskianValue evaluate(double x) const;

  // W(f_1,...,f_N, psi) for an arbitrary solution column.
  ScaledValue<std::complex<double>> bordered(const BorderColumn& psi, double x) const;

 private:
  std::vector<ExpSum> funcs_;
  std::vector<std::vector<ExpSum>> derivs_;  // [function][order 0..N+1]
  std::vector<double> scale_rate_;
  NumericPolicy policy_;
};

// One row/column block of the reduced determinant.
struct PairBlock {
  ExpSum odd;     // occupies the row slot
  ExpSum even;    // occupies the column slot (same function for coincident pairs)
  double alpha_odd;
  double alpha_even;
  // pole magnitudes |m| with alpha = -m^2, when known; they let the
  // factorization-constant differences be formed as (m2-m1)(m2+m1), exact
  // even for nearly coincident constants, where the rounded alpha difference
  // would poison the rank-one derivative identity
  double mag_odd = -1.0;
  double mag_even = -1.0;
  bool coincident = false;
  ExpSum w2;      // c + integral of u^2, only read when coincident
};

// alpha_of(first) - alpha_of(second) through the factored form when the
// magnitudes are available.
double alpha_difference(double alpha_first, double mag_first, double alpha_second,
                        double mag_second);

class ReducedWronskian {
 public:
  ReducedWronskian(std::vector<PairBlock> pairs, NumericPolicy policy = {});

  std::size_t order() const { return 2 * pairs_.size(); }

  WronskianValue evaluate(double x) const;

  // W(f_1,...,f_2m, psi) via the psi-bordered reduced determinant; throws if
  // E coincides with a column factorization constant (use the dedicated
  // deleted-function formula for solutions at a chain energy).
  ScaledValue<std::complex<double>> bordered(const BorderColumn& psi, double x) const;

 private:
  std::vector<PairBlock> pairs_;
  std::vector<ExpSum> entry_;      // m*m base-entry exponential sums (row-major)
  std::vector<ExpSum> odd_der_, even_der_;
  std::vector<double> rho_odd_, rho_even_;
  double pref_log_ = 0.0;
  int pref_sign_ = 1;
  int orientation_ = 1;            // parity between interleaved and reduced order
  NumericPolicy policy_;
};

// W2(x) = c + integral from x0 of u^2, as an exponential sum (the constant
// included).  x0 is either the origin or +infinity; the sign condition on c
// that keeps the standalone two-step chain nodeless is enforced here.
ExpSum pair_w2_primitive(const ExpSum& u, double c, bool x0_at_infinity);

// Free-function forms of the three spec operations.
WronskianValue wronskian(std::span<const ExpSum> funcs, double x, const NumericPolicy& policy = {});
double pair_w2(const ExpSum& u, double c, bool x0_at_infinity, double x);
WronskianValue reduced_even(std::span<const PairBlock> pairs, double x, const NumericPolicy& policy = {});
// Odd order 2m+1: psi bordered over the paired block structure.
ScaledValue<std::complex<double>> reduced_odd(const ExpSum& psi, double energy,
                                              std::span<const PairBlock> pairs, double x,
                                              const NumericPolicy& policy = {});

}  // namespace isophase
