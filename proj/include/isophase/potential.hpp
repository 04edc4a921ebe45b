// Builds V_N and its eigensolutions from a chain, plus the closed-form
// reference potentials used for comparison plots.
#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "isophase/chain.hpp"
#include "isophase/constants.hpp"
#include "isophase/wronskian.hpp"

namespace isophase {

struct PotentialTable {
  std::vector<double> x;             // fm, strictly increasing
  std::vector<double> v;             // fm^-2
  int nu = 0;                        // origin singularity strength
  std::vector<double> bound_states;  // fm^-2, ascending
  std::string provenance;            // chain digest
};

// The Wronskian layout of a validated chain: non-pair functions in canonical
// order, and the paired-block arrangement when same-energy pairs are present.
struct ChainBasis {
  std::vector<ExpSum> functions;   // non-pair basis solutions
  std::vector<double> alphas;      // their factorization energies, fm^-2
  std::vector<double> magnitudes;  // the pole magnitudes, alpha = -m^2
  std::vector<PairBlock> blocks;   // reduced layout; empty when no pairs
  bool paired = false;
  std::size_t order = 0;
};

// full: the chain must pass the complete family bookkeeping; structural:
// parameter-level checks only, enough to apply the transformation operator
// to an arbitrary admissible function set.
enum class BasisStrictness { full, structural };

// Validates and assembles; throws ValidationError on a bad chain.
ChainBasis make_basis(const ChainSpec& chain, const NumericPolicy& policy = {},
                      BasisStrictness strictness = BasisStrictness::full);

// Exact pointwise evaluator for V_N(x) = -2 (log W)''.  Below grid_min the
// analytic short-range law nu(nu+1)/x^2 is reported instead of the
// determinant, whose zero of high order makes direct evaluation there moot.
class ChainPotential {
 public:
  explicit ChainPotential(ChainSpec chain, NumericPolicy policy = {},
                          BasisStrictness strictness = BasisStrictness::full);

  double operator()(double x) const;
  WronskianValue wronskian_at(double x) const;

  // Transformed solution at momentum k (real, or purely imaginary for bound
  // state checks), normalized as the composition of first-order operators.
  std::complex<double> solution(std::complex<double> k, double x) const;

  const ChainSpec& chain() const { return chain_; }
  int nu() const { return nu_; }
  const std::vector<double>& bound_states() const { return bound_; }
  const NumericPolicy& policy() const { return policy_; }
  bool empty() const { return basis_.order == 0; }

 private:
  ChainSpec chain_;
  NumericPolicy policy_;
  ChainBasis basis_;
  std::shared_ptr<DirectWronskian> direct_;
  std::shared_ptr<ReducedWronskian> reduced_;
  int nu_ = 0;
  std::vector<double> bound_;
};

// Samples V_N on the policy grid; fails with NodalWronskianError (naming the
// offending x) if the Wronskian loses a sign anywhere on it.
PotentialTable build_potential(const ChainSpec& chain, const NumericPolicy& policy = {});

// Sign-consistency scan over the policy grid; throws NodalWronskianError at
// the first lost sign.  Family bookkeeping cannot see these nodes, so every
// consumer that integrates the potential runs this first.
void assert_nodeless(const ChainPotential& pot);

// Single Darboux step V1 = V0 - 2 w', w = u'/u, for a closed-form u solving
// the reference equation at factorization energy alpha.
PotentialTable first_order_step(const std::function<double(double)>& v0, const ExpSum& u,
                                double alpha, const NumericPolicy& policy = {});

// Composes the chain step by step through the first-order recurrence,
// carrying every intermediate function pointwise.  Fully independent of the
// one-shot determinant formula; used to cross-check it.
std::vector<double> compose_first_order(const ChainSpec& chain, const std::vector<double>& xs);

// Transformed solution of the chain at momentum k.
std::complex<double> eigenfunction(const ChainSpec& chain, std::complex<double> k, double x,
                                   const NumericPolicy& policy = {});

// Closed-form reference potentials, MeV, x > 0.
double reference_reid68(double x);
double reference_kukulin(double x);

}  // namespace isophase
