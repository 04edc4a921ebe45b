// Pole sets and transformation-function chains.
//
// A chain is an ordered list of basis solutions of the zero reference
// potential, each pinned to one imaginary S-matrix pole.  The family split
// (regular vs singular at the origin) decides which poles become Jost-function
// zeros and which feed the k-power factor; every admissible split of the same
// pole set yields a different potential with the same phase shift.
#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "isophase/expsum.hpp"

namespace isophase {

// Fitted imaginary S-matrix pole positions, fm^-1.
struct PoleSet {
  std::vector<double> a;  // any sign, nonzero
  std::vector<double> b;  // strictly positive

  int n_minus() const;  // count of negative a's
  int n_plus() const;   // positive a's plus all b's
  // Basic invariants: signs, nonzero, pairwise distinct magnitudes.
  // Throws ValidationError.
  void check() const;
};

// --- transformation functions -------------------------------------------

// Regular solution sinh(b x) at energy -b^2.
struct RegularB {
  double b;
};

// Regular solution sinh(a x) for a positive pole hosted in the regular family.
struct RegularA {
  double a;
};

// Decaying irregular solution exp(a x), a < 0.
struct SingularDecaying {
  double a;
};

// Irregular combination u(x) = exp(a x) + ratio * exp(-a x), a > 0; carries a
// bound state at -a^2.  ratio = -1 is the regular (collapse) limit and is
// rejected; an unset ratio is resolved to 0 at build time.
struct SingularMixed {
  double a;
  std::optional<double> ratio;
};

// Two-function subchain with coincident factorization constants -kappa^2,
// realized through W2(x) = c + integral Of u^2 with u = exp(kappa x).
// Inserts one bound state without touching the phase shift.
struct SameEnergyPair {
  double kappa;  // < 0
  double c;      // fm; c <= 0 when x0 at infinity, c >= 0 when x0 = 0
  bool x0_at_infinity = true;
};

using TransformationFunction =
    std::variant<RegularB, RegularA, SingularDecaying, SingularMixed, SameEnergyPair>;

// One member of an isophase family.
struct ChainSpec {
  std::vector<TransformationFunction> functions;

  int regular_count() const;
  int singular_count() const;
  int pair_count() const;
  // Singularity strength of the built potential: unpaired regular functions.
  int nu() const;
  // Number of bound states carried by the chain.
  int n_bound() const;
  // Total transformation order N (a pair expands to two functions).
  std::size_t order() const;
  std::vector<double> bound_state_energies() const;  // fm^-2, ascending
  // The phase-relevant poles: pairs cancel and are excluded.
  PoleSet pole_set() const;
  // Short content hash used as table provenance.
  std::string digest() const;
};

// Regular functions by |pole| ascending, then singular by |pole| ascending,
// then pairs by |kappa| ascending.  Fixes the Wronskian row order and sign.
ChainSpec canonicalized(ChainSpec chain);

struct ValidationReport {
  bool ok = false;
  std::vector<std::string> violations;
  int nu = 0;
  int n_bound = 0;
  std::size_t order = 0;
};

// Report-style: never throws on a bad chain.
ValidationReport validate(const ChainSpec& chain);

// Parameter-level checks only (signs, collapse ratio, distinct constants,
// pair rules), without the family-balance bookkeeping.  This is what a bare
// operator application needs; scattering bookkeeping requires the full check.
ValidationReport validate_structural(const ChainSpec& chain);

enum class ConfigurationKind { shallow, deep, intermediate };

const char* to_string(ConfigurationKind kind);

struct ChainConfiguration {
  ChainSpec chain;
  ConfigurationKind kind;
};

// All admissible family assignments of the positive poles: the shallow one
// (no extra levels, maximal singularity strength), the deep ones (maximal
// level count), and everything in between.  Mixed ratios stay unset.
// Throws ValidationError when n_- > n_+.
std::vector<ChainConfiguration> enumerate_configurations(const PoleSet& poles);

// Appends a phase-preserving same-energy pair carrying a level at -kappa^2.
// Requires nu >= 2 and the new level below every existing one.
ChainSpec extend_with_pair(const ChainSpec& chain, double kappa, double c);

// --- basis assembly -------------------------------------------------------

// The exponential sum realizing one non-pair transformation function.
ExpSum basis_function(const TransformationFunction& fn);
// Factorization energy -pole^2 of a non-pair function.
double factorization_energy(const TransformationFunction& fn);
// |pole| of any transformation function, the exact stored parameter.
double pole_magnitude(const TransformationFunction& fn);

// --- file formats (poles.json / chain.json) -------------------------------

std::string to_json_string(const PoleSet& poles);
std::string to_json_string(const ChainSpec& chain);
PoleSet pole_set_from_json_string(const std::string& text);
ChainSpec chain_from_json_string(const std::string& text);

PoleSet load_pole_set(const std::string& path);
void save_pole_set(const PoleSet& poles, const std::string& path);
ChainSpec load_chain(const std::string& path);
void save_chain(const ChainSpec& chain, const std::string& path);

}  // namespace isophase
