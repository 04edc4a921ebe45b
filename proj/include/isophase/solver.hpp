// Independent radial-Schrodinger oracle: Numerov integration, phase
// extraction against the sin(kx - nu pi/2 + delta) asymptote, bound-state
// search, and the phase-equivalence verification harness.  Everything here
// deliberately avoids the Wronskian machinery it is meant to check.
#pragma once

#include <functional>
#include <mutex>
#include <string>
#include <vector>

#include "isophase/chain.hpp"
#include "isophase/constants.hpp"

namespace isophase {

struct SolverConfig {
  double x_start = 1e-2;     // 10 * default grid_min; startup psi ~ x^(nu+1)
  double x_match = 15.0;     // first matching radius, grown by 1.5 until stable
  double x_match_max = 200.0;
  double step = 5e-3;        // fm
  int nu_origin = 0;
  double tol = 1e-6;         // rad, phase stabilization between radii
  double bisect_tol = 1e-9;  // relative, bound-state bisection

  static SolverConfig from_policy(const NumericPolicy& policy, int nu);
};

struct Wavefunction {
  std::vector<double> x;
  std::vector<double> psi;  // overall amplitude arbitrary; rescaled in flight
  double dpsi_end = 0.0;    // derivative at the final sample
  double log_scale = 0.0;   // accumulated rescaling of the stored samples
};

class RadialSolver {
 public:
  RadialSolver(std::function<double(double)> potential, SolverConfig cfg = {});

  // Outward integration of -psi'' + V psi = E psi from the origin series.
  Wavefunction integrate(double energy, double x_end) const;

  // delta(k), branch-resolved by marching from low momentum where the phase
  // is unambiguous; anchored at delta(0+) -> 0.
  double phase_shift(double k) const;
  std::vector<double> phase_shifts(std::vector<double> ks) const;

  // All bound levels inside [e_min, e_max], e_max <= 0, via the sign changes
  // of the outward/inward Wronskian mismatch, node counts guarding the scan.
  std::vector<double> bound_states(double e_min, double e_max) const;

  const SolverConfig& config() const { return cfg_; }

 private:
  void ensure_cache(std::size_t last_node) const;
  double raw_phase(double k, double x_end) const;       // delta mod pi
  double stabilized_phase(double k) const;               // adaptive radius
  struct Mismatch {
    double wronskian;
    int nodes;
  };
  // match and far positions given as grid-node indices, so the outward and
  // inward branches meet on the same abscissa exactly
  Mismatch mismatch(double energy, std::size_t m_match, std::size_t m_far) const;

  std::function<double(double)> v_;
  SolverConfig cfg_;
  mutable std::vector<double> v_cache_;
  mutable std::mutex cache_mutex_;
};

// Spec-level free functions.
Wavefunction integrate_regular(const std::function<double(double)>& potential, double energy,
                               const SolverConfig& cfg);
double extract_phase(const std::function<double(double)>& potential, double k,
                     const SolverConfig& cfg);
std::vector<double> bound_states(const std::function<double(double)>& potential, double e_min,
                                 double e_max, const SolverConfig& cfg);

struct EquivalenceReport {
  std::vector<double> energies_mev;
  std::vector<std::string> chain_labels;
  std::vector<std::vector<double>> phases_deg;   // [chain][energy]
  std::vector<double> analytic_deg;              // from the pole formula
  std::vector<std::vector<double>> max_pair_dev; // [chain][chain], degrees
  double max_deviation_deg = 0.0;                // worst anywhere, incl. analytic
  double threshold_deg = 0.2;
  bool pass = false;
};

// Builds every chain's potential, extracts phases at the given lab energies,
// and checks all pairwise and against-analytic deviations.  The chains must
// share one phase-relevant pole set.
EquivalenceReport verify_phase_equivalence(const std::vector<ChainSpec>& chains,
                                           const std::vector<double>& energies_mev,
                                           double threshold_deg = 0.2,
                                           const Constants& constants = {},
                                           const NumericPolicy& policy = {});

}  // namespace isophase
