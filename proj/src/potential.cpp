#include "isophase/potential.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "isophase/detail/parallel.hpp"
#include "isophase/errors.hpp"

namespace isophase {

namespace {

constexpr double kLevelMatchTol = 1e-9;

bool is_even(std::size_t n) { return n % 2 == 0; }

}  // namespace

ChainBasis make_basis(const ChainSpec& chain, const NumericPolicy& policy,
                      BasisStrictness strictness) {
  policy.check();
  const auto rep =
      strictness == BasisStrictness::full ? validate(chain) : validate_structural(chain);
  if (!rep.ok) {
    std::string msg = "invalid chain:";
    for (const auto& v : rep.violations) msg += " " + v + ";";
    throw ValidationError(msg);
  }

  const ChainSpec canon = canonicalized(chain);
  ChainBasis basis;
  basis.order = canon.order();

  std::vector<const SameEnergyPair*> pairs;
  for (const auto& fn : canon.functions) {
    if (const auto* p = std::get_if<SameEnergyPair>(&fn)) {
      pairs.push_back(p);
      continue;
    }
    basis.functions.push_back(basis_function(fn));
    basis.alphas.push_back(factorization_energy(fn));
    basis.magnitudes.push_back(pole_magnitude(fn));
  }

  // Near-coincident factorization constants starve the direct determinant of
  // pivots; the normalized two-function entries of the reduced form stay
  // well conditioned there, so such chains take that route as well.
  bool nearly_degenerate = false;
  for (std::size_t i = 0; i < basis.alphas.size(); ++i)
    for (std::size_t j = i + 1; j < basis.alphas.size(); ++j)
      if (std::abs(basis.alphas[i] - basis.alphas[j]) <
          1e-4 * std::max(std::abs(basis.alphas[i]), std::abs(basis.alphas[j])))
        nearly_degenerate = true;

  basis.paired = !pairs.empty() || (nearly_degenerate && is_even(basis.functions.size()));
  if (!basis.paired) return basis;

  if (!is_even(basis.functions.size()))
    throw ValidationError("paired chains require an even number of ordinary functions");

  // pair adjacent constants so any near-degeneracy stays inside one block
  std::vector<std::size_t> order(basis.functions.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return basis.alphas[i] < basis.alphas[j]; });

  for (std::size_t i = 0; i + 1 < order.size(); i += 2) {
    PairBlock blk;
    blk.odd = basis.functions[order[i]];
    blk.even = basis.functions[order[i + 1]];
    blk.alpha_odd = basis.alphas[order[i]];
    blk.alpha_even = basis.alphas[order[i + 1]];
    blk.mag_odd = basis.magnitudes[order[i]];
    blk.mag_even = basis.magnitudes[order[i + 1]];
    basis.blocks.push_back(std::move(blk));
  }
  for (const auto* p : pairs) {
    PairBlock blk;
    blk.odd = ExpSum::exponential(p->kappa);
    blk.even = blk.odd;
    blk.alpha_odd = blk.alpha_even = -p->kappa * p->kappa;
    blk.mag_odd = blk.mag_even = std::abs(p->kappa);
    blk.coincident = true;
    blk.w2 = pair_w2_primitive(blk.odd, p->c, p->x0_at_infinity);
    basis.blocks.push_back(std::move(blk));
  }
  return basis;
}

// ---------------------------------------------------------------------------
// ChainPotential
// ---------------------------------------------------------------------------

ChainPotential::ChainPotential(ChainSpec chain, NumericPolicy policy, BasisStrictness strictness)
    : chain_(canonicalized(std::move(chain))),
      policy_(policy),
      basis_(make_basis(chain_, policy_, strictness)) {
  nu_ = chain_.nu();
  bound_ = chain_.bound_state_energies();
  if (basis_.order == 0) return;
  if (basis_.paired)
    reduced_ = std::make_shared<ReducedWronskian>(basis_.blocks, policy_);
  else
    direct_ = std::make_shared<DirectWronskian>(basis_.functions, policy_);
}

WronskianValue ChainPotential::wronskian_at(double x) const {
  if (basis_.order == 0) {
    WronskianValue unity;
    unity.sign = 1;
    unity.valid = true;
    return unity;
  }
  return basis_.paired ? reduced_->evaluate(x) : direct_->evaluate(x);
}

double ChainPotential::operator()(double x) const {
  if (!(x > 0.0)) throw std::domain_error("ChainPotential: x must be positive");
  if (basis_.order == 0) return 0.0;
  if (x < policy_.grid_min) return nu_ * (nu_ + 1) / (x * x);
  const auto w = wronskian_at(x);
  if (!w.valid) throw NodalWronskianError(x);
  return -2.0 * w.log_deriv2();
}

std::complex<double> ChainPotential::solution(std::complex<double> k, double x) const {
  using cd = std::complex<double>;
  const bool real_k = k.imag() == 0.0;
  const bool imag_k = k.real() == 0.0;
  if (!real_k && !imag_k)
    throw std::domain_error("ChainPotential::solution: k must be real or purely imaginary");

  if (basis_.order == 0) {
    if (real_k) return cd(std::sin(k.real() * x), 0.0);
    return cd(0.0, std::sinh(k.imag() * x));  // sin(i kappa x)
  }

  // operator-composition normalization: (-1)^N times the Wronskian ratio
  const double op_sign = is_even(basis_.order) ? 1.0 : -1.0;

  if (imag_k) {
    const double kappa = std::abs(k.imag());
    // at a chain level the generic border degenerates; delete the function
    for (std::size_t i = 0; i < basis_.functions.size(); ++i) {
      if (std::abs(std::sqrt(-basis_.alphas[i]) - kappa) > kLevelMatchTol) continue;
      if (basis_.paired)
        throw std::domain_error("ChainPotential::solution: deleted-function route needs an unpaired chain");
      std::vector<ExpSum> rest;
      for (std::size_t j = 0; j < basis_.functions.size(); ++j)
        if (j != i) rest.push_back(basis_.functions[j]);
      const auto num = DirectWronskian(std::move(rest), policy_).evaluate(x);
      const auto den = direct_->evaluate(x);
      if (!num.valid || !den.valid) throw NodalWronskianError(x);
      return cd(op_sign * num.sign * den.sign * std::exp(num.log_magnitude - den.log_magnitude), 0.0);
    }
    for (const auto& blk : basis_.blocks) {
      if (!blk.coincident || std::abs(std::abs(blk.odd.terms().front().rate) - kappa) > kLevelMatchTol)
        continue;
      // the level inserted by a pair: border the remaining blocks with u itself
      std::vector<PairBlock> rest;
      for (const auto& other : basis_.blocks)
        if (&other != &blk) rest.push_back(other);
      const auto num = reduced_odd(blk.odd, blk.alpha_odd, rest, x, policy_);
      const auto den = reduced_->evaluate(x);
      if (num.mantissa == cd(0.0, 0.0) || !den.valid) throw NodalWronskianError(x);
      const double mag = std::exp(num.log_scale - den.log_magnitude) / den.sign;
      return op_sign * num.mantissa * mag;
    }
  }

  BorderColumn psi;
  if (real_k) {
    const double kr = k.real();
    psi = {cd(std::sin(kr * x), 0.0), cd(kr * std::cos(kr * x), 0.0), kr * kr};
  } else {
    const double kappa = k.imag();
    psi = {cd(0.0, std::sinh(kappa * x)), cd(0.0, kappa * std::cosh(kappa * x)), -kappa * kappa};
  }

  const auto num = basis_.paired ? reduced_->bordered(psi, x) : direct_->bordered(psi, x);
  const auto den = wronskian_at(x);
  if (!den.valid) throw NodalWronskianError(x);
  return op_sign * num.mantissa * std::exp(num.log_scale - den.log_magnitude) * (double)den.sign;
}

// ---------------------------------------------------------------------------
// build_potential
// ---------------------------------------------------------------------------

PotentialTable build_potential(const ChainSpec& chain, const NumericPolicy& policy) {
  ChainPotential pot(chain, policy);

  PotentialTable table;
  table.nu = pot.nu();
  table.bound_states = pot.bound_states();
  table.provenance = canonicalized(chain).digest();

  const std::size_t count =
      (std::size_t)std::floor((policy.grid_max - policy.grid_min) / policy.grid_step + 0.5) + 1;
  table.x.resize(count);
  table.v.resize(count);
  std::vector<int> sign(count);

  std::exception_ptr error;
  std::mutex error_mutex;
  detail::parallel_for(count, [&](std::size_t i) {
    const double x = policy.grid_min + (double)i * policy.grid_step;
    try {
      const auto w = pot.wronskian_at(x);
      if (!w.valid) throw NodalWronskianError(x);
      table.x[i] = x;
      table.v[i] = pot.empty() ? 0.0 : -2.0 * w.log_deriv2();
      sign[i] = w.sign;
    } catch (...) {
      std::scoped_lock lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  });
  if (error) std::rethrow_exception(error);

  for (std::size_t i = 1; i < count; ++i)
    if (sign[i] != sign[0]) throw NodalWronskianError(table.x[i]);
  return table;
}

void assert_nodeless(const ChainPotential& pot) {
  if (pot.empty()) return;
  const auto& policy = pot.policy();
  int sign0 = 0;
  for (double x = policy.grid_min; x <= policy.grid_max; x += policy.grid_step) {
    const auto w = pot.wronskian_at(x);
    if (!w.valid) throw NodalWronskianError(x);
    if (sign0 == 0) sign0 = w.sign;
    if (w.sign != sign0) throw NodalWronskianError(x);
  }
}

PotentialTable first_order_step(const std::function<double(double)>& v0, const ExpSum& u,
                                double alpha, const NumericPolicy& policy) {
  policy.check();
  (void)alpha;  // recorded in the contract: alpha must lie below the spectrum of v0
  PotentialTable table;
  table.nu = 0;
  const ExpSum du = u.derivative();
  const ExpSum ddu = du.derivative();
  const double rho = u.dominant_rate();
  for (double x = policy.grid_min; x <= policy.grid_max + 0.5 * policy.grid_step;
       x += policy.grid_step) {
    const double f = u.value_shifted(x, rho);
    if (f == 0.0) throw NodalWronskianError(x);
    const double w = du.value_shifted(x, rho) / f;
    const double wp = ddu.value_shifted(x, rho) / f - w * w;
    table.x.push_back(x);
    table.v.push_back((v0 ? v0(x) : 0.0) - 2.0 * wp);
  }
  return table;
}

std::vector<double> compose_first_order(const ChainSpec& chain, const std::vector<double>& xs) {
  if (chain.pair_count() > 0)
    throw ValidationError("compose_first_order: same-energy pairs have no first-order splitting");
  const auto basis = make_basis(chain);
  const std::size_t n = basis.functions.size();

  std::vector<ExpSum> derivs;
  derivs.reserve(n);
  for (const auto& f : basis.functions) derivs.push_back(f.derivative());

  std::vector<double> out(xs.size());
  for (std::size_t ix = 0; ix < xs.size(); ++ix) {
    const double x = xs[ix];
    std::vector<double> y(n), d(n);
    for (std::size_t j = 0; j < n; ++j) {
      y[j] = basis.functions[j].value(x);
      d[j] = derivs[j].value(x);
    }
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (y[i] == 0.0) throw NodalWronskianError(x);
      const double w = d[i] / y[i];
      const double wp = (v - basis.alphas[i]) - w * w;
      const double v_next = v - 2.0 * wp;
      for (std::size_t j = i + 1; j < n; ++j) {
        const double y_new = -d[j] + w * y[j];
        const double d_new = -(v - basis.alphas[j]) * y[j] + wp * y[j] + w * d[j];
        y[j] = y_new;
        d[j] = d_new;
      }
      v = v_next;
    }
    out[ix] = v;
  }
  return out;
}

std::complex<double> eigenfunction(const ChainSpec& chain, std::complex<double> k, double x,
                                   const NumericPolicy& policy) {
  // structural checks only: the operator applies to any admissible function
  // set, whether or not it is balanced into a scattering chain
  return ChainPotential(chain, policy, BasisStrictness::structural).solution(k, x);
}

double reference_reid68(double x) {
  if (!(x > 0.0)) throw std::domain_error("reference_reid68: x must be positive");
  const double mu = 0.7 * x;
  return (-10.463 * std::exp(-mu) - 1650.6 * std::exp(-4.0 * mu) + 6484.2 * std::exp(-7.0 * mu)) / mu;
}

double reference_kukulin(double x) {
  if (!(x > 0.0)) throw std::domain_error("reference_kukulin: x must be positive");
  const double mu = 0.7 * x;
  return -1106.21 * std::exp(-1.6 * x * x) -
         10.464 * std::exp(-mu) / mu * (1.0 - std::exp(-3.0 * x));
}

}  // namespace isophase
