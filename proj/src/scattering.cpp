#include "isophase/scattering.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "isophase/errors.hpp"
#include "isophase/potential.hpp"

namespace isophase {

namespace {

constexpr double kPi = std::numbers::pi;

std::complex<double> evaluate_factor(const JostFactor& f, std::complex<double> k) {
  std::complex<double> out(1.0, 0.0);
  for (int i = 0; i < f.nu_power; ++i) out *= k;
  for (double z : f.zeros) out *= k - std::complex<double>(0.0, z);
  for (double p : f.poles) {
    const std::complex<double> den = k + std::complex<double>(0.0, p);
    if (std::abs(den) == 0.0)
      throw NumericalError("jost: evaluation at the pole k = -i " + std::to_string(p));
    out /= den;
  }
  return out;
}

double double_factorial_odd(int nu) {
  double f = 1.0;
  for (int j = 2 * nu - 1; j > 0; j -= 2) f *= j;
  return f;
}

}  // namespace

JostFactor jost_factor(const ChainSpec& chain) {
  const auto rep = validate(chain);
  if (!rep.ok) throw ValidationError("jost_factor: invalid chain: " + rep.violations.front());
  JostFactor f;
  f.nu_power = chain.nu();
  for (const auto& fn : chain.functions) {
    if (const auto* rb = std::get_if<RegularB>(&fn)) f.poles.push_back(rb->b);
    else if (const auto* ra = std::get_if<RegularA>(&fn)) f.poles.push_back(ra->a);
    else if (const auto* sd = std::get_if<SingularDecaying>(&fn)) f.zeros.push_back(sd->a);
    else if (const auto* sm = std::get_if<SingularMixed>(&fn)) f.zeros.push_back(sm->a);
    else if (const auto* p = std::get_if<SameEnergyPair>(&fn)) {
      // a pair leaves the phase alone but trades two powers of k for the
      // conjugate zeros at +-i|kappa|, which is where its bound state lives
      f.zeros.push_back(std::abs(p->kappa));
      f.zeros.push_back(-std::abs(p->kappa));
    }
  }
  return f;
}

std::complex<double> jost(const ChainSpec& chain, std::complex<double> k) {
  return evaluate_factor(jost_factor(chain), k);
}

double phase_shift(const PoleSet& poles, double k) {
  if (k < 0.0) throw std::domain_error("phase_shift: k must be non-negative");
  double d = 0.0;
  for (double a : poles.a) d -= std::atan(k / a);
  for (double b : poles.b) d -= std::atan(k / b);
  return d;
}

double phase_shift_at_infinity(const PoleSet& poles) {
  double d = 0.0;
  for (double a : poles.a) d -= (a > 0.0 ? 1.0 : -1.0) * kPi / 2.0;
  d -= (double)poles.b.size() * kPi / 2.0;
  return d;
}

std::complex<double> s_matrix(const PoleSet& poles, double k) {
  if (k == 0.0) return {1.0, 0.0};
  const double d = phase_shift(poles, k);
  return std::polar(1.0, 2.0 * d);
}

std::complex<double> s_matrix_from_jost(const ChainSpec& chain, double k) {
  const auto f = jost_factor(chain);
  const std::complex<double> kp(k, 0.0);
  const double parity = f.nu_power % 2 == 0 ? 1.0 : -1.0;
  return parity * evaluate_factor(f, -kp) / evaluate_factor(f, kp);
}

Observables observables(const PoleSet& poles) {
  double s1 = 0.0, s3 = 0.0;
  for (double a : poles.a) {
    s1 += 1.0 / a;
    s3 += 1.0 / (a * a * a);
  }
  for (double b : poles.b) {
    s1 += 1.0 / b;
    s3 += 1.0 / (b * b * b);
  }
  Observables out;
  if (s1 == 0.0) {
    out.finite = false;
    out.scattering_length = 0.0;
    out.effective_range = std::numeric_limits<double>::infinity();
    return out;
  }
  out.scattering_length = s1;
  out.effective_range = (2.0 * s1 / 3.0) * (1.0 - s3 / (s1 * s1 * s1));
  return out;
}

LevinsonReport levinson_check(const ChainSpec& chain) {
  const auto rep = validate(chain);
  if (!rep.ok) throw ValidationError("levinson_check: invalid chain: " + rep.violations.front());
  const PoleSet poles = chain.pole_set();
  LevinsonReport out;
  out.delta_drop = -phase_shift_at_infinity(poles);  // delta(0) = 0 exactly
  out.n_bound = chain.n_bound();
  out.nu = chain.nu();
  out.ledger = (out.n_bound + 0.5 * out.nu) * kPi;
  out.pass = std::abs(out.delta_drop - out.ledger) < 1e-12 * std::max(1.0, std::abs(out.ledger));
  return out;
}

std::complex<double> jost_from_solution(const ChainSpec& chain, double k,
                                        const NumericPolicy& policy) {
  using cd = std::complex<double>;
  if (!(k > 0.0)) throw std::domain_error("jost_from_solution: k must be positive");
  const auto basis = make_basis(chain, policy);
  if (basis.order == 0) return {1.0, 0.0};
  const int nu = chain.nu();

  std::shared_ptr<DirectWronskian> direct;
  std::shared_ptr<ReducedWronskian> reduced;
  if (basis.paired)
    reduced = std::make_shared<ReducedWronskian>(basis.blocks, policy);
  else
    direct = std::make_shared<DirectWronskian>(basis.functions, policy);

  // f~(x,k) = W(u_1..u_N, e^{ikx}) / W(u_1..u_N)
  auto jost_solution = [&](double x) -> cd {
    const cd phase = std::polar(1.0, k * x);
    const BorderColumn psi{phase, cd(0.0, k) * phase, k * k};
    const auto num = basis.paired ? reduced->bordered(psi, x) : direct->bordered(psi, x);
    const auto den = basis.paired ? reduced->evaluate(x) : direct->evaluate(x);
    if (!den.valid) throw NodalWronskianError(x);
    return num.mantissa * std::exp(num.log_scale - den.log_magnitude) * (double)den.sign;
  };

  // origin weighting (kx)^nu / (i^nu (2nu-1)!!)
  auto weighted_near_origin = [&](double x) -> cd {
    cd inu(1.0, 0.0);
    for (int i = 0; i < nu; ++i) inu *= cd(0.0, 1.0);
    return std::pow(k * x, nu) / (inu * double_factorial_odd(nu)) * jost_solution(x);
  };

  const double x_far = policy.grid_max;
  const cd tail = std::polar(1.0, -k * x_far) * jost_solution(x_far);

  const double x0 = policy.grid_min;
  const cd f1 = weighted_near_origin(x0) / tail;
  const cd f2 = weighted_near_origin(2.0 * x0) / tail;
  if (std::abs(f1 - f2) > 5e-2 * std::abs(f1))
    throw VerificationError("jost_from_solution: origin limit did not converge");
  // remove the leading correction, linear in x for regular chains; for the
  // singular ones it is already quadratic and stays negligible
  return 2.0 * f1 - f2;
}

}  // namespace isophase
