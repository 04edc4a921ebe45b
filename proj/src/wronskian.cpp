#include "isophase/wronskian.hpp"

#include <cmath>
#include <stdexcept>

#include "isophase/detail/linalg.hpp"

namespace isophase {

namespace {

using cld = std::complex<long double>;

double ratio_from(const detail::LogDet& num, const detail::LogDet& den) {
  if (num.sign == 0) return 0.0;
  return num.sign * den.sign * std::exp(num.log_abs - den.log_abs);
}

// Border-column derivative ladder: psi'' = -E psi for the zero reference
// potential, so order o is (-E)^(o/2) times psi or psi'.
cld border_row(const BorderColumn& psi, std::size_t order) {
  const cld v(psi.value.real(), psi.value.imag());
  const cld d(psi.deriv.real(), psi.deriv.imag());
  cld f(1.0L, 0.0L);
  const cld mE(-psi.energy, 0.0L);
  for (std::size_t i = 0; i + 1 < order; i += 2) f *= mE;
  return (order % 2 == 0) ? f * v : f * d;
}

}  // namespace

// ---------------------------------------------------------------------------
// DirectWronskian
// ---------------------------------------------------------------------------

DirectWronskian::DirectWronskian(std::vector<ExpSum> funcs, NumericPolicy policy)
    : funcs_(std::move(funcs)), policy_(policy) {
  policy_.check();
  if (funcs_.empty()) throw std::invalid_argument("DirectWronskian: need at least one function");
  const std::size_t N = funcs_.size();
  derivs_.resize(N);
  scale_rate_.resize(N);
  for (std::size_t j = 0; j < N; ++j) {
    if (funcs_[j].empty()) throw std::invalid_argument("DirectWronskian: empty basis function");
    scale_rate_[j] = funcs_[j].dominant_rate();
    derivs_[j].reserve(N + 2);
    derivs_[j].push_back(funcs_[j]);
    for (std::size_t o = 0; o < N + 1; ++o) derivs_[j].push_back(derivs_[j].back().derivative());
  }
}

WronskianValue DirectWronskian::evaluate(double x) const {
  if (!(x > 0.0)) throw std::domain_error("DirectWronskian::evaluate: x must be positive");
  const std::size_t N = funcs_.size();
  double scale_log = 0.0;
  for (std::size_t j = 0; j < N; ++j) scale_log += scale_rate_[j] * x;

  if (N == 1) {
    const double f = funcs_[0].value_shifted(x, scale_rate_[0]);
    WronskianValue out;
    if (f == 0.0) return out;
    out.sign = f > 0.0 ? 1 : -1;
    out.log_magnitude = std::log(std::abs(f)) + scale_log;
    out.w_prime_over_w = derivs_[0][1].value_shifted(x, scale_rate_[0]) / f;
    out.w_second_over_w = derivs_[0][2].value_shifted(x, scale_rate_[0]) / f;
    out.valid = true;
    return out;
  }

  // Scaled derivative table, orders 0..N+1.
  std::vector<long double> row((N + 2) * N);
  for (std::size_t o = 0; o < N + 2; ++o)
    for (std::size_t j = 0; j < N; ++j)
      row[o * N + j] = derivs_[j][o].value_shifted(x, scale_rate_[j]);

  auto det_of = [&](const std::vector<std::size_t>& orders) {
    std::vector<long double> m(N * N);
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j) m[i * N + j] = row[orders[i] * N + j];
    return detail::log_det(std::move(m), N, policy_.det_rel_tol);
  };

  std::vector<std::size_t> base(N);
  for (std::size_t i = 0; i < N; ++i) base[i] = i;
  const auto w = det_of(base);

  WronskianValue out;
  if (w.sign == 0) return out;

  // W'  : last derivative row bumped one order.
  // W'' : last row bumped twice, plus last two rows bumped once each.
  auto bump = base;
  bump[N - 1] = N;
  const auto w1 = det_of(bump);

  bump[N - 1] = N + 1;
  const auto w2a = det_of(bump);

  bump[N - 1] = N;
  bump[N - 2] = N - 1;
  const auto w2b = det_of(bump);

  out.sign = w.sign;
  out.log_magnitude = w.log_abs + scale_log;
  out.w_prime_over_w = ratio_from(w1, w);
  out.w_second_over_w = ratio_from(w2a, w) + ratio_from(w2b, w);
  out.valid = true;
  return out;
}

ScaledValue<std::complex<double>> DirectWronskian::bordered(const BorderColumn& psi, double x) const {
  if (!(x > 0.0)) throw std::domain_error("DirectWronskian::bordered: x must be positive");
  const std::size_t N = funcs_.size();
  const std::size_t M = N + 1;
  std::vector<cld> m(M * M);
  double scale_log = 0.0;
  for (std::size_t j = 0; j < N; ++j) scale_log += scale_rate_[j] * x;
  for (std::size_t i = 0; i < M; ++i) {
    for (std::size_t j = 0; j < N; ++j)
      m[i * M + j] = cld(derivs_[j][i].value_shifted(x, scale_rate_[j]), 0.0L);
    m[i * M + N] = border_row(psi, i);
  }
  detail::SmallLU<cld> lu(std::move(m), M);
  ScaledValue<std::complex<double>> out;
  if (lu.exactly_singular()) return out;
  cld mant;
  double log_scale;
  lu.det(mant, log_scale);
  out.mantissa = std::complex<double>((double)mant.real(), (double)mant.imag());
  out.log_scale = log_scale + scale_log;
  return out;
}

// ---------------------------------------------------------------------------
// pair_w2
// ---------------------------------------------------------------------------

ExpSum pair_w2_primitive(const ExpSum& u, double c, bool x0_at_infinity) {
  if (x0_at_infinity) {
    if (c > 0.0)
      throw std::invalid_argument("pair_w2: x0 at infinity requires c <= 0");
    if (u.dominant_rate() >= 0.0)
      throw std::invalid_argument("pair_w2: integral from infinity diverges for a non-decaying u");
    // the antiderivative vanishes at infinity, so it is the integral itself
    return ExpSum::constant(c).plus(u.squared().antiderivative());
  }
  if (c < 0.0)
    throw std::invalid_argument("pair_w2: x0 at the origin requires c >= 0");
  ExpSum prim = u.squared().antiderivative();
  return ExpSum::constant(c - prim.value(0.0)).plus(prim);
}

double pair_w2(const ExpSum& u, double c, bool x0_at_infinity, double x) {
  return pair_w2_primitive(u, c, x0_at_infinity).value(x);
}

double alpha_difference(double alpha_first, double mag_first, double alpha_second,
                        double mag_second) {
  if (mag_first >= 0.0 && mag_second >= 0.0)
    return (mag_second - mag_first) * (mag_second + mag_first);
  return alpha_first - alpha_second;
}

// ---------------------------------------------------------------------------
// ReducedWronskian
// ---------------------------------------------------------------------------

ReducedWronskian::ReducedWronskian(std::vector<PairBlock> pairs, NumericPolicy policy)
    : pairs_(std::move(pairs)), policy_(policy) {
  policy_.check();
  const std::size_t m = pairs_.size();
  if (m == 0) throw std::invalid_argument("ReducedWronskian: need at least one pair");

  rho_odd_.resize(m);
  rho_even_.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    auto& pr = pairs_[i];
    if (pr.coincident) {
      if (pr.w2.empty())
        throw std::invalid_argument("ReducedWronskian: coincident pair without its W2 primitive");
      pr.even = pr.odd;  // both slots carry the same function
      pr.alpha_even = pr.alpha_odd;
      // split the dominant growth of W2 evenly between the two slots
      rho_odd_[i] = rho_even_[i] = 0.5 * pr.w2.dominant_rate();
    } else {
      rho_odd_[i] = pr.odd.dominant_rate();
      rho_even_[i] = pr.even.dominant_rate();
    }
  }

  // Base entries W(f_odd,i, f_even,j)/(alpha_odd,i - alpha_even,j); the
  // coincident diagonal keeps its W2 primitive instead.
  entry_.resize(m * m);
  pref_log_ = 0.0;
  pref_sign_ = 1;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (i == j && pairs_[i].coincident) {
        entry_[i * m + j] = pairs_[i].w2;
        continue;
      }
      const ExpSum& f = pairs_[i].odd;
      const ExpSum& g = pairs_[j].even;
      const double dalpha = alpha_difference(pairs_[i].alpha_odd, pairs_[i].mag_odd,
                                             pairs_[j].alpha_even, pairs_[j].mag_even);
      if (dalpha == 0.0)
        throw std::invalid_argument(
            "ReducedWronskian: coinciding factorization constants outside a declared pair");
      std::vector<ExpSum::Term> terms;
      terms.reserve(f.terms().size() * g.terms().size());
      for (const auto& s : f.terms())
        for (const auto& t : g.terms())
          terms.push_back({s.coeff * t.coeff * (t.rate - s.rate) / dalpha, s.rate + t.rate});
      entry_[i * m + j] = ExpSum(std::move(terms));
      pref_log_ += std::log(std::abs(dalpha));
      if (dalpha < 0.0) pref_sign_ = -pref_sign_;
    }
  }

  odd_der_.reserve(m);
  even_der_.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    odd_der_.push_back(pairs_[i].odd.derivative());
    even_der_.push_back(pairs_[i].even.derivative());
  }

  // Parity between the interleaved function order f1,f2,...,f2m and the
  // odd-rows / even-columns arrangement of the reduced determinant.
  orientation_ = (m * (m - 1) / 2) % 2 == 0 ? 1 : -1;
}

WronskianValue ReducedWronskian::evaluate(double x) const {
  if (!(x > 0.0)) throw std::domain_error("ReducedWronskian::evaluate: x must be positive");
  const std::size_t m = pairs_.size();

  std::vector<long double> M(m * m);
  double scale_log = 0.0;
  for (std::size_t i = 0; i < m; ++i) scale_log += (rho_odd_[i] + rho_even_[i]) * x;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      M[i * m + j] = entry_[i * m + j].value_shifted(x, rho_odd_[i] + rho_even_[j]);

  detail::SmallLU<long double> lu(std::move(M), m);
  WronskianValue out;
  if (lu.exactly_singular()) return out;
  double pmin, pmax;
  lu.pivot_range(pmin, pmax);
  if (pmin <= policy_.det_rel_tol * pmax) return out;
  long double mant;
  double det_log;
  lu.det(mant, det_log);

  // dM_ij/dx = f_odd,i * f_even,j (the W2 diagonal included: dW2/dx = u^2),
  // a rank-one matrix, so the Jacobi expansion collapses to two solves:
  //   (log det)'  = q . M^-1 p
  //   (log det)'' = q . M^-1 p' + q' . M^-1 p - (q . M^-1 p)^2
  std::vector<long double> p(m), q(m), dp(m), dq(m);
  for (std::size_t i = 0; i < m; ++i) {
    p[i] = pairs_[i].odd.value_shifted(x, rho_odd_[i]);
    dp[i] = odd_der_[i].value_shifted(x, rho_odd_[i]);
    q[i] = pairs_[i].even.value_shifted(x, rho_even_[i]);
    dq[i] = even_der_[i].value_shifted(x, rho_even_[i]);
  }
  std::vector<long double> z = p, z2 = dp;
  lu.solve(z);
  lu.solve(z2);
  long double t1 = 0.0L, t2 = 0.0L, t3 = 0.0L;
  for (std::size_t i = 0; i < m; ++i) {
    t1 += q[i] * z[i];
    t2 += q[i] * z2[i];
    t3 += dq[i] * z[i];
  }
  const double logd1 = (double)t1;
  const double logd2 = (double)(t2 + t3 - t1 * t1);

  out.sign = orientation_ * pref_sign_ * (mant > 0.0L ? 1 : -1);
  out.log_magnitude = det_log + std::log(std::abs((double)mant)) + scale_log + pref_log_;
  out.w_prime_over_w = logd1;
  out.w_second_over_w = logd2 + logd1 * logd1;
  out.valid = true;
  return out;
}

ScaledValue<std::complex<double>> ReducedWronskian::bordered(const BorderColumn& psi, double x) const {
  if (!(x > 0.0)) throw std::domain_error("ReducedWronskian::bordered: x must be positive");
  const std::size_t m = pairs_.size();
  const std::size_t M = m + 1;
  const cld pv(psi.value.real(), psi.value.imag());
  const cld pd(psi.deriv.real(), psi.deriv.imag());

  std::vector<cld> B(M * M);
  B[0] = pv;
  double pref_e_log = 0.0;
  int pref_e_sign = 1;
  for (std::size_t j = 0; j < m; ++j) {
    const double de = psi.energy - pairs_[j].alpha_even;
    if (de == 0.0)
      throw std::domain_error(
          "ReducedWronskian::bordered: E coincides with a factorization constant; "
          "use the deleted-function solution formula");
    const long double ge = pairs_[j].even.value_shifted(x, rho_even_[j]);
    const long double dge = even_der_[j].value_shifted(x, rho_even_[j]);
    // W(psi, f_even)/(E - alpha_even), column-scaled
    B[j + 1] = (pv * dge - pd * ge) / (long double)de;
    // prefactor carries (alpha_even - E) = -(E - alpha_even)
    pref_e_log += std::log(std::abs(de));
    pref_e_sign *= de < 0.0 ? 1 : -1;
  }
  for (std::size_t i = 0; i < m; ++i) {
    B[(i + 1) * M] = cld(pairs_[i].odd.value_shifted(x, rho_odd_[i]), 0.0L);
    for (std::size_t j = 0; j < m; ++j)
      B[(i + 1) * M + (j + 1)] =
          cld(entry_[i * m + j].value_shifted(x, rho_odd_[i] + rho_even_[j]), 0.0L);
  }

  double scale_log = 0.0;
  for (std::size_t i = 0; i < m; ++i) scale_log += (rho_odd_[i] + rho_even_[i]) * x;

  detail::SmallLU<cld> lu(std::move(B), M);
  ScaledValue<std::complex<double>> out;
  if (lu.exactly_singular()) return out;
  cld mant;
  double log_scale;
  lu.det(mant, log_scale);
  mant *= cld(orientation_ * pref_sign_ * pref_e_sign, 0.0L);
  out.mantissa = std::complex<double>((double)mant.real(), (double)mant.imag());
  out.log_scale = log_scale + scale_log + pref_log_ + pref_e_log;
  return out;
}

// ---------------------------------------------------------------------------
// Free functions
// ---------------------------------------------------------------------------

WronskianValue wronskian(std::span<const ExpSum> funcs, double x, const NumericPolicy& policy) {
  return DirectWronskian(std::vector<ExpSum>(funcs.begin(), funcs.end()), policy).evaluate(x);
}

WronskianValue reduced_even(std::span<const PairBlock> pairs, double x, const NumericPolicy& policy) {
  return ReducedWronskian(std::vector<PairBlock>(pairs.begin(), pairs.end()), policy).evaluate(x);
}

ScaledValue<std::complex<double>> reduced_odd(const ExpSum& psi, double energy,
                                              std::span<const PairBlock> pairs, double x,
                                              const NumericPolicy& policy) {
  if (pairs.empty()) {
    ScaledValue<std::complex<double>> out;
    out.mantissa = std::complex<double>(psi.value(x), 0.0);
    return out;
  }
  ReducedWronskian rw(std::vector<PairBlock>(pairs.begin(), pairs.end()), policy);
  BorderColumn col{std::complex<double>(psi.value(x), 0.0),
                   std::complex<double>(psi.derivative().value(x), 0.0), energy};
  return rw.bordered(col, x);
}

}  // namespace isophase
