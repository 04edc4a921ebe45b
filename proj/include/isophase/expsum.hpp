// Exact exponential sums f(x) = sum_i c_i exp(lambda_i x).
//
// These carry the transformation functions of a chain: for a zero reference
// potential every basis solution at negative energy is such a sum, and the
// class is closed under differentiation, products and antiderivatives, which
// is what keeps the Wronskian evaluation analytic.
#pragma once

#include <vector>

namespace isophase {

class ExpSum {
 public:
  struct Term {
    double coeff;
    double rate;  // fm^-1
  };

  ExpSum() = default;
  explicit ExpSum(std::vector<Term> terms);

  // c * exp(rate x)
  static ExpSum exponential(double rate, double coeff = 1.0);
  // sinh(b x) = (exp(bx) - exp(-bx)) / 2
  static ExpSum sinh_of(double b);
  // the constant c (a single zero-rate term)
  static ExpSum constant(double c);

  const std::vector<Term>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  ExpSum derivative() const;
  ExpSum squared() const;            // collects equal rates
  ExpSum scaled(double factor) const;
  ExpSum plus(const ExpSum& other) const;

  // Antiderivative term by term; throws on a nonzero zero-rate term
  // (the primitive would leave the exponential-sum class).
  ExpSum antiderivative() const;

  double value(double x) const;
  // sum_i c_i exp((lambda_i - shift) x); the caller accounts for exp(shift x).
  double value_shifted(double x, double shift) const;

  // Largest rate carried by a nonzero coefficient; the dominant exponential
  // for x -> +inf.  Zero for an empty sum.
  double dominant_rate() const;

 private:
  std::vector<Term> terms_;
};

}  // namespace isophase
