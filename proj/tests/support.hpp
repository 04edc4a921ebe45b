// Shared fixtures and independent oracles for the test suites.
#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "isophase/chain.hpp"
#include "isophase/expsum.hpp"

namespace testsupport {

// The six-pole np singlet-S set used throughout: three a's, three b's, fm^-1.
inline isophase::PoleSet np1s0_poles() {
  isophase::PoleSet ps;
  ps.a = {-0.0401, -0.7540, 4.1650};
  ps.b = {0.6152, 2.0424, 4.6000};
  return ps;
}

inline isophase::ChainSpec np1s0_shallow() {
  isophase::ChainSpec chain;
  chain.functions = {
      isophase::RegularA{4.1650},          isophase::RegularB{0.6152},
      isophase::RegularB{2.0424},          isophase::RegularB{4.6000},
      isophase::SingularDecaying{-0.0401}, isophase::SingularDecaying{-0.7540},
  };
  return isophase::canonicalized(chain);
}

inline isophase::ChainSpec np1s0_deep(double ratio) {
  isophase::ChainSpec chain;
  chain.functions = {
      isophase::SingularMixed{4.1650, ratio}, isophase::RegularB{0.6152},
      isophase::RegularB{2.0424},             isophase::RegularB{4.6000},
      isophase::SingularDecaying{-0.0401},    isophase::SingularDecaying{-0.7540},
  };
  return isophase::canonicalized(chain);
}

inline isophase::ChainSpec np1s0_v8(double kappa = -3.7944, double c = -0.155) {
  return isophase::extend_with_pair(np1s0_shallow(), kappa, c);
}

// Exact expansion of the Wronskian of exponential sums: select one term per
// function, weight by the Vandermonde product of the chosen rates, and sum.
// Independent of the scaled-LU evaluation path under test.
inline long double vandermonde_wronskian(const std::vector<isophase::ExpSum>& funcs, double x) {
  const std::size_t n = funcs.size();
  std::vector<std::size_t> pick(n, 0);
  long double total = 0.0L;
  while (true) {
    long double coeff = 1.0L, rate_sum = 0.0L;
    std::vector<long double> rates(n);
    for (std::size_t j = 0; j < n; ++j) {
      const auto& t = funcs[j].terms()[pick[j]];
      coeff *= (long double)t.coeff;
      rates[j] = (long double)t.rate;
      rate_sum += rates[j];
    }
    long double vandermonde = 1.0L;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) vandermonde *= rates[j] - rates[i];
    total += coeff * vandermonde * std::exp(rate_sum * (long double)x);

    std::size_t j = 0;
    for (; j < n; ++j) {
      if (++pick[j] < funcs[j].terms().size()) break;
      pick[j] = 0;
    }
    if (j == n) break;
  }
  return total;
}

// Admissible random pole sets: equal counts of a's and b's, signs free,
// magnitudes log-uniform in [0.02, 6] and pairwise separated.
inline isophase::PoleSet random_pole_set(std::mt19937& rng, int n) {
  std::uniform_real_distribution<double> logmag(std::log(0.02), std::log(6.0));
  std::bernoulli_distribution flip(0.5);
  isophase::PoleSet ps;
  std::vector<double> mags;
  auto draw = [&]() {
    while (true) {
      const double m = std::exp(logmag(rng));
      bool ok = true;
      for (double q : mags)
        if (std::abs(q - m) < 1e-3) ok = false;
      if (ok) {
        mags.push_back(m);
        return m;
      }
    }
  };
  for (int i = 0; i < n; ++i) ps.a.push_back(flip(rng) ? -draw() : draw());
  for (int i = 0; i < n; ++i) ps.b.push_back(draw());
  return ps;
}

}  // namespace testsupport
