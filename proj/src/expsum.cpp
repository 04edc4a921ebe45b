#include "isophase/expsum.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace isophase {

namespace {
constexpr double kZeroRateTol = 1e-14;
}

ExpSum::ExpSum(std::vector<Term> terms) : terms_(std::move(terms)) {
  for (const auto& t : terms_) {
    if (!std::isfinite(t.coeff) || !std::isfinite(t.rate))
      throw std::invalid_argument("ExpSum: non-finite term");
  }
}

ExpSum ExpSum::exponential(double rate, double coeff) {
  return ExpSum({{coeff, rate}});
}

ExpSum ExpSum::sinh_of(double b) {
  return ExpSum({{0.5, b}, {-0.5, -b}});
}

ExpSum ExpSum::constant(double c) {
  return ExpSum({{c, 0.0}});
}

ExpSum ExpSum::derivative() const {
  std::vector<Term> out;
  out.reserve(terms_.size());
  for (const auto& t : terms_) out.push_back({t.coeff * t.rate, t.rate});
  return ExpSum(std::move(out));
}

ExpSum ExpSum::squared() const {
  std::vector<Term> out;
  for (std::size_t i = 0; i < terms_.size(); ++i)
    for (std::size_t j = 0; j < terms_.size(); ++j) {
      const double rate = terms_[i].rate + terms_[j].rate;
      const double coeff = terms_[i].coeff * terms_[j].coeff;
      auto it = std::find_if(out.begin(), out.end(), [&](const Term& t) {
        return std::abs(t.rate - rate) < kZeroRateTol;
      });
      if (it != out.end())
        it->coeff += coeff;
      else
        out.push_back({coeff, rate});
    }
  return ExpSum(std::move(out));
}

ExpSum ExpSum::scaled(double factor) const {
  std::vector<Term> out = terms_;
  for (auto& t : out) t.coeff *= factor;
  return ExpSum(std::move(out));
}

ExpSum ExpSum::plus(const ExpSum& other) const {
  std::vector<Term> out = terms_;
  out.insert(out.end(), other.terms_.begin(), other.terms_.end());
  return ExpSum(std::move(out));
}

ExpSum ExpSum::antiderivative() const {
  std::vector<Term> out;
  out.reserve(terms_.size());
  for (const auto& t : terms_) {
    if (std::abs(t.rate) < kZeroRateTol) {
      if (std::abs(t.coeff) > 0.0)
        throw std::domain_error("ExpSum::antiderivative: zero-rate term has no exponential primitive");
      continue;
    }
    out.push_back({t.coeff / t.rate, t.rate});
  }
  return ExpSum(std::move(out));
}

double ExpSum::value(double x) const {
  double s = 0.0;
  for (const auto& t : terms_) s += t.coeff * std::exp(t.rate * x);
  return s;
}

double ExpSum::value_shifted(double x, double shift) const {
  double s = 0.0;
  for (const auto& t : terms_) s += t.coeff * std::exp((t.rate - shift) * x);
  return s;
}

double ExpSum::dominant_rate() const {
  double best = 0.0;
  bool found = false;
  for (const auto& t : terms_) {
    if (t.coeff == 0.0) continue;
    if (!found || t.rate > best) {
      best = t.rate;
      found = true;
    }
  }
  return found ? best : 0.0;
}

}  // namespace isophase
