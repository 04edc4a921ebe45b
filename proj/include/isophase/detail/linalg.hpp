// Minimal dense LU with partial pivoting, sized for the tiny systems this
// library needs (N <= 13 Wronskian matrices, 2n <= 10 fit normal equations).
// Templated on the scalar so the psi-bordered determinants can run in
// complex arithmetic; accumulation in long double costs nothing here and
// buys three digits where the scaled determinants cancel near the origin.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <type_traits>
#include <vector>

namespace isophase::detail {

template <typename T>
double abs_of(const T& v) {
  if constexpr (std::is_floating_point_v<T>)
    return static_cast<double>(v < T(0) ? -v : v);
  else
    return static_cast<double>(std::abs(v));
}

template <typename T>
class SmallLU {
 public:
  SmallLU(std::vector<T> a, std::size_t n) : a_(std::move(a)), n_(n), piv_(n) {
    perm_sign_ = 1;
    for (std::size_t col = 0; col < n_; ++col) {
      std::size_t p = col;
      double best = abs_of(at(col, col));
      for (std::size_t r = col + 1; r < n_; ++r) {
        const double v = abs_of(at(r, col));
        if (v > best) {
          best = v;
          p = r;
        }
      }
      piv_[col] = p;
      if (p != col) {
        for (std::size_t c = 0; c < n_; ++c) std::swap(at(p, c), at(col, c));
        perm_sign_ = -perm_sign_;
      }
      const T d = at(col, col);
      if (abs_of(d) == 0.0) {
        exactly_singular_ = true;
        return;
      }
      for (std::size_t r = col + 1; r < n_; ++r) {
        const T m = at(r, col) / d;
        at(r, col) = m;
        for (std::size_t c = col + 1; c < n_; ++c) at(r, c) -= m * at(col, c);
      }
    }
  }

  bool exactly_singular() const { return exactly_singular_; }

  // det = mantissa * exp(log_scale), mantissa renormalized to order one.
  void det(T& mantissa, double& log_scale) const {
    mantissa = T(perm_sign_);
    log_scale = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      mantissa *= at(i, i);
      const double m = abs_of(mantissa);
      if (m > 0.0 && (m > 1e100 || m < 1e-100)) {
        log_scale += std::log(m);
        mantissa /= T(m);
      }
    }
  }

  // Smallest and largest |pivot|, the scale-free singularity measure.
  void pivot_range(double& pmin, double& pmax) const {
    pmin = pmax = abs_of(at(0, 0));
    for (std::size_t i = 1; i < n_; ++i) {
      const double v = abs_of(at(i, i));
      pmin = std::min(pmin, v);
      pmax = std::max(pmax, v);
    }
  }

  // Solve A x = b in place.
  void solve(std::vector<T>& b) const {
    for (std::size_t i = 0; i < n_; ++i) std::swap(b[i], b[piv_[i]]);
    for (std::size_t i = 1; i < n_; ++i)
      for (std::size_t j = 0; j < i; ++j) b[i] -= at(i, j) * b[j];
    for (std::size_t ii = n_; ii-- > 0;) {
      for (std::size_t j = ii + 1; j < n_; ++j) b[ii] -= at(ii, j) * b[j];
      b[ii] /= at(ii, ii);
    }
  }

 private:
  T& at(std::size_t r, std::size_t c) { return a_[r * n_ + c]; }
  const T& at(std::size_t r, std::size_t c) const { return a_[r * n_ + c]; }

  std::vector<T> a_;
  std::size_t n_;
  std::vector<std::size_t> piv_;
  int perm_sign_ = 1;
  bool exactly_singular_ = false;
};

// Determinant as (sign, log|det|).  The relative-zero test compares the
// smallest against the largest pivot magnitude: a genuine node drives one
// pivot through zero while the rest stay at the matrix scale, whereas the
// structurally tiny (but well-conditioned) determinants near the origin
// keep all pivot ratios far above det_rel_tol.
struct LogDet {
  int sign = 0;  // 0 marks an exact or relative zero
  double log_abs = 0.0;
};

inline LogDet log_det(std::vector<long double> a, std::size_t n, double rel_tol) {
  SmallLU<long double> lu(std::move(a), n);
  if (lu.exactly_singular()) return {};
  double pmin, pmax;
  lu.pivot_range(pmin, pmax);
  if (pmin <= rel_tol * pmax) return {};
  long double mant;
  double log_scale;
  lu.det(mant, log_scale);
  LogDet out;
  out.log_abs = log_scale + std::log(abs_of(mant));
  out.sign = mant > 0.0L ? 1 : -1;
  return out;
}

}  // namespace isophase::detail
