#pragma once

#include <gmpxx.h>

#include <cmath>
#include <optional>
#include <stdexcept>
#include <type_traits>

namespace g2 {

using Rational = mpq_class;

template <class S>
inline constexpr bool is_exact_v = std::is_same_v<S, Rational>;

template <class S>
concept ScalarKind = std::is_same_v<S, double> || std::is_same_v<S, Rational>;

inline double to_double(double x) { return x; }
inline double to_double(const Rational& q) { return q.get_d(); }

template <ScalarKind S>
S make_scalar(long num, long den = 1) {
  if constexpr (is_exact_v<S>) {
    Rational q(num, den);
    q.canonicalize();
    return q;
  } else {
    return static_cast<double>(num) / static_cast<double>(den);
  }
}

inline bool is_zero(double x) { return x == 0.0; }
inline bool is_zero(const Rational& q) { return sgn(q) == 0; }

inline double abs_value(double x) { return std::fabs(x); }
inline Rational abs_value(const Rational& q) { return abs(q); }

// Exact n-th root of a rational if it is a perfect power.
inline std::optional<Rational> exact_root(const Rational& q, unsigned n) {
  if (sgn(q) < 0 && n % 2 == 0) return std::nullopt;
  mpz_class num = q.get_num(), den = q.get_den();
  bool neg = sgn(num) < 0;
  if (neg) num = -num;
  mpz_class rn, rd;
  if (mpz_root(rn.get_mpz_t(), num.get_mpz_t(), n) == 0) return std::nullopt;
  if (mpz_root(rd.get_mpz_t(), den.get_mpz_t(), n) == 0) return std::nullopt;
  Rational r(neg ? mpz_class(-rn) : rn, rd);
  r.canonicalize();
  return r;
}

// Real n-th root (odd n allows negative input). Exact kind throws when the
// root is irrational.
inline double real_root(double x, unsigned n) {
  if (n == 2) return std::sqrt(x);
  if (x < 0 && n % 2 == 1) return -std::pow(-x, 1.0 / n);
  return std::pow(x, 1.0 / n);
}

inline Rational real_root(const Rational& q, unsigned n) {
  auto r = exact_root(q, n);
  if (!r) throw std::domain_error("root is not rational");
  return *r;
}

}  // namespace g2
