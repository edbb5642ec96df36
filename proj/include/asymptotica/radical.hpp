#pragma once

// Exact arithmetic in the number field Q(alpha), alpha = c^(1/d).
//
// An element is stored as coefficients of 1, alpha, ..., alpha^(d-1) with
// alpha^d = c. Plain rationals carry d = 1 and are lifted on contact with a
// proper radical. Division assumes x^d - c is irreducible over Q (true for
// the roots that appear in practice, e.g. 2^(1/4)); a zero divisor throws.

#include <iosfwd>
#include <string>
#include <vector>

#include "asymptotica/core.hpp"

namespace asymptotica {

class Radical {
 public:
  Radical() : coeffs_{Rational(0)} {}
  Radical(int value) : coeffs_{Rational(value)} {}  // NOLINT: implicit like a number
  Radical(long value) : coeffs_{Rational(value)} {}  // NOLINT
  Radical(const Rational& value) : coeffs_{value} {}  // NOLINT
  Radical(Rational radicand, int degree, std::vector<Rational> coeffs);

  /// alpha = radicand^(1/degree) itself.
  static Radical root(const Rational& radicand, int degree);

  const Rational& radicand() const { return radicand_; }
  int degree() const { return degree_; }
  const std::vector<Rational>& coeffs() const { return coeffs_; }

  bool is_rational() const;
  bool is_zero() const;

  Radical& operator+=(const Radical& rhs);
  Radical& operator-=(const Radical& rhs);
  Radical& operator*=(const Radical& rhs);
  Radical& operator/=(const Radical& rhs);

  friend Radical operator+(Radical a, const Radical& b) { return a += b; }
  friend Radical operator-(Radical a, const Radical& b) { return a -= b; }
  friend Radical operator*(Radical a, const Radical& b) { return a *= b; }
  friend Radical operator/(Radical a, const Radical& b) { return a /= b; }
  friend Radical operator-(Radical a);

  friend bool operator==(const Radical& a, const Radical& b);
  friend bool operator!=(const Radical& a, const Radical& b) { return !(a == b); }

  /// Value to double via a 100-digit intermediate, so tiny residuals that are
  /// differences of O(1) coefficients still come out with full relative accuracy.
  double to_double() const;

  /// e.g. "-1/8", "-5/256*2^(3/4)", "1 + 3*2^(1/4)".
  std::string str() const;

 private:
  Radical lifted(const Rational& radicand, int degree) const;
  static void unify(Radical& a, Radical& b);

  Rational radicand_ = 0;
  int degree_ = 1;
  std::vector<Rational> coeffs_;
};

std::ostream& operator<<(std::ostream& os, const Radical& r);

}  // namespace asymptotica

namespace Eigen {

template <>
struct NumTraits<asymptotica::Radical> : GenericNumTraits<asymptotica::Radical> {
  typedef asymptotica::Radical Real;
  typedef asymptotica::Radical NonInteger;
  typedef asymptotica::Radical Nested;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 10,
    AddCost = 40,
    MulCost = 200
  };
};

}  // namespace Eigen
