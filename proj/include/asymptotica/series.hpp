#pragma once

// Truncated power series in a small parameter, polynomial families with
// series coefficients, and the regular / singular root expansions built on
// them.

#include <cmath>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "asymptotica/core.hpp"
#include "asymptotica/radical.hpp"

namespace asymptotica {

// ---------------------------------------------------------------------------
// scalar helpers shared by the exact and floating code paths

template <typename Scalar>
inline constexpr bool is_exact_scalar_v =
    std::is_same_v<Scalar, Rational> || std::is_same_v<Scalar, Radical>;

inline Complex to_complex(const Rational& x) { return {x.convert_to<double>(), 0.0}; }
inline Complex to_complex(const Radical& x) { return {x.to_double(), 0.0}; }
inline Complex to_complex(double x) { return {x, 0.0}; }
inline Complex to_complex(const Complex& x) { return x; }

template <typename Scalar>
bool exactly_zero(const Scalar& x) {
  if constexpr (std::is_same_v<Scalar, Radical>) {
    return x.is_zero();
  } else {
    return x == Scalar(0);
  }
}

/// Lossless where possible: Rational -> Radical / Rational; anything -> Complex.
template <typename To, typename From>
To scalar_cast(const From& x) {
  if constexpr (std::is_same_v<To, From>) {
    return x;
  } else if constexpr (std::is_same_v<To, Complex>) {
    return to_complex(x);
  } else if constexpr (std::is_same_v<To, double>) {
    return to_complex(x).real();
  } else {
    return To(x);
  }
}

// ---------------------------------------------------------------------------

template <typename Scalar>
class PerturbationSeries {
 public:
  using Coefficients = Vector<Scalar>;

  PerturbationSeries() : PerturbationSeries(Index{0}) {}
  explicit PerturbationSeries(Index order) : c_(Coefficients::Constant(order + 1, Scalar(0))) {
    if (order < 0) throw std::invalid_argument("series order must be nonnegative");
  }
  explicit PerturbationSeries(Coefficients c) : c_(std::move(c)) {
    if (c_.size() == 0) throw std::invalid_argument("series needs at least one coefficient");
  }

  static PerturbationSeries constant(const Scalar& value, Index order) {
    PerturbationSeries s(order);
    s.c_(0) = value;
    return s;
  }
  /// The series of the small parameter itself.
  static PerturbationSeries parameter(Index order) {
    PerturbationSeries s(order);
    if (order >= 1) s.c_(1) = Scalar(1);
    return s;
  }

  Index order() const { return c_.size() - 1; }
  const Coefficients& coefficients() const { return c_; }
  const Scalar& operator[](Index n) const { return c_(n); }
  Scalar& operator[](Index n) { return c_(n); }

  Scalar evaluate(const Scalar& eps) const {
    Scalar acc = c_(order());
    for (Index n = order() - 1; n >= 0; --n) acc = acc * eps + c_(n);
    return acc;
  }

  PerturbationSeries truncated(Index order) const {
    PerturbationSeries s(order);
    for (Index n = 0; n <= std::min(order, this->order()); ++n) s.c_(n) = c_(n);
    return s;
  }

  PerturbationSeries& operator+=(const PerturbationSeries& rhs) {
    check_order(rhs);
    for (Index n = 0; n <= order(); ++n) c_(n) = c_(n) + rhs.c_(n);
    return *this;
  }
  PerturbationSeries& operator-=(const PerturbationSeries& rhs) {
    check_order(rhs);
    for (Index n = 0; n <= order(); ++n) c_(n) = c_(n) - rhs.c_(n);
    return *this;
  }
  PerturbationSeries& operator*=(const Scalar& s) {
    for (Index n = 0; n <= order(); ++n) c_(n) = c_(n) * s;
    return *this;
  }

  friend PerturbationSeries operator+(PerturbationSeries a, const PerturbationSeries& b) { return a += b; }
  friend PerturbationSeries operator-(PerturbationSeries a, const PerturbationSeries& b) { return a -= b; }
  friend PerturbationSeries operator-(PerturbationSeries a) { return a *= Scalar(-1); }
  friend PerturbationSeries operator*(PerturbationSeries a, const Scalar& s) { return a *= s; }
  friend PerturbationSeries operator*(const Scalar& s, PerturbationSeries a) { return a *= s; }

  /// Cauchy product truncated at the common order.
  friend PerturbationSeries operator*(const PerturbationSeries& a, const PerturbationSeries& b) {
    a.check_order(b);
    PerturbationSeries out(a.order());
    for (Index n = 0; n <= a.order(); ++n) {
      if (exactly_zero(a.c_(n))) continue;
      for (Index m = 0; n + m <= a.order(); ++m) out.c_(n + m) = out.c_(n + m) + a.c_(n) * b.c_(m);
    }
    return out;
  }

  friend bool operator==(const PerturbationSeries& a, const PerturbationSeries& b) {
    return a.c_.size() == b.c_.size() && a.c_ == b.c_;
  }

 private:
  void check_order(const PerturbationSeries& rhs) const {
    if (rhs.order() != order()) throw std::invalid_argument("series truncation orders differ");
  }

  Coefficients c_;
};

template <typename Scalar>
PerturbationSeries<Scalar> pow(const PerturbationSeries<Scalar>& a, int n) {
  if (n < 0) throw std::invalid_argument("series power must be nonnegative");
  auto result = PerturbationSeries<Scalar>::constant(Scalar(1), a.order());
  auto base = a;
  while (n > 0) {
    if (n & 1) result = result * base;
    n >>= 1;
    if (n > 0) base = base * base;
  }
  return result;
}

// ---------------------------------------------------------------------------

/// p(x; eta) = sum_j c_j(eta) x^j, where each c_j is an exact polynomial in the
/// family parameter eta = eps^(1/root). root = 1 for families as written;
/// rescale_singular produces root > 1 for fractional scale exponents.
template <typename Scalar>
class PolyFamily {
 public:
  using Poly = Vector<Scalar>;

  explicit PolyFamily(std::vector<Poly> x_coeffs, long root = 1) : c_(std::move(x_coeffs)), root_(root) {
    if (root_ < 1) throw std::invalid_argument("parameter root must be positive");
    for (auto& p : c_) {
      if (p.size() == 0) p = Poly::Constant(1, Scalar(0));
    }
    while (!c_.empty() && identically_zero(c_.back())) c_.pop_back();
    if (c_.empty()) throw std::invalid_argument("polynomial family is identically zero");
  }

  int degree() const { return static_cast<int>(c_.size()) - 1; }
  long root() const { return root_; }
  const Poly& coefficient(int j) const { return c_.at(static_cast<std::size_t>(j)); }
  const std::vector<Poly>& coefficients() const { return c_; }

  /// Coefficient of eta^n in c_j.
  Scalar coefficient(int j, Index n) const {
    const Poly& p = coefficient(j);
    return n < p.size() ? p(n) : Scalar(0);
  }

  PerturbationSeries<Scalar> coefficient_series(int j, Index order) const {
    PerturbationSeries<Scalar> s(order);
    for (Index n = 0; n <= order; ++n) s[n] = coefficient(j, n);
    return s;
  }

  /// p(x(eta); eta) truncated at x's order.
  PerturbationSeries<Scalar> evaluate(const PerturbationSeries<Scalar>& x) const {
    const Index order = x.order();
    auto acc = coefficient_series(degree(), order);
    for (int j = degree() - 1; j >= 0; --j) acc = acc * x + coefficient_series(j, order);
    return acc;
  }

  Scalar evaluate(const Scalar& x, const Scalar& eta) const {
    auto poly = [&](int j) {
      const Poly& p = coefficient(j);
      Scalar acc = p(p.size() - 1);
      for (Index n = p.size() - 2; n >= 0; --n) acc = acc * eta + p(n);
      return acc;
    };
    Scalar acc = poly(degree());
    for (int j = degree() - 1; j >= 0; --j) acc = acc * x + poly(j);
    return acc;
  }

  /// p(x; 0) and d/dx p(x; 0).
  Scalar unperturbed(const Scalar& x) const {
    Scalar acc = coefficient(degree(), 0);
    for (int j = degree() - 1; j >= 0; --j) acc = acc * x + coefficient(j, 0);
    return acc;
  }
  Scalar unperturbed_derivative(const Scalar& x) const {
    if (degree() == 0) return Scalar(0);
    Scalar acc = coefficient(degree(), 0) * Scalar(degree());
    for (int j = degree() - 1; j >= 1; --j) acc = acc * x + coefficient(j, 0) * Scalar(j);
    return acc;
  }

  template <typename To>
  PolyFamily<To> cast() const {
    std::vector<Vector<To>> out;
    for (const auto& p : c_) {
      Vector<To> q(p.size());
      for (Index n = 0; n < p.size(); ++n) q(n) = scalar_cast<To>(p(n));
      out.push_back(std::move(q));
    }
    return PolyFamily<To>(std::move(out), root_);
  }

 private:
  static bool identically_zero(const Poly& p) {
    for (Index n = 0; n < p.size(); ++n) {
      if (!exactly_zero(p(n))) return false;
    }
    return true;
  }

  std::vector<Poly> c_;
  long root_;
};

namespace detail {

template <typename Scalar>
double magnitude(const Scalar& x) {
  return std::abs(to_complex(x));
}

}  // namespace detail

/// Regular expansion x(eta) = a0 + a1 eta + ... + aN eta^N of the root that
/// continues the simple root a0 of p(x; 0). Each order is obtained from the
/// eta^n coefficient r_n of p(x_{n-1}(eta); eta) as a_n = -r_n / p'(a0).
template <typename Scalar>
PerturbationSeries<Scalar> expand_root(const PolyFamily<Scalar>& p, const Scalar& a0, Index order) {
  if (order < 0) throw std::invalid_argument("expansion order must be nonnegative");
  const Scalar p0 = p.unperturbed(a0);
  const Scalar dp = p.unperturbed_derivative(a0);
  const int d = p.degree();

  if constexpr (is_exact_scalar_v<Scalar>) {
    if (!exactly_zero(p0)) throw std::invalid_argument("a0 is not a root of the unperturbed polynomial");
  } else {
    double scale = 0.0;
    for (int j = 0; j <= d; ++j) {
      scale += detail::magnitude(p.coefficient(j, 0)) * std::pow(detail::magnitude(a0), j);
    }
    if (detail::magnitude(p0) > 1e-10 * (1.0 + scale)) {
      throw std::invalid_argument("a0 is not a root of the unperturbed polynomial");
    }
  }

  bool degenerate;
  if constexpr (is_exact_scalar_v<Scalar>) {
    degenerate = exactly_zero(dp);
  } else {
    degenerate = !(detail::magnitude(dp) > 1e-12 * std::pow(1.0 + detail::magnitude(a0), d - 1));
  }
  if (degenerate) {
    throw std::domain_error(
        "a0 is not a simple root (p'(a0) vanishes); the regular expansion does not exist. "
        "Rescale with rescale_singular and expand the rescaled family instead");
  }

  auto x = PerturbationSeries<Scalar>::constant(a0, order);
  for (Index n = 1; n <= order; ++n) {
    const Scalar r = p.evaluate(x)[n];
    x[n] = -(r / dp);
  }
  return x;
}

/// Substitutes x = eta^(-e) y with e = a/q and multiplies through by the power
/// of the new parameter delta = eta^(1/q) that makes the lowest exponent zero.
template <typename Scalar>
PolyFamily<Scalar> rescale_singular(const PolyFamily<Scalar>& p, const Rational& exponent) {
  const Integer a_big = numerator(exponent);
  const Integer q_big = denominator(exponent);
  if (q_big > 1000000 || abs(a_big) > 1000000) throw std::invalid_argument("scale exponent too large");
  const long a = a_big.convert_to<long>();
  const long q = q_big.convert_to<long>();

  // exponent of delta carried by eta^n x^j after substitution: q n - a j
  long lowest = 0;
  bool any = false;
  for (int j = 0; j <= p.degree(); ++j) {
    const auto& c = p.coefficient(j);
    for (Index n = 0; n < c.size(); ++n) {
      if (exactly_zero(c(n))) continue;
      const long e = q * static_cast<long>(n) - a * j;
      if (!any || e < lowest) lowest = e;
      any = true;
    }
  }

  std::vector<Vector<Scalar>> out;
  for (int j = 0; j <= p.degree(); ++j) {
    const auto& c = p.coefficient(j);
    long top = 0;
    for (Index n = 0; n < c.size(); ++n) {
      if (!exactly_zero(c(n))) top = std::max(top, q * static_cast<long>(n) - a * j - lowest);
    }
    Vector<Scalar> r = Vector<Scalar>::Constant(top + 1, Scalar(0));
    for (Index n = 0; n < c.size(); ++n) {
      if (exactly_zero(c(n))) continue;
      r(q * static_cast<long>(n) - a * j - lowest) = c(n);
    }
    out.push_back(std::move(r));
  }
  return PolyFamily<Scalar>(std::move(out), p.root() * q);
}

/// x(eps) = sum_n s_n eps^(leading + n/root).
template <typename Scalar>
struct LaurentSeries {
  Rational leading_power;
  long root = 1;
  PerturbationSeries<Scalar> series;

  Complex evaluate(double eps) const {
    const double delta = std::pow(eps, 1.0 / static_cast<double>(root));
    Complex acc = to_complex(series[series.order()]);
    for (Index n = series.order() - 1; n >= 0; --n) acc = acc * delta + to_complex(series[n]);
    return acc * std::pow(eps, leading_power.convert_to<double>());
  }
};

/// Undoes x = eps^(-e) y for a root y(delta) of a rescaled family.
template <typename Scalar>
LaurentSeries<Scalar> unscale(const PerturbationSeries<Scalar>& y, const Rational& exponent, long root) {
  return {Rational(-exponent), root, y};
}

// ---------------------------------------------------------------------------

/// Euler's integral  f(eps) = int_0^inf e^{-t} / (1 + eps t) dt, by adaptive
/// Gauss-Kronrod on [0, T] with e^{-T} = quad_tol / 10 bounding the tail.
/// Real may be a Boost.Multiprecision float when quad_tol is below double
/// resolution.
template <typename Real>
Real euler_f(const Real& eps, const Real& quad_tol) {
  using std::exp;
  using std::log;
  if (!(eps > 0)) throw std::domain_error("euler_f requires eps > 0");
  if (!(quad_tol > 0)) throw std::invalid_argument("euler_f requires quad_tol > 0");
  const Real upper = log(Real(10) / quad_tol);
  auto integrand = [&eps](const Real& t) -> Real { return exp(-t) / (1 + eps * t); };
  return boost::math::quadrature::gauss_kronrod<Real, 15>::integrate(integrand, Real(0), upper, 40,
                                                                       quad_tol);
}

inline double euler_f(double eps, double quad_tol = 1e-12) { return euler_f<double>(eps, quad_tol); }

/// S_m(eps) = sum_{n=0}^m (-1)^n n! eps^n.
template <typename Real>
Real euler_partial_sum(const Real& eps, int m) {
  if (m < 0) throw std::invalid_argument("euler_partial_sum requires m >= 0");
  Real term = 1;
  Real sum = 1;
  for (int n = 1; n <= m; ++n) {
    term *= -n * eps;
    sum += term;
  }
  return sum;
}

inline double euler_partial_sum(double eps, int m) { return euler_partial_sum<double>(eps, m); }

}  // namespace asymptotica
