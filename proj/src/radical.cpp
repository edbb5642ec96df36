#include "asymptotica/radical.hpp"

#include <ostream>
#include <sstream>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "asymptotica/exact_linalg.hpp"

namespace asymptotica {

Radical::Radical(Rational radicand, int degree, std::vector<Rational> coeffs)
    : radicand_(std::move(radicand)), degree_(degree), coeffs_(std::move(coeffs)) {
  if (degree_ < 1) throw std::invalid_argument("radical degree must be positive");
  if (degree_ > 1 && radicand_ <= 0) throw std::invalid_argument("radicand must be positive");
  if (coeffs_.size() > static_cast<std::size_t>(degree_)) {
    throw std::invalid_argument("too many radical coefficients");
  }
  coeffs_.resize(static_cast<std::size_t>(degree_), Rational(0));
  if (degree_ == 1) radicand_ = 0;
}

Radical Radical::root(const Rational& radicand, int degree) {
  std::vector<Rational> c(static_cast<std::size_t>(degree), Rational(0));
  if (degree == 1) {
    c[0] = radicand;
  } else {
    c[1] = 1;
  }
  return Radical(radicand, degree, std::move(c));
}

bool Radical::is_rational() const {
  for (std::size_t i = 1; i < coeffs_.size(); ++i) {
    if (coeffs_[i] != 0) return false;
  }
  return true;
}

bool Radical::is_zero() const {
  for (const auto& c : coeffs_) {
    if (c != 0) return false;
  }
  return true;
}

Radical Radical::lifted(const Rational& radicand, int degree) const {
  if (degree_ == degree && (degree == 1 || radicand_ == radicand)) return *this;
  if (degree_ != 1) throw std::domain_error("arithmetic between different radical fields");
  std::vector<Rational> c(static_cast<std::size_t>(degree), Rational(0));
  c[0] = coeffs_[0];
  return Radical(radicand, degree, std::move(c));
}

void Radical::unify(Radical& a, Radical& b) {
  if (a.degree_ == b.degree_ && a.radicand_ == b.radicand_) return;
  if (a.degree_ == 1) {
    a = a.lifted(b.radicand_, b.degree_);
  } else {
    b = b.lifted(a.radicand_, a.degree_);
  }
}

Radical& Radical::operator+=(const Radical& rhs) {
  Radical r = rhs;
  unify(*this, r);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += r.coeffs_[i];
  return *this;
}

Radical& Radical::operator-=(const Radical& rhs) {
  Radical r = rhs;
  unify(*this, r);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= r.coeffs_[i];
  return *this;
}

Radical& Radical::operator*=(const Radical& rhs) {
  Radical r = rhs;
  unify(*this, r);
  const std::size_t d = coeffs_.size();
  std::vector<Rational> out(d, Rational(0));
  for (std::size_t i = 0; i < d; ++i) {
    if (coeffs_[i] == 0) continue;
    for (std::size_t j = 0; j < d; ++j) {
      if (r.coeffs_[j] == 0) continue;
      const Rational term = coeffs_[i] * r.coeffs_[j];
      if (i + j < d) {
        out[i + j] += term;
      } else {
        out[i + j - d] += term * radicand_;
      }
    }
  }
  coeffs_ = std::move(out);
  return *this;
}

Radical& Radical::operator/=(const Radical& rhs) {
  Radical r = rhs;
  unify(*this, r);
  if (r.is_zero()) throw std::domain_error("division by zero");
  if (degree_ == 1) {
    coeffs_[0] /= r.coeffs_[0];
    return *this;
  }
  // solve r * y = this for y through the multiplication matrix of r
  const Index d = degree_;
  RationalMatrix m(d, d);
  for (Index j = 0; j < d; ++j) {
    std::vector<Rational> e(static_cast<std::size_t>(d), Rational(0));
    e[static_cast<std::size_t>(j)] = 1;
    Radical col = r * Radical(radicand_, degree_, std::move(e));
    for (Index i = 0; i < d; ++i) m(i, j) = col.coeffs_[static_cast<std::size_t>(i)];
  }
  RationalVector b(d);
  for (Index i = 0; i < d; ++i) b(i) = coeffs_[static_cast<std::size_t>(i)];
  if (exact_rank<Rational>(m) < d) throw std::domain_error("zero divisor in radical field");
  const auto y = exact_solve<Rational>(m, b);
  for (Index i = 0; i < d; ++i) coeffs_[static_cast<std::size_t>(i)] = (*y)(i);
  return *this;
}

Radical operator-(Radical a) {
  for (auto& c : a.coeffs_) c = -c;
  return a;
}

bool operator==(const Radical& a, const Radical& b) {
  Radical x = a;
  Radical y = b;
  Radical::unify(x, y);
  return x.coeffs_ == y.coeffs_;
}

double Radical::to_double() const {
  using Big = boost::multiprecision::cpp_bin_float_100;
  if (degree_ == 1) return coeffs_[0].convert_to<double>();
  auto big = [](const Rational& q) {
    return Big(numerator(q).str()) / Big(denominator(q).str());
  };
  const Big alpha = boost::multiprecision::pow(big(radicand_), Big(1) / degree_);
  Big acc = 0;
  Big power = 1;
  for (const auto& c : coeffs_) {
    acc += big(c) * power;
    power *= alpha;
  }
  return acc.convert_to<double>();
}

std::string Radical::str() const {
  std::ostringstream os;
  bool first = true;
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    if (coeffs_[i] == 0) continue;
    if (!first) os << " + ";
    first = false;
    if (i == 0) {
      os << coeffs_[i].str();
      continue;
    }
    if (coeffs_[i] == -1) os << '-';
    else if (coeffs_[i] != 1) os << coeffs_[i].str() << '*';
    os << radicand_.str() << "^(" << Rational(static_cast<long>(i), degree_).str() << ')';
  }
  if (first) return "0";
  return os.str();
}

std::ostream& operator<<(std::ostream& os, const Radical& r) { return os << r.str(); }

}  // namespace asymptotica
