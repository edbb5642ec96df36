#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/eigen.hpp>

namespace asymptotica {

using Rational = boost::multiprecision::mpq_rational;
using Integer = boost::multiprecision::mpz_int;
using Complex = std::complex<double>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using RationalMatrix = Matrix<Rational>;
using RationalVector = Vector<Rational>;

using Eigen::Index;

/// Raised when a numerical procedure (integrator, Newton iteration, shooting)
/// cannot deliver a result within its contract.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses `p`, `-p`, `p/q` into an exact rational.
Rational parse_rational(const std::string& text);

std::string to_string(const Rational& value);

}  // namespace asymptotica
