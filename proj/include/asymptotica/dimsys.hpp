#pragma once

// Buckingham-Pi engine over exact rationals.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "asymptotica/core.hpp"

namespace asymptotica::dimsys {

/// Ordered list of base-quantity symbols, e.g. (L, T, M).
class BaseSystem {
 public:
  BaseSystem() = default;
  explicit BaseSystem(std::vector<std::string> names);

  Index size() const { return static_cast<Index>(names_.size()); }
  const std::vector<std::string>& names() const { return names_; }
  std::optional<Index> index_of(std::string_view symbol) const;

  friend bool operator==(const BaseSystem&, const BaseSystem&) = default;

 private:
  std::vector<std::string> names_;
};

/// Exponent vector of one physical quantity with respect to a base system.
struct DimensionVector {
  BaseSystem base;
  RationalVector exponents;

  DimensionVector(BaseSystem base_system, RationalVector exps);
  static DimensionVector dimensionless(const BaseSystem& base_system);
};

struct Quantity {
  std::string name;
  DimensionVector dimension;
};

class QuantitySet {
 public:
  QuantitySet() = default;
  explicit QuantitySet(BaseSystem base) : base_(std::move(base)) {}

  /// Throws std::invalid_argument on a duplicate name or when the dimension
  /// was expressed over a different base system.
  void add(std::string name, DimensionVector dimension);

  const BaseSystem& base() const { return base_; }
  const std::vector<Quantity>& quantities() const { return quantities_; }
  Index size() const { return static_cast<Index>(quantities_.size()); }
  std::optional<Index> index_of(std::string_view name) const;

 private:
  BaseSystem base_;
  std::vector<Quantity> quantities_;
};

/// Exponents x_j of a dimensionless monomial  prod_j Q_j^{x_j}.
struct PiGroup {
  RationalVector exponents;
};

/// k x n matrix whose column j holds the dimension exponents of quantity j.
RationalMatrix dimension_matrix(const QuantitySet& qs);

/// Canonical kernel basis: pivots in column order, one vector per free column
/// (leftmost first), each scaled to coprime integers with a positive leading
/// entry.
std::vector<RationalVector> rational_nullspace(const RationalMatrix& m);

Index rational_rank(const RationalMatrix& m);

std::vector<PiGroup> pi_groups(const QuantitySet& qs);

bool is_dimensionless(const QuantitySet& qs, const RationalVector& x);

/// Coefficients c with  sum_i c_i basis_i = target, if target lies in the
/// exact rational span of the basis.
std::optional<RationalVector> span_coefficients(const std::vector<RationalVector>& basis,
                                                const RationalVector& target);

/// Parses the fixture format
///
///     # comment
///     base: L T M          (optional; otherwise symbols in order of appearance)
///     t: T
///     g: L T^-2
///     A: M^1/2 L^2 T^3
///     theta:               (pure number)
QuantitySet parse_quantity_set(std::string_view text);

/// Exponent vector for a monomial written over the quantity names of `qs`,
/// e.g. "t^2 s^-1 g".
RationalVector parse_monomial(const QuantitySet& qs, std::string_view text);

/// Human-readable monomial, e.g. "t^2 s^-1 g".
std::string format_monomial(const QuantitySet& qs, const RationalVector& x);

}  // namespace asymptotica::dimsys
