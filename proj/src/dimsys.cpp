#include "asymptotica/dimsys.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "asymptotica/exact_linalg.hpp"

namespace asymptotica::dimsys {

namespace {

std::string trim(std::string_view s) {
  auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) return {};
  auto end = s.find_last_not_of(" \t\r");
  return std::string(s.substr(begin, end - begin + 1));
}

std::vector<std::string> split_factors(std::string_view s) {
  std::vector<std::string> out;
  std::string current;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == '*') {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

// "g^-1/2" -> ("g", -1/2); "(1/2)" style exponents are accepted too.
std::pair<std::string, Rational> parse_factor(const std::string& token) {
  const auto caret = token.find('^');
  if (caret == std::string::npos) return {token, Rational(1)};
  std::string symbol = token.substr(0, caret);
  std::string exponent = token.substr(caret + 1);
  if (exponent.size() >= 2 && exponent.front() == '(' && exponent.back() == ')') {
    exponent = exponent.substr(1, exponent.size() - 2);
  }
  if (symbol.empty()) throw std::invalid_argument("missing symbol in '" + token + "'");
  return {std::move(symbol), parse_rational(exponent)};
}

RationalVector canonicalize(RationalVector v) {
  Integer den_lcm = 1;
  for (Index i = 0; i < v.size(); ++i) den_lcm = boost::multiprecision::lcm(den_lcm, denominator(v(i)));
  Integer num_gcd = 0;
  for (Index i = 0; i < v.size(); ++i) {
    v(i) *= den_lcm;
    num_gcd = boost::multiprecision::gcd(num_gcd, numerator(v(i)));
  }
  if (num_gcd == 0) return v;
  Rational scale(1, num_gcd);
  for (Index i = 0; i < v.size(); ++i) {
    if (v(i) != 0) {
      if (v(i) < 0) scale = -scale;
      break;
    }
  }
  for (Index i = 0; i < v.size(); ++i) v(i) *= scale;
  return v;
}

}  // namespace

BaseSystem::BaseSystem(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.empty()) throw std::invalid_argument("base system needs at least one symbol");
  std::set<std::string> seen;
  for (const auto& n : names_) {
    if (n.empty()) throw std::invalid_argument("empty base-quantity symbol");
    if (!seen.insert(n).second) throw std::invalid_argument("duplicate base-quantity symbol '" + n + "'");
  }
}

std::optional<Index> BaseSystem::index_of(std::string_view symbol) const {
  auto it = std::find(names_.begin(), names_.end(), symbol);
  if (it == names_.end()) return std::nullopt;
  return static_cast<Index>(it - names_.begin());
}

DimensionVector::DimensionVector(BaseSystem base_system, RationalVector exps)
    : base(std::move(base_system)), exponents(std::move(exps)) {
  if (exponents.size() != base.size()) {
    throw std::invalid_argument("dimension vector length does not match its base system");
  }
}

DimensionVector DimensionVector::dimensionless(const BaseSystem& base_system) {
  return {base_system, RationalVector::Constant(base_system.size(), Rational(0))};
}

void QuantitySet::add(std::string name, DimensionVector dimension) {
  if (name.empty()) throw std::invalid_argument("quantity name is empty");
  if (index_of(name)) throw std::invalid_argument("duplicate quantity '" + name + "'");
  if (!(dimension.base == base_)) {
    throw std::invalid_argument("quantity '" + name + "' uses a different base system");
  }
  quantities_.push_back({std::move(name), std::move(dimension)});
}

std::optional<Index> QuantitySet::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < quantities_.size(); ++i) {
    if (quantities_[i].name == name) return static_cast<Index>(i);
  }
  return std::nullopt;
}

RationalMatrix dimension_matrix(const QuantitySet& qs) {
  if (qs.size() == 0) throw std::invalid_argument("dimension_matrix: empty quantity set");
  RationalMatrix m(qs.base().size(), qs.size());
  for (Index j = 0; j < qs.size(); ++j) {
    const auto& dim = qs.quantities()[static_cast<std::size_t>(j)].dimension;
    if (!(dim.base == qs.base())) {
      throw std::invalid_argument("dimension_matrix: mismatched base systems");
    }
    m.col(j) = dim.exponents;
  }
  return m;
}

std::vector<RationalVector> rational_nullspace(const RationalMatrix& m) {
  auto basis = exact_nullspace<Rational>(m);
  for (auto& v : basis) v = canonicalize(std::move(v));
  return basis;
}

Index rational_rank(const RationalMatrix& m) { return exact_rank<Rational>(m); }

std::vector<PiGroup> pi_groups(const QuantitySet& qs) {
  std::vector<PiGroup> groups;
  for (auto& v : rational_nullspace(dimension_matrix(qs))) groups.push_back({std::move(v)});
  return groups;
}

bool is_dimensionless(const QuantitySet& qs, const RationalVector& x) {
  if (x.size() != qs.size()) throw std::invalid_argument("is_dimensionless: length mismatch");
  const RationalMatrix m = dimension_matrix(qs);
  for (Index s = 0; s < m.rows(); ++s) {
    Rational acc = 0;
    for (Index j = 0; j < m.cols(); ++j) acc += m(s, j) * x(j);
    if (acc != 0) return false;
  }
  return true;
}

std::optional<RationalVector> span_coefficients(const std::vector<RationalVector>& basis,
                                                const RationalVector& target) {
  if (basis.empty()) {
    for (Index i = 0; i < target.size(); ++i) {
      if (target(i) != 0) return std::nullopt;
    }
    return RationalVector(0);
  }
  RationalMatrix a(target.size(), static_cast<Index>(basis.size()));
  for (std::size_t j = 0; j < basis.size(); ++j) a.col(static_cast<Index>(j)) = basis[j];
  return exact_solve<Rational>(a, target);
}

QuantitySet parse_quantity_set(std::string_view text) {
  std::optional<std::vector<std::string>> declared_base;
  std::vector<std::pair<std::string, std::vector<std::pair<std::string, Rational>>>> entries;
  std::vector<std::string> appearance;

  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": expected 'name: dims'");
    }
    const std::string name = trim(std::string_view(line).substr(0, colon));
    const std::string rest = trim(std::string_view(line).substr(colon + 1));
    if (name == "base") {
      declared_base = split_factors(rest);
      continue;
    }
    std::vector<std::pair<std::string, Rational>> factors;
    for (const auto& token : split_factors(rest)) {
      if (token == "1") continue;
      auto factor = parse_factor(token);
      if (std::find(appearance.begin(), appearance.end(), factor.first) == appearance.end()) {
        appearance.push_back(factor.first);
      }
      factors.push_back(std::move(factor));
    }
    entries.emplace_back(name, std::move(factors));
  }

  BaseSystem base(declared_base ? *declared_base : appearance);
  QuantitySet qs(base);
  for (auto& [name, factors] : entries) {
    RationalVector exps = RationalVector::Constant(base.size(), Rational(0));
    for (const auto& [symbol, power] : factors) {
      auto idx = base.index_of(symbol);
      if (!idx) throw std::invalid_argument("quantity '" + name + "' uses unknown base symbol '" + symbol + "'");
      exps(*idx) += power;
    }
    qs.add(name, DimensionVector(base, std::move(exps)));
  }
  return qs;
}

RationalVector parse_monomial(const QuantitySet& qs, std::string_view text) {
  RationalVector x = RationalVector::Constant(qs.size(), Rational(0));
  for (const auto& token : split_factors(text)) {
    auto [name, power] = parse_factor(token);
    auto idx = qs.index_of(name);
    if (!idx) throw std::invalid_argument("monomial uses unknown quantity '" + name + "'");
    x(*idx) += power;
  }
  return x;
}

std::string format_monomial(const QuantitySet& qs, const RationalVector& x) {
  std::string out;
  for (Index j = 0; j < x.size(); ++j) {
    if (x(j) == 0) continue;
    if (!out.empty()) out += ' ';
    out += qs.quantities()[static_cast<std::size_t>(j)].name;
    if (x(j) != 1) out += '^' + to_string(x(j));
  }
  return out.empty() ? "1" : out;
}

}  // namespace asymptotica::dimsys
