#include "asymptotica/core.hpp"

#include <cctype>

namespace asymptotica {

namespace {

Integer parse_integer(const std::string& text, const std::string& whole) {
  std::size_t i = 0;
  if (i < text.size() && (text[i] == '-' || text[i] == '+')) ++i;
  if (i == text.size()) throw std::invalid_argument("malformed rational: '" + whole + "'");
  for (std::size_t j = i; j < text.size(); ++j) {
    if (!std::isdigit(static_cast<unsigned char>(text[j]))) {
      throw std::invalid_argument("malformed rational: '" + whole + "'");
    }
  }
  return Integer(text[0] == '+' ? text.substr(1) : text);
}

}  // namespace

Rational parse_rational(const std::string& text) {
  const auto slash = text.find('/');
  if (slash == std::string::npos) return Rational(parse_integer(text, text));
  const Integer num = parse_integer(text.substr(0, slash), text);
  const Integer den = parse_integer(text.substr(slash + 1), text);
  if (den == 0) throw std::invalid_argument("zero denominator: '" + text + "'");
  return Rational(num, den);
}

std::string to_string(const Rational& value) { return value.str(); }

}  // namespace asymptotica
