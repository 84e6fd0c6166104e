#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <stdexcept>
#include <string>
#include <string_view>

namespace flowhopf {

/// Exact arbitrary-precision rational; always kept reduced with a positive
/// denominator by the backend.
using Rational = boost::multiprecision::cpp_rational;
using Integer = boost::multiprecision::cpp_int;

inline bool is_zero(const Rational& q) { return q.is_zero(); }

/// "p/q", or "p" when the denominator is one.
inline std::string to_string(const Rational& q) {
  const Integer num = boost::multiprecision::numerator(q);
  const Integer den = boost::multiprecision::denominator(q);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

/// Parses "p", "-p", "p/q". Throws std::invalid_argument on malformed text or a
/// zero denominator.
inline Rational parse_rational(std::string_view text) {
  auto digits = [](std::string_view s) {
    if (s.empty()) return false;
    std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i)
      if (s[i] < '0' || s[i] > '9') return false;
    return true;
  };
  const auto slash = text.find('/');
  std::string_view num = text.substr(0, slash);
  if (!digits(num)) throw std::invalid_argument("malformed rational: " + std::string(text));
  std::string n(num);
  if (n[0] == '+') n.erase(0, 1);
  if (slash == std::string_view::npos) return Rational(Integer(n));
  std::string_view den = text.substr(slash + 1);
  if (!digits(den) || den[0] == '-' || den[0] == '+')
    throw std::invalid_argument("malformed rational: " + std::string(text));
  Integer d(std::string{den});
  if (d == 0) throw std::invalid_argument("zero denominator: " + std::string(text));
  return Rational(Integer(n), d);
}

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

}  // namespace flowhopf
