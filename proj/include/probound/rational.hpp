#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <stdexcept>
#include <string>
#include <string_view>

namespace probound {

using BigInt = boost::multiprecision::cpp_int;

/// Exact rational number. Canonical form is maintained by the backing type:
/// lowest terms, denominator > 0.
using Rational = boost::multiprecision::cpp_rational;

/// Raised on malformed input text (models, properties, numbers).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline BigInt rational_num(const Rational& q) { return numerator(q); }
inline BigInt rational_den(const Rational& q) { return denominator(q); }

inline bool is_probability(const Rational& q) { return q >= 0 && q <= 1; }

/// q^k by exponentiating numerator and denominator separately.
inline Rational rational_pow(const Rational& q, unsigned k) {
  return Rational(pow(numerator(q), k), pow(denominator(q), k));
}

/// Always prints an explicit denominator, e.g. "1/2", "0/1", "3/1".
inline std::string format_rational(const Rational& q) {
  return numerator(q).str() + "/" + denominator(q).str();
}

namespace detail {

inline bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  return true;
}

}  // namespace detail

/// Parses "num/den" with non-negative integer parts. Rejects decimal
/// literals: a decimal in a model file hides a rounding step.
inline Rational parse_rational(std::string_view text) {
  auto slash = text.find('/');
  if (text.find('.') != std::string_view::npos ||
      text.find('e') != std::string_view::npos ||
      text.find('E') != std::string_view::npos) {
    throw ParseError("'" + std::string(text) +
                     "': decimal literals are not accepted, write an exact "
                     "rational like 1/10");
  }
  if (slash == std::string_view::npos) {
    if (!detail::all_digits(text))
      throw ParseError("'" + std::string(text) + "': expected <num>/<den>");
    return Rational(BigInt(std::string(text)));
  }
  std::string_view num = text.substr(0, slash);
  std::string_view den = text.substr(slash + 1);
  if (!detail::all_digits(num) || !detail::all_digits(den))
    throw ParseError("'" + std::string(text) + "': expected <num>/<den>");
  BigInt d{std::string(den)};
  if (d == 0) throw ParseError("'" + std::string(text) + "': zero denominator");
  return Rational(BigInt(std::string(num)), d);
}

/// Like parse_rational but also accepts decimal and scientific literals,
/// converted exactly (0.25 -> 1/4, 1e-6 -> 1/1000000). Intended for command
/// line arguments, where a decimal is an exact rational, not a float.
inline Rational parse_rational_arg(std::string_view text) {
  std::string s(text);
  auto epos = s.find_first_of("eE");
  long exp10 = 0;
  if (epos != std::string::npos) {
    std::string et = s.substr(epos + 1);
    if (et.empty()) throw ParseError("'" + s + "': malformed exponent");
    try {
      exp10 = std::stol(et);
    } catch (const std::exception&) {
      throw ParseError("'" + s + "': malformed exponent");
    }
    s = s.substr(0, epos);
  }
  auto dot = s.find('.');
  if (dot != std::string::npos) {
    std::string frac = s.substr(dot + 1);
    s = s.substr(0, dot) + frac;
    exp10 -= static_cast<long>(frac.size());
    if (s.empty()) throw ParseError("'" + std::string(text) + "': not a number");
  }
  if (exp10 == 0 && dot == std::string::npos && epos == std::string::npos)
    return parse_rational(text);
  if (!detail::all_digits(s))
    throw ParseError("'" + std::string(text) + "': not a number");
  Rational q{BigInt(s)};
  BigInt scale = pow(BigInt(10), static_cast<unsigned>(exp10 < 0 ? -exp10 : exp10));
  if (exp10 < 0)
    q /= Rational(scale);
  else
    q *= Rational(scale);
  return q;
}

}  // namespace probound
