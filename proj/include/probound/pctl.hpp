#pragma once

#include <string>
#include <string_view>

#include "probound/mdp.hpp"
#include "probound/rounding.hpp"

namespace probound {

/// Three-valued outcome of a threshold query against a verified interval.
/// Unknown means the bound lies strictly inside the interval, so no sound
/// answer exists at this precision.
enum class Verdict { True, False, Unknown };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::True: return "true";
    case Verdict::False: return "false";
    case Verdict::Unknown: return "unknown";
  }
  return "?";
}

/// Optimisation direction that makes the comparison sound: an upper bound on
/// the maximum decides <= and <, a lower bound on the minimum decides >= and >.
inline OptDir evaluate_opt_for(Comparator cmp) {
  return (cmp == Comparator::Lt || cmp == Comparator::Le) ? OptDir::Max : OptDir::Min;
}

/// Decides "for all x in [lower, upper]: x ~ c" / "for no x" / mixed. The
/// float bounds are compared as exact rationals against the exact bound; c is
/// never converted to floating point, so there is no double rounding.
inline Verdict evaluate(double lower, double upper, Comparator cmp, const Rational& c) {
  Rational lo = rational_from_float(lower);
  Rational hi = rational_from_float(upper);
  bool all = false, none = false;
  switch (cmp) {
    case Comparator::Le: all = hi <= c; none = lo > c; break;
    case Comparator::Lt: all = hi < c; none = lo >= c; break;
    case Comparator::Ge: all = lo >= c; none = hi < c; break;
    case Comparator::Gt: all = lo > c; none = hi <= c; break;
  }
  if (all) return Verdict::True;
  if (none) return Verdict::False;
  return Verdict::Unknown;
}

namespace detail {

struct PropertyCursor {
  std::string_view text;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
  }
  bool eat(std::string_view tok) {
    skip_ws();
    if (text.substr(pos, tok.size()) == tok) {
      pos += tok.size();
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& what) {
    throw ParseError("property '" + std::string(text) + "': " + what);
  }
};

}  // namespace detail

/// Accepted forms, nothing else:
///   P<=1/2 [ F "label" ]     (comparators <=, <, >=, >; bound a rational)
///   Pmax=? [ F "label" ]
///   Pmin=? [ F "label" ]
/// Nested or non-reachability PCTL is rejected with a clear error.
inline PropertySpec parse_property(std::string_view text) {
  detail::PropertyCursor c{text};
  PropertySpec spec;
  if (!c.eat("P")) c.fail("must start with 'P'");
  if (c.eat("max=?")) {
    spec.opt = OptDir::Max;
    spec.query = ValueQuery{};
  } else if (c.eat("min=?")) {
    spec.opt = OptDir::Min;
    spec.query = ValueQuery{};
  } else {
    Comparator cmp;
    if (c.eat("<="))
      cmp = Comparator::Le;
    else if (c.eat(">="))
      cmp = Comparator::Ge;
    else if (c.eat("<"))
      cmp = Comparator::Lt;
    else if (c.eat(">"))
      cmp = Comparator::Gt;
    else
      c.fail("expected max=?, min=?, or a comparator <=, <, >=, >");
    c.skip_ws();
    std::size_t start = c.pos;
    while (c.pos < c.text.size() && c.text[c.pos] != ' ' && c.text[c.pos] != '[')
      ++c.pos;
    Rational bound;
    try {
      bound = parse_rational_arg(c.text.substr(start, c.pos - start));
    } catch (const ParseError& e) {
      c.fail(e.what());
    }
    if (bound < 0 || bound > 1)
      c.fail("bound " + format_rational(bound) + " outside [0, 1]");
    spec.opt = evaluate_opt_for(cmp);
    spec.query = Threshold{cmp, bound};
  }
  if (!c.eat("[")) c.fail("expected '['");
  if (c.eat("P"))
    c.fail("nested P operators are not supported; only top-level P~c [ F \"label\" ]");
  if (!c.eat("F")) c.fail("only the reachability operator F is supported");
  if (c.eat("P") || c.eat("("))
    c.fail("nested operators are not supported; F takes a quoted label");
  if (!c.eat("\"")) c.fail("expected a quoted label after F");
  std::size_t start = c.pos;
  while (c.pos < c.text.size() && c.text[c.pos] != '"') ++c.pos;
  if (c.pos == c.text.size()) c.fail("unterminated label quote");
  spec.goal_label = std::string(c.text.substr(start, c.pos - start));
  ++c.pos;
  if (spec.goal_label.empty()) c.fail("empty label");
  if (!c.eat("]")) c.fail("expected ']'");
  c.skip_ws();
  if (c.pos != c.text.size()) c.fail("trailing input after ']'");
  return spec;
}

}  // namespace probound
