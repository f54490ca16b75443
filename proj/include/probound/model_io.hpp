#pragma once

#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "probound/mdp.hpp"

namespace probound {

// Model text format, line oriented:
//
//   mdp <state_count> <initial_index>
//   label <name> <idx> <idx> ...
//   state <idx>:
//     <num>/<den> -> <idx> [, <num>/<den> -> <idx>]*
//
// '#' starts a comment. Probabilities must be exact rationals; decimal
// literals are rejected.

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

[[noreturn]] inline void fail(int line, const std::string& what) {
  throw ParseError("line " + std::to_string(line) + ": " + what);
}

inline StateIndex parse_index(const std::string& tok, int line, StateIndex bound) {
  if (!all_digits(tok)) fail(line, "'" + tok + "' is not a state index");
  unsigned long long v = 0;
  try {
    v = std::stoull(tok);
  } catch (const std::exception&) {
    fail(line, "'" + tok + "' is not a state index");
  }
  if (v >= bound)
    fail(line, "state index " + tok + " out of range (state count " +
                   std::to_string(bound) + ")");
  return static_cast<StateIndex>(v);
}

// "<num>/<den> -> <idx>[, ...]" for the state currently open.
inline Transition parse_transition_line(std::string_view body, int line,
                                        StateIndex state_count) {
  Transition tr;
  std::string text(body);
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto comma = text.find(',', pos);
    std::string part(trim(std::string_view(text).substr(
        pos, comma == std::string::npos ? std::string::npos : comma - pos)));
    auto arrow = part.find("->");
    if (arrow == std::string::npos)
      fail(line, "expected '<num>/<den> -> <target>' in '" + part + "'");
    std::string prob_tok(trim(std::string_view(part).substr(0, arrow)));
    std::string tgt_tok(trim(std::string_view(part).substr(arrow + 2)));
    Rational p;
    try {
      p = parse_rational(prob_tok);
    } catch (const ParseError& e) {
      fail(line, e.what());
    }
    if (p == 0) fail(line, "zero-probability branch to " + tgt_tok);
    if (p < 0 || p > 1)
      fail(line, "branch probability " + format_rational(p) + " outside [0, 1]");
    StateIndex tgt = parse_index(tgt_tok, line, state_count);
    for (const auto& b : tr.branches)
      if (b.target == tgt)
        fail(line, "duplicate branch target " + tgt_tok + " within one transition");
    tr.branches.push_back(Branch{tgt, p});
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (tr.branches.empty()) fail(line, "empty transition");
  Rational sum = 0;
  for (const auto& b : tr.branches) sum += b.prob;
  if (sum != 1)
    fail(line, "distribution sums to " + format_rational(sum) + ", not 1");
  return tr;
}

}  // namespace detail

inline Mdp parse_model(std::istream& in) {
  Mdp m;
  bool header_seen = false;
  bool state_open = false;
  StateIndex current_state = 0;
  std::vector<bool> state_seen;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view sv(raw);
    if (auto hash = sv.find('#'); hash != std::string_view::npos)
      sv = sv.substr(0, hash);
    sv = detail::trim(sv);
    if (sv.empty()) continue;

    if (!header_seen) {
      auto toks = detail::split_ws(sv);
      if (toks.size() != 3 || toks[0] != "mdp")
        detail::fail(line, "expected header 'mdp <state_count> <initial_index>'");
      if (!detail::all_digits(toks[1]))
        detail::fail(line, "'" + toks[1] + "' is not a state count");
      m.state_count = static_cast<StateIndex>(std::stoull(toks[1]));
      if (m.state_count == 0) detail::fail(line, "state count must be positive");
      m.initial = detail::parse_index(toks[2], line, m.state_count);
      m.transitions.resize(m.state_count);
      state_seen.assign(m.state_count, false);
      header_seen = true;
      continue;
    }

    if (sv.starts_with("label ")) {
      auto toks = detail::split_ws(sv);
      if (toks.size() < 3)
        detail::fail(line, "expected 'label <name> <idx> ...'");
      auto& states = m.labels[toks[1]];
      for (std::size_t i = 2; i < toks.size(); ++i)
        states.push_back(detail::parse_index(toks[i], line, m.state_count));
      std::sort(states.begin(), states.end());
      states.erase(std::unique(states.begin(), states.end()), states.end());
      state_open = false;
      continue;
    }

    if (sv.starts_with("state ")) {
      auto body = detail::trim(sv.substr(6));
      if (body.empty() || body.back() != ':')
        detail::fail(line, "expected 'state <idx>:'");
      body.remove_suffix(1);
      current_state = detail::parse_index(std::string(detail::trim(body)), line,
                                          m.state_count);
      if (state_seen[current_state])
        detail::fail(line, "state " + std::to_string(current_state) +
                               " declared twice");
      state_seen[current_state] = true;
      state_open = true;
      continue;
    }

    if (!state_open)
      detail::fail(line, "transition line outside a 'state <idx>:' block");
    m.transitions[current_state].push_back(
        detail::parse_transition_line(sv, line, m.state_count));
  }
  if (!header_seen) throw ParseError("empty model: missing 'mdp' header");
  auto violations = validate(m);
  if (!violations.empty()) {
    std::string msg = "invalid model:";
    for (const auto& v : violations) msg += "\n  " + v.message;
    throw ParseError(msg);
  }
  return m;
}

inline Mdp parse_model(const std::string& text) {
  std::istringstream in(text);
  return parse_model(in);
}

/// Deterministic: serialising the same model twice yields identical bytes,
/// and parse_model(serialize_model(m)) == m.
inline std::string serialize_model(const Mdp& m) {
  std::string out;
  out += "mdp " + std::to_string(m.state_count) + " " + std::to_string(m.initial) + "\n";
  for (const auto& [name, states] : m.labels) {
    out += "label " + name;
    for (StateIndex s : states) out += " " + std::to_string(s);
    out += "\n";
  }
  for (StateIndex s = 0; s < m.state_count; ++s) {
    out += "state " + std::to_string(s) + ":\n";
    for (const auto& tr : m.transitions[s]) {
      out += "  ";
      for (std::size_t i = 0; i < tr.branches.size(); ++i) {
        if (i > 0) out += ", ";
        out += format_rational(tr.branches[i].prob) + " -> " +
               std::to_string(tr.branches[i].target);
      }
      out += "\n";
    }
  }
  return out;
}

}  // namespace probound
