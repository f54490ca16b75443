#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "probound/rational.hpp"

namespace probound {

using StateIndex = std::uint32_t;

/// Optimisation direction of a reachability query.
enum class OptDir { Max, Min };

inline const char* to_string(OptDir o) { return o == OptDir::Max ? "max" : "min"; }

/// One probabilistic successor of a transition. Zero-probability branches are
/// never stored; absence from the branch list encodes probability zero.
struct Branch {
  StateIndex target = 0;
  Rational prob;

  bool operator==(const Branch&) const = default;
};

/// A probability distribution over successor states. Branch probabilities sum
/// to exactly 1; targets within one transition are pairwise distinct.
struct Transition {
  std::vector<Branch> branches;

  bool operator==(const Transition&) const = default;
};

/// Explicit-state MDP with exact rational transition probabilities.
/// Immutable by convention once built; all solver entry points take it const.
/// State order is significant: it is the file/generator order and determines
/// the sweep order of the iterative solvers.
struct Mdp {
  StateIndex state_count = 0;
  StateIndex initial = 0;
  /// transitions[s] is the non-empty set T(s) of distributions available at s.
  std::vector<std::vector<Transition>> transitions;
  /// Label name -> sorted set of state indices.
  std::map<std::string, std::vector<StateIndex>> labels;

  bool operator==(const Mdp&) const = default;

  /// A DTMC is an MDP with exactly one transition per state.
  bool is_dtmc() const {
    for (const auto& ts : transitions)
      if (ts.size() != 1) return false;
    return true;
  }

  std::size_t branch_count() const {
    std::size_t n = 0;
    for (const auto& ts : transitions)
      for (const auto& t : ts) n += t.branches.size();
    return n;
  }
};

/// One validation failure, localised to a state (and transition, if any).
struct Violation {
  StateIndex state = 0;
  std::optional<std::uint32_t> transition;
  std::string message;
};

/// Checks every structural invariant. Empty result means the model is valid.
inline std::vector<Violation> validate(const Mdp& m) {
  std::vector<Violation> out;
  if (m.transitions.size() != m.state_count)
    out.push_back({0, std::nullopt,
                   "transition table covers " + std::to_string(m.transitions.size()) +
                       " states, header declares " + std::to_string(m.state_count)});
  if (m.state_count > 0 && m.initial >= m.state_count)
    out.push_back({m.initial, std::nullopt, "initial state out of range"});
  for (StateIndex s = 0; s < m.transitions.size(); ++s) {
    const auto& ts = m.transitions[s];
    if (ts.empty()) {
      out.push_back({s, std::nullopt,
                     "empty transition set at state " + std::to_string(s)});
      continue;
    }
    for (std::uint32_t ti = 0; ti < ts.size(); ++ti) {
      const auto& tr = ts[ti];
      Rational sum = 0;
      std::vector<StateIndex> seen;
      for (const auto& b : tr.branches) {
        if (b.prob <= 0)
          out.push_back({s, ti, "non-positive branch probability " +
                                    format_rational(b.prob)});
        if (b.target >= m.state_count)
          out.push_back({s, ti, "branch target " + std::to_string(b.target) +
                                    " out of range"});
        if (std::find(seen.begin(), seen.end(), b.target) != seen.end())
          out.push_back({s, ti, "duplicate branch target " +
                                    std::to_string(b.target)});
        seen.push_back(b.target);
        sum += b.prob;
      }
      if (sum != 1) {
        std::string msg = "distribution sums to " + format_rational(sum) + ", not 1";
        if (sum < 1) msg += " (deficit " + format_rational(Rational(1) - sum) + ")";
        out.push_back({s, ti, msg});
      }
    }
  }
  for (const auto& [name, states] : m.labels)
    for (StateIndex s : states)
      if (s >= m.state_count)
        out.push_back({s, std::nullopt,
                       "label '" + name + "' names out-of-range state " +
                           std::to_string(s)});
  return out;
}

inline bool is_valid(const Mdp& m) { return validate(m).empty(); }

/// States carrying the given label, sorted. Throws if the label is undefined.
inline std::vector<StateIndex> label_states(const Mdp& m, std::string_view name) {
  auto it = m.labels.find(std::string(name));
  if (it == m.labels.end())
    throw std::runtime_error("model defines no label '" + std::string(name) + "'");
  return it->second;
}

/// Replaces every goal state's transitions with a single self-loop. All
/// reachability algorithms here assume absorbing goals; reachability values
/// are unaffected since only the first visit matters.
inline Mdp make_absorbing(Mdp m, const std::vector<StateIndex>& goal) {
  for (StateIndex g : goal) {
    m.transitions[g].clear();
    m.transitions[g].push_back(Transition{{Branch{g, Rational(1)}}});
  }
  return m;
}

/// Family of acyclic chain DTMCs exposing the loss of tiny probability margins
/// in fixed-precision arithmetic. The initial state branches to an accepting
/// sink with probability 1/2, into a chain of n+1 states with probability
/// gamma, and to a rejecting sink otherwise; each chain state advances with
/// probability gamma. The exact reachability value of the "plus" sink is
/// 1/2 + gamma^(n+2), which for small gamma is strictly above 1/2 by a margin
/// no fixed-precision format can keep.
///
/// States are laid out chain-end first (s_n, ..., s_0, initial, s+, s-) so a
/// single ascending Gauss-Seidel sweep propagates values along the whole
/// chain. 4+n states, 7+2n branches.
inline Mdp build_counterexample(StateIndex n, const Rational& gamma) {
  if (!(gamma > 0 && gamma < Rational(1, 2)))
    throw std::domain_error("gamma must lie strictly between 0 and 1/2, got " +
                            format_rational(gamma));
  Mdp m;
  m.state_count = n + 4;
  // Index i in [0, n] is chain state s_{n-i}; then initial, s+, s-.
  const StateIndex initial = n + 1, plus = n + 2, minus = n + 3;
  m.initial = initial;
  m.transitions.resize(m.state_count);
  m.transitions[0].push_back(
      Transition{{Branch{plus, gamma}, Branch{minus, Rational(1) - gamma}}});
  for (StateIndex i = 1; i <= n; ++i)
    m.transitions[i].push_back(Transition{
        {Branch{static_cast<StateIndex>(i - 1), gamma},
         Branch{minus, Rational(1) - gamma}}});
  m.transitions[initial].push_back(Transition{{Branch{plus, Rational(1, 2)},
                                               Branch{n, gamma},
                                               Branch{minus, Rational(1, 2) - gamma}}});
  m.transitions[plus].push_back(Transition{{Branch{plus, Rational(1)}}});
  m.transitions[minus].push_back(Transition{{Branch{minus, Rational(1)}}});
  m.labels["plus"] = {plus};
  m.labels["minus"] = {minus};
  return m;
}

/// Comparison operator of a PCTL threshold query.
enum class Comparator { Lt, Le, Gt, Ge };

inline const char* to_string(Comparator c) {
  switch (c) {
    case Comparator::Lt: return "<";
    case Comparator::Le: return "<=";
    case Comparator::Gt: return ">";
    case Comparator::Ge: return ">=";
  }
  return "?";
}

/// Query asking for the verified interval itself (Pmax=? / Pmin=?).
struct ValueQuery {
  bool operator==(const ValueQuery&) const = default;
};

/// Query comparing the probability against a rational bound in [0, 1].
struct Threshold {
  Comparator cmp = Comparator::Le;
  Rational bound;

  bool operator==(const Threshold&) const = default;
};

/// A parsed top-level reachability property.
struct PropertySpec {
  OptDir opt = OptDir::Max;
  std::string goal_label;
  std::variant<ValueQuery, Threshold> query;

  bool operator==(const PropertySpec&) const = default;
};

}  // namespace probound
