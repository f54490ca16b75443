#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "probound/graph.hpp"
#include "probound/mdp.hpp"

namespace probound {

/// One memoryless deterministic scheduler: a transition index per state.
using SchedulerAssignment = std::vector<std::uint32_t>;

struct ExactResult {
  Rational value;
  SchedulerAssignment witness;
};

/// Raised when the scheduler space exceeds the enumeration limit. The oracle
/// is an auditable ground truth for small models, not a scalable solver.
class OracleLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

// Reachability values of the DTMC induced by `choice`, as exact rationals.
// States that cannot reach the goal get 0, goal states 1, and the rest solve
// the linear system p(s) = sum mu(s') p(s') by Gaussian elimination over
// rationals. Every arithmetic step is exact, so the result is the unique
// solution, not an approximation.
inline std::vector<Rational> dtmc_values(const Mdp& m,
                                         const std::vector<StateIndex>& goal,
                                         const SchedulerAssignment& choice) {
  const StateIndex n = m.state_count;
  auto goal_mask = to_mask(n, goal);

  // Backward reachability restricted to the chosen transitions.
  std::vector<std::vector<StateIndex>> rev(n);
  for (StateIndex s = 0; s < n; ++s) {
    if (goal_mask[s]) continue;
    for (const auto& b : m.transitions[s][choice[s]].branches)
      rev[b.target].push_back(s);
  }
  std::vector<bool> can_reach(n, false);
  std::vector<StateIndex> stack;
  for (StateIndex g : goal)
    if (!can_reach[g]) {
      can_reach[g] = true;
      stack.push_back(g);
    }
  while (!stack.empty()) {
    StateIndex t = stack.back();
    stack.pop_back();
    for (StateIndex p : rev[t])
      if (!can_reach[p]) {
        can_reach[p] = true;
        stack.push_back(p);
      }
  }

  std::vector<StateIndex> unknown;
  std::vector<std::uint32_t> row_of(n, UINT32_MAX);
  for (StateIndex s = 0; s < n; ++s)
    if (can_reach[s] && !goal_mask[s]) {
      row_of[s] = static_cast<std::uint32_t>(unknown.size());
      unknown.push_back(s);
    }

  const std::size_t k = unknown.size();
  // (I - A) p = b, dense with exact rational entries.
  std::vector<std::vector<Rational>> a(k, std::vector<Rational>(k, Rational(0)));
  std::vector<Rational> rhs(k, Rational(0));
  for (std::size_t i = 0; i < k; ++i) {
    a[i][i] = 1;
    for (const auto& br : m.transitions[unknown[i]][choice[unknown[i]]].branches) {
      if (goal_mask[br.target])
        rhs[i] += br.prob;
      else if (row_of[br.target] != UINT32_MAX)
        a[i][row_of[br.target]] -= br.prob;
    }
  }

  for (std::size_t col = 0; col < k; ++col) {
    std::size_t pivot = col;
    while (pivot < k && a[pivot][col] == 0) ++pivot;
    if (pivot == k)
      throw std::logic_error("singular reachability system; model not validated?");
    if (pivot != col) {
      std::swap(a[pivot], a[col]);
      std::swap(rhs[pivot], rhs[col]);
    }
    for (std::size_t r = col + 1; r < k; ++r) {
      if (a[r][col] == 0) continue;
      Rational f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < k; ++c) a[r][c] -= f * a[col][c];
      rhs[r] -= f * rhs[col];
    }
  }
  std::vector<Rational> p(k);
  for (std::size_t r = k; r-- > 0;) {
    Rational acc = rhs[r];
    for (std::size_t c = r + 1; c < k; ++c) acc -= a[r][c] * p[c];
    p[r] = acc / a[r][r];
  }

  std::vector<Rational> values(n, Rational(0));
  for (StateIndex g : goal) values[g] = 1;
  for (std::size_t i = 0; i < k; ++i) values[unknown[i]] = p[i];
  return values;
}

}  // namespace detail

/// Exact per-state reachability probabilities of a DTMC.
inline std::vector<Rational> exact_dtmc_reachability(const Mdp& m,
                                                     const std::vector<StateIndex>& goal) {
  if (!m.is_dtmc())
    throw std::invalid_argument("exact_dtmc_reachability requires a DTMC");
  return detail::dtmc_values(m, goal, SchedulerAssignment(m.state_count, 0));
}

struct ExactVectorResult {
  std::vector<Rational> values;  // pointwise optimum over all schedulers
  SchedulerAssignment witness;   // attains the optimum at the initial state
};

/// Enumerates every memoryless deterministic scheduler (they suffice for
/// reachability optima), solving each induced DTMC exactly.
inline ExactVectorResult exact_reachability_all(const Mdp& m,
                                                const std::vector<StateIndex>& goal,
                                                OptDir opt,
                                                std::uint64_t scheduler_limit = 1000000) {
  BigInt total = 1;
  for (const auto& ts : m.transitions) total *= static_cast<unsigned>(ts.size());
  if (total > scheduler_limit)
    throw OracleLimitError("scheduler space has " + total.str() +
                           " assignments, above the limit of " +
                           std::to_string(scheduler_limit) +
                           "; the exact oracle is restricted to small models");

  const StateIndex n = m.state_count;
  SchedulerAssignment choice(n, 0);
  ExactVectorResult best;
  bool first = true;
  while (true) {
    auto values = detail::dtmc_values(m, goal, choice);
    if (first) {
      best.values = values;
      best.witness = choice;
      first = false;
    } else {
      bool better_at_initial = opt == OptDir::Max ? values[m.initial] > best.values[m.initial]
                                                  : values[m.initial] < best.values[m.initial];
      if (better_at_initial) best.witness = choice;
      for (StateIndex s = 0; s < n; ++s)
        if (opt == OptDir::Max ? values[s] > best.values[s] : values[s] < best.values[s])
          best.values[s] = values[s];
    }
    // Next assignment in mixed-radix order.
    StateIndex pos = 0;
    while (pos < n) {
      if (++choice[pos] < m.transitions[pos].size()) break;
      choice[pos] = 0;
      ++pos;
    }
    if (pos == n) break;
  }
  return best;
}

/// Optimal reachability probability at the initial state, with a witness
/// scheduler attaining it.
inline ExactResult exact_reachability(const Mdp& m, const std::vector<StateIndex>& goal,
                                      OptDir opt, std::uint64_t scheduler_limit = 1000000) {
  auto all = exact_reachability_all(m, goal, opt, scheduler_limit);
  return ExactResult{all.values[m.initial], std::move(all.witness)};
}

}  // namespace probound
