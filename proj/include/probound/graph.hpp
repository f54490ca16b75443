#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "probound/mdp.hpp"

namespace probound {

/// States with reachability probability exactly 0 (s0) and exactly 1 (s1),
/// computed from the graph structure alone. Disjoint; goal is contained in s1.
struct QualitativeSets {
  std::vector<bool> s0, s1;
};

/// Maximal end components and the state renumbering their collapse induces.
struct Mec {
  std::vector<StateIndex> states;                    // ascending
  std::vector<std::vector<std::uint32_t>> retained;  // per member: transition indices
};

struct MecPartition {
  std::vector<Mec> mecs;
  /// Original state index -> index after collapsing each MEC to one state.
  std::vector<StateIndex> quotient_map;
  /// Number of states after collapse.
  StateIndex collapsed_count = 0;
};

namespace detail {

// All algorithms below treat goal states as absorbing regardless of their
// actual transitions; only the first visit to a goal matters.

inline std::vector<bool> to_mask(StateIndex n, const std::vector<StateIndex>& set) {
  std::vector<bool> mask(n, false);
  for (StateIndex s : set) mask[s] = true;
  return mask;
}

// Least fixpoint of backward reachability: states that can reach `targets`
// with positive probability under some scheduler (equivalently: via some
// sequence of branches). Goal-absorbing: edges out of goal states ignored.
inline std::vector<bool> reach_any(const Mdp& m, const std::vector<bool>& targets,
                                   const std::vector<bool>& goal_mask) {
  std::vector<std::vector<StateIndex>> rev(m.state_count);
  for (StateIndex s = 0; s < m.state_count; ++s) {
    if (goal_mask[s]) continue;
    for (const auto& tr : m.transitions[s])
      for (const auto& b : tr.branches) rev[b.target].push_back(s);
  }
  std::vector<bool> seen(m.state_count, false);
  std::vector<StateIndex> stack;
  for (StateIndex s = 0; s < m.state_count; ++s)
    if (targets[s]) {
      seen[s] = true;
      stack.push_back(s);
    }
  while (!stack.empty()) {
    StateIndex t = stack.back();
    stack.pop_back();
    for (StateIndex p : rev[t])
      if (!seen[p]) {
        seen[p] = true;
        stack.push_back(p);
      }
  }
  return seen;
}

// Greatest fixpoint: non-goal states from which some scheduler keeps the run
// inside the set forever (so the goal is avoided with probability 1).
inline std::vector<bool> avoid_forever(const Mdp& m, const std::vector<bool>& goal_mask) {
  std::vector<bool> z(m.state_count);
  for (StateIndex s = 0; s < m.state_count; ++s) z[s] = !goal_mask[s];
  bool changed = true;
  while (changed) {
    changed = false;
    for (StateIndex s = 0; s < m.state_count; ++s) {
      if (!z[s]) continue;
      bool has_staying = false;
      for (const auto& tr : m.transitions[s]) {
        bool stays = true;
        for (const auto& b : tr.branches)
          if (!z[b.target]) {
            stays = false;
            break;
          }
        if (stays) {
          has_staying = true;
          break;
        }
      }
      if (!has_staying) {
        z[s] = false;
        changed = true;
      }
    }
  }
  return z;
}

// Double fixpoint for almost-sure reachability under the best scheduler.
inline std::vector<bool> prob1_max_set(const Mdp& m, const std::vector<bool>& goal_mask) {
  std::vector<bool> z(m.state_count, true);
  while (true) {
    std::vector<bool> r = goal_mask;
    bool grew = true;
    while (grew) {
      grew = false;
      for (StateIndex s = 0; s < m.state_count; ++s) {
        if (r[s] || goal_mask[s]) continue;
        for (const auto& tr : m.transitions[s]) {
          bool inside_z = true, touches_r = false;
          for (const auto& b : tr.branches) {
            if (!z[b.target]) inside_z = false;
            if (r[b.target]) touches_r = true;
          }
          if (inside_z && touches_r) {
            r[s] = true;
            grew = true;
            break;
          }
        }
      }
    }
    if (r == z) return z;
    z = std::move(r);
  }
}

}  // namespace detail

/// { s | P_opt(s, eventually goal) = 0 }. Pure graph computation: the result
/// does not depend on the numeric branch probabilities.
inline std::vector<bool> prob0(const Mdp& m, const std::vector<StateIndex>& goal,
                               OptDir opt) {
  auto goal_mask = detail::to_mask(m.state_count, goal);
  if (opt == OptDir::Max) {
    auto can_reach = detail::reach_any(m, goal_mask, goal_mask);
    std::vector<bool> out(m.state_count);
    for (StateIndex s = 0; s < m.state_count; ++s) out[s] = !can_reach[s];
    return out;
  }
  return detail::avoid_forever(m, goal_mask);
}

/// { s | P_opt(s, eventually goal) = 1 }.
inline std::vector<bool> prob1(const Mdp& m, const std::vector<StateIndex>& goal,
                               OptDir opt) {
  auto goal_mask = detail::to_mask(m.state_count, goal);
  if (opt == OptDir::Max) return detail::prob1_max_set(m, goal_mask);
  // P_min(s) < 1 iff s can reach, under some scheduler, a state from which
  // the goal can be avoided forever.
  auto avoid = detail::avoid_forever(m, goal_mask);
  auto reaches_avoid = detail::reach_any(m, avoid, goal_mask);
  std::vector<bool> out(m.state_count);
  for (StateIndex s = 0; s < m.state_count; ++s) out[s] = !reaches_avoid[s];
  return out;
}

inline QualitativeSets qualitative_sets(const Mdp& m, const std::vector<StateIndex>& goal,
                                        OptDir opt) {
  return QualitativeSets{prob0(m, goal, opt), prob1(m, goal, opt)};
}

namespace detail {

// Iterative Tarjan over an adjacency list. Returns the component id of every
// vertex; ids are assigned in reverse topological order of components.
inline std::vector<std::uint32_t> scc_ids(const std::vector<std::vector<StateIndex>>& adj,
                                          std::uint32_t& component_count) {
  const std::uint32_t n = static_cast<std::uint32_t>(adj.size());
  constexpr std::uint32_t kNone = UINT32_MAX;
  std::vector<std::uint32_t> index(n, kNone), lowlink(n, 0), comp(n, kNone);
  std::vector<bool> on_stack(n, false);
  std::vector<StateIndex> stack;
  std::uint32_t next_index = 0;
  component_count = 0;

  struct Frame {
    StateIndex v;
    std::size_t edge;
  };
  std::vector<Frame> call;
  for (StateIndex root = 0; root < n; ++root) {
    if (index[root] != kNone) continue;
    call.push_back({root, 0});
    while (!call.empty()) {
      auto& f = call.back();
      StateIndex v = f.v;
      if (f.edge == 0) {
        index[v] = lowlink[v] = next_index++;
        stack.push_back(v);
        on_stack[v] = true;
      }
      bool descended = false;
      while (f.edge < adj[v].size()) {
        StateIndex w = adj[v][f.edge++];
        if (index[w] == kNone) {
          call.push_back({w, 0});
          descended = true;
          break;
        }
        if (on_stack[w]) lowlink[v] = std::min(lowlink[v], index[w]);
      }
      if (descended) continue;
      if (lowlink[v] == index[v]) {
        while (true) {
          StateIndex w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp[w] = component_count;
          if (w == v) break;
        }
        ++component_count;
      }
      call.pop_back();
      if (!call.empty())
        lowlink[call.back().v] = std::min(lowlink[call.back().v], lowlink[v]);
    }
  }
  return comp;
}

}  // namespace detail

/// Maximal end components via iterated SCC decomposition with transition
/// pruning: a transition with a branch leaving its state's current component
/// cannot belong to an end component, and removing it can only split
/// components further, so iterating to stability is exact.
inline MecPartition mec_decomposition(const Mdp& m) {
  const StateIndex n = m.state_count;
  std::vector<std::vector<std::uint32_t>> retained(n);
  for (StateIndex s = 0; s < n; ++s) {
    retained[s].resize(m.transitions[s].size());
    std::iota(retained[s].begin(), retained[s].end(), 0);
  }
  std::vector<std::uint32_t> comp;
  while (true) {
    std::vector<std::vector<StateIndex>> adj(n);
    for (StateIndex s = 0; s < n; ++s)
      for (std::uint32_t ti : retained[s])
        for (const auto& b : m.transitions[s][ti].branches) adj[s].push_back(b.target);
    std::uint32_t count = 0;
    comp = detail::scc_ids(adj, count);
    bool pruned = false;
    for (StateIndex s = 0; s < n; ++s) {
      auto& keep = retained[s];
      auto it = std::remove_if(keep.begin(), keep.end(), [&](std::uint32_t ti) {
        for (const auto& b : m.transitions[s][ti].branches)
          if (comp[b.target] != comp[s]) return true;
        return false;
      });
      if (it != keep.end()) {
        keep.erase(it, keep.end());
        pruned = true;
      }
    }
    if (!pruned) break;
  }

  MecPartition out;
  std::vector<std::vector<StateIndex>> members;
  {
    std::uint32_t count = 0;
    for (StateIndex s = 0; s < n; ++s) count = std::max(count, comp[s] + 1);
    members.resize(count);
    for (StateIndex s = 0; s < n; ++s) members[comp[s]].push_back(s);
  }
  std::vector<std::uint32_t> mec_of(n, UINT32_MAX);
  for (auto& group : members) {
    bool all_retained = std::all_of(group.begin(), group.end(),
                                    [&](StateIndex s) { return !retained[s].empty(); });
    if (!all_retained) continue;
    Mec mec;
    std::sort(group.begin(), group.end());
    mec.states = group;
    for (StateIndex s : group) {
      mec_of[s] = static_cast<std::uint32_t>(out.mecs.size());
      mec.retained.push_back(retained[s]);
    }
    out.mecs.push_back(std::move(mec));
  }

  // Quotient numbering: first encounter order, so non-MEC states and MEC
  // representatives keep their relative original order.
  out.quotient_map.assign(n, UINT32_MAX);
  std::vector<StateIndex> mec_new_index(out.mecs.size(), UINT32_MAX);
  StateIndex next = 0;
  for (StateIndex s = 0; s < n; ++s) {
    std::uint32_t mi = mec_of[s];
    if (mi == UINT32_MAX) {
      out.quotient_map[s] = next++;
    } else if (mec_new_index[mi] == UINT32_MAX) {
      mec_new_index[mi] = next;
      out.quotient_map[s] = next++;
    } else {
      out.quotient_map[s] = mec_new_index[mi];
    }
  }
  out.collapsed_count = next;
  return out;
}

struct CollapseResult {
  Mdp model;
  std::vector<StateIndex> quotient_map;
  /// Goal set in the collapsed space: a collapsed state is a goal state iff
  /// it contains one.
  std::vector<StateIndex> goal;
};

/// Image of a state set under a quotient map, sorted and deduplicated.
inline std::vector<StateIndex> apply_quotient(const std::vector<StateIndex>& set,
                                              const std::vector<StateIndex>& map) {
  std::vector<StateIndex> out;
  for (StateIndex s : set) out.push_back(map[s]);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace detail {

// Remaps branch targets and merges branches that now share a target.
inline Transition remap_transition(const Transition& tr,
                                   const std::vector<StateIndex>& map) {
  Transition out;
  for (const auto& b : tr.branches) {
    StateIndex t = map[b.target];
    auto it = std::find_if(out.branches.begin(), out.branches.end(),
                           [&](const Branch& x) { return x.target == t; });
    if (it != out.branches.end())
      it->prob += b.prob;
    else
      out.branches.push_back(Branch{t, b.prob});
  }
  return out;
}

}  // namespace detail

/// Collapses every maximal end component to a single state. The collapsed
/// state keeps each member transition that has a branch leaving the MEC
/// (inside branches redirected to the collapsed state itself); transitions
/// entirely inside the MEC are dropped. A collapsed state with nothing left
/// becomes absorbing. Preserves P_max of reaching `goal` for every state.
inline CollapseResult collapse_mecs(const Mdp& m, const std::vector<StateIndex>& goal) {
  MecPartition part = mec_decomposition(m);
  const auto& map = part.quotient_map;

  Mdp out;
  out.state_count = part.collapsed_count;
  out.initial = map[m.initial];
  out.transitions.resize(out.state_count);

  std::vector<bool> is_mec_state(m.state_count, false);
  for (const auto& mec : part.mecs)
    for (StateIndex s : mec.states) is_mec_state[s] = true;

  for (StateIndex s = 0; s < m.state_count; ++s) {
    if (is_mec_state[s]) continue;
    for (const auto& tr : m.transitions[s])
      out.transitions[map[s]].push_back(detail::remap_transition(tr, map));
  }
  for (const auto& mec : part.mecs) {
    StateIndex c = map[mec.states.front()];
    for (std::size_t i = 0; i < mec.states.size(); ++i) {
      StateIndex s = mec.states[i];
      for (std::uint32_t ti = 0; ti < m.transitions[s].size(); ++ti) {
        // Retained transitions stay entirely inside the MEC; only the leaving
        // ones survive the collapse.
        if (std::find(mec.retained[i].begin(), mec.retained[i].end(), ti) !=
            mec.retained[i].end())
          continue;
        out.transitions[c].push_back(
            detail::remap_transition(m.transitions[s][ti], map));
      }
    }
    if (out.transitions[c].empty())
      out.transitions[c].push_back(Transition{{Branch{c, Rational(1)}}});
  }

  for (const auto& [name, states] : m.labels) {
    std::vector<StateIndex> mapped;
    for (StateIndex s : states) mapped.push_back(map[s]);
    std::sort(mapped.begin(), mapped.end());
    mapped.erase(std::unique(mapped.begin(), mapped.end()), mapped.end());
    out.labels[name] = std::move(mapped);
  }
  return CollapseResult{std::move(out), map, apply_quotient(goal, map)};
}

}  // namespace probound
