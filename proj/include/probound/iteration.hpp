#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "probound/graph.hpp"
#include "probound/mdp.hpp"
#include "probound/rounding.hpp"

namespace probound {

/// The four solver kernels. The interleaved variants update l(s) then u(s)
/// per state within one pass; the sequential ones run a full lower pass, then
/// a full upper pass, which needs only two rounding-mode switches per sweep
/// instead of two per state. Same arithmetic either way: interleaved and
/// sequential produce bitwise-identical value sequences.
enum class Variant { III, SII, SrIII, SrSII };

inline bool is_safe(Variant v) { return v == Variant::SrIII || v == Variant::SrSII; }
inline bool is_interleaved(Variant v) { return v == Variant::III || v == Variant::SrIII; }

inline const char* to_string(Variant v) {
  switch (v) {
    case Variant::III: return "iii";
    case Variant::SII: return "sii";
    case Variant::SrIII: return "sr-iii";
    case Variant::SrSII: return "sr-sii";
  }
  return "?";
}

enum class Termination { Converged, Stalled, SweepLimit, TimedOut };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::Converged: return "converged";
    case Termination::Stalled: return "stalled";
    case Termination::SweepLimit: return "sweep-limit";
    case Termination::TimedOut: return "timeout";
  }
  return "?";
}

/// Lower and upper bound vectors. Values of single-precision runs are stored
/// exactly in the double fields (the widening conversion is lossless).
struct ValueVectors {
  std::vector<double> lower, upper;
  /// Whether the most recent sweep changed any stored entry.
  bool changed = false;
};

struct SolveConfig {
  Variant variant = Variant::SrSII;
  /// Relative-width convergence threshold, exact. Converted to the working
  /// precision rounding down for the safe variants, so rounding the threshold
  /// can only make convergence harder, never easier.
  Rational epsilon = Rational(1, 1000000);
  Precision precision = Precision::Double;
  RoundingMode rounding = RoundingMode::HardwareMode;
  std::uint64_t max_sweeps = 100000000;
  /// Value queries check convergence at the initial state only; PCTL checks
  /// require every state to converge.
  bool check_all_states = false;
  std::optional<std::chrono::steady_clock::time_point> deadline;
  /// Test/debug hook, called after every sweep with the current vectors.
  std::function<void(std::uint64_t sweep, const std::vector<double>& lower,
                     const std::vector<double>& upper)>
      observer;
};

struct SolveResult {
  double lower = 0.0;
  double upper = 1.0;
  std::uint64_t sweeps = 0;
  bool stalled = false;
  Termination termination = Termination::Converged;
  std::uint64_t mode_switches = 0;
  bool rounding_fallback = false;
  /// Final vectors over the solved (possibly collapsed) state space.
  ValueVectors vectors;
  double iteration_seconds = 0.0;
};

/// Model after goal normalisation and, for max queries, MEC collapse,
/// together with the qualitative sets. This is the untimed setup phase;
/// iterate() below is the timed solver phase.
struct PreparedProblem {
  Mdp model;
  OptDir opt = OptDir::Max;
  std::vector<StateIndex> goal;        // solved space
  std::vector<StateIndex> to_solved;   // original index -> solved index
  StateIndex initial = 0;              // solved space
  QualitativeSets sets;
  std::vector<StateIndex> active;      // S \ (S0 u S1), ascending
};

inline PreparedProblem prepare(const Mdp& m, const std::vector<StateIndex>& goal,
                               OptDir opt) {
  if (goal.empty()) throw std::invalid_argument("empty goal set");
  PreparedProblem pp;
  pp.opt = opt;
  Mdp normalized = make_absorbing(m, goal);
  if (opt == OptDir::Max) {
    auto collapsed = collapse_mecs(normalized, goal);
    pp.model = std::move(collapsed.model);
    pp.to_solved = std::move(collapsed.quotient_map);
    pp.goal = std::move(collapsed.goal);
  } else {
    pp.model = std::move(normalized);
    pp.to_solved.resize(m.state_count);
    for (StateIndex s = 0; s < m.state_count; ++s) pp.to_solved[s] = s;
    pp.goal = goal;
  }
  pp.initial = pp.to_solved[m.initial];
  pp.sets = qualitative_sets(pp.model, pp.goal, opt);
  for (StateIndex s = 0; s < pp.model.state_count; ++s)
    if (!pp.sets.s0[s] && !pp.sets.s1[s]) pp.active.push_back(s);
  return pp;
}

/// l = 1 on S1 and 0 elsewhere; u = 0 on S0 and 1 elsewhere.
inline ValueVectors initialize(const Mdp& m, const QualitativeSets& q) {
  ValueVectors vv;
  vv.lower.assign(m.state_count, 0.0);
  vv.upper.assign(m.state_count, 1.0);
  for (StateIndex s = 0; s < m.state_count; ++s) {
    if (q.s1[s]) vv.lower[s] = 1.0;
    if (q.s0[s]) vv.upper[s] = 0.0;
  }
  return vv;
}

/// One Bellman update for state s: optimum over transitions of the branch
/// probability-weighted sum of v. Branch probabilities are converted with
/// rational_to in the same direction; sums run in stored branch order and the
/// optimum in stored transition order.
template <typename T>
inline T bellman(const Mdp& m, StateIndex s, std::span<const T> v, OptDir opt,
                 Direction dir, Rounder& r) {
  T best = 0;
  bool first = true;
  for (const auto& tr : m.transitions[s]) {
    T acc = 0;
    for (const auto& b : tr.branches) {
      T p = rational_to<T>(b.prob, dir);
      acc = r.add(acc, r.mul(p, static_cast<T>(v[b.target]), dir), dir);
    }
    if (first)
      best = acc;
    else
      best = opt == OptDir::Max ? std::max(best, acc) : std::min(best, acc);
    first = false;
  }
  return best;
}

/// Relative-width convergence test: (u - l) / l <= eps with the subtraction
/// and division rounded in dir. Width zero converges regardless of l (this
/// covers the 0/0 case); positive width over l = 0 divides to +infinity and
/// never converges.
template <typename T>
inline bool check_convergence(T l, T u, T eps, Direction dir, Rounder& r) {
  if (l == u) return true;
  T rel = r.div(r.sub(u, l, dir), l, dir);
  return rel <= eps;
}

namespace detail {

template <typename T>
struct FlatModel {
  // Branches of active states only, grouped by transition.
  std::vector<std::uint32_t> state_begin;  // per active state, into trans_begin
  std::vector<std::uint32_t> trans_begin;  // per transition, into targets
  std::vector<StateIndex> targets;
  std::vector<T> prob_lower;  // conversion direction Down (Nearest if unsafe)
  std::vector<T> prob_upper;  // conversion direction Up (Nearest if unsafe)
};

template <typename T>
FlatModel<T> flatten(const Mdp& m, const std::vector<StateIndex>& active, bool safe) {
  FlatModel<T> f;
  for (StateIndex s : active) {
    f.state_begin.push_back(static_cast<std::uint32_t>(f.trans_begin.size()));
    for (const auto& tr : m.transitions[s]) {
      f.trans_begin.push_back(static_cast<std::uint32_t>(f.targets.size()));
      for (const auto& b : tr.branches) {
        f.targets.push_back(b.target);
        if (safe) {
          f.prob_lower.push_back(rational_to<T>(b.prob, Direction::Down));
          f.prob_upper.push_back(rational_to<T>(b.prob, Direction::Up));
        } else {
          T p = rational_to<T>(b.prob, Direction::Nearest);
          f.prob_lower.push_back(p);
          f.prob_upper.push_back(p);
        }
      }
    }
  }
  f.state_begin.push_back(static_cast<std::uint32_t>(f.trans_begin.size()));
  f.trans_begin.push_back(static_cast<std::uint32_t>(f.targets.size()));
  return f;
}

struct HwOps {
  template <typename T>
  static T add(T a, T b, Direction) { return env_add(a, b); }
  template <typename T>
  static T mul(T a, T b, Direction) { return env_mul(a, b); }
  template <typename T>
  static T sub(T a, T b, Direction) { return env_sub(a, b); }
  template <typename T>
  static T div(T a, T b, Direction) { return env_div(a, b); }
};

struct NudgeOps {
  template <typename T>
  static T add(T a, T b, Direction d) { return nudge_add(a, b, d); }
  template <typename T>
  static T mul(T a, T b, Direction d) { return nudge_mul(a, b, d); }
  template <typename T>
  static T sub(T a, T b, Direction d) { return nudge_sub(a, b, d); }
  template <typename T>
  static T div(T a, T b, Direction d) { return nudge_div(a, b, d); }
};

template <typename T, typename Ops>
SolveResult run_iteration(const PreparedProblem& pp, const SolveConfig& cfg,
                          Rounder& rounder) {
  const bool safe = is_safe(cfg.variant);
  const bool interleaved = is_interleaved(cfg.variant);
  const bool hw = rounder.mode() == RoundingMode::HardwareMode;
  const Direction dir_l = safe ? Direction::Down : Direction::Nearest;
  const Direction dir_u = safe ? Direction::Up : Direction::Nearest;
  const Direction dir_c = safe ? Direction::Up : Direction::Nearest;
  const OptDir opt = pp.opt;

  SolveResult res;
  res.rounding_fallback = rounder.fell_back_to_nudge();

  auto started = std::chrono::steady_clock::now();
  auto finish = [&](Termination t, const std::vector<T>& l, const std::vector<T>& u,
                    std::uint64_t sweeps, bool changed) {
    res.termination = t;
    res.stalled = t == Termination::Stalled;
    res.sweeps = sweeps;
    res.mode_switches = rounder.mode_switches();
    res.vectors.lower.assign(l.begin(), l.end());
    res.vectors.upper.assign(u.begin(), u.end());
    res.vectors.changed = changed;
    res.lower = l[pp.initial];
    res.upper = u[pp.initial];
    res.iteration_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return res;
  };

  FlatModel<T> fm = flatten<T>(pp.model, pp.active, safe);
  ValueVectors init = initialize(pp.model, pp.sets);
  std::vector<T> l(init.lower.begin(), init.lower.end());
  std::vector<T> u(init.upper.begin(), init.upper.end());
  const T eps = rational_to<T>(cfg.epsilon, safe ? Direction::Down : Direction::Nearest);
  const T one = 1;

  // Nothing to iterate: every relevant state is qualitatively decided.
  if (pp.active.empty() || (!cfg.check_all_states && pp.sets.s0[pp.initial]) ||
      (!cfg.check_all_states && pp.sets.s1[pp.initial]))
    return finish(Termination::Converged, l, u, 0, false);

  const std::size_t n_active = pp.active.size();
  auto bellman_flat = [&](std::size_t ai, const std::vector<T>& v,
                          const std::vector<T>& probs, Direction d) {
    T best = 0;
    for (std::uint32_t ti = fm.state_begin[ai]; ti < fm.state_begin[ai + 1]; ++ti) {
      T acc = 0;
      for (std::uint32_t bi = fm.trans_begin[ti]; bi < fm.trans_begin[ti + 1]; ++bi)
        acc = Ops::add(acc, Ops::mul(probs[bi], v[fm.targets[bi]], d), d);
      if (ti == fm.state_begin[ai])
        best = acc;
      else
        best = opt == OptDir::Max ? std::max(best, acc) : std::min(best, acc);
    }
    return best;
  };

  bool changed = false;
  auto update_lower = [&](std::size_t ai) {
    StateIndex s = pp.active[ai];
    T v = bellman_flat(ai, l, fm.prob_lower, dir_l);
    v = std::min(v, one);
    if (v != l[s]) {
      l[s] = v;
      changed = true;
    }
  };
  auto update_upper = [&](std::size_t ai) {
    StateIndex s = pp.active[ai];
    T v = bellman_flat(ai, u, fm.prob_upper, dir_u);
    v = std::min(v, one);
    if (v != u[s]) {
      u[s] = v;
      changed = true;
    }
  };
  auto converged = [&] {
    if (cfg.check_all_states) {
      for (StateIndex s : pp.active)
        if (!check_convergence(l[s], u[s], eps, dir_c, rounder)) return false;
      return true;
    }
    return check_convergence(l[pp.initial], u[pp.initial], eps, dir_c, rounder);
  };

  std::uint64_t sweep = 0;
  Termination reason = Termination::SweepLimit;
  while (true) {
    ++sweep;
    changed = false;
    if (interleaved) {
      for (std::size_t ai = 0; ai < n_active; ++ai) {
        if (safe && hw) rounder.set_direction(Direction::Down);
        update_lower(ai);
        if (safe && hw) rounder.set_direction(Direction::Up);
        update_upper(ai);
      }
    } else {
      if (safe && hw) rounder.set_direction(Direction::Down);
      for (std::size_t ai = 0; ai < n_active; ++ai) update_lower(ai);
      if (safe && hw) rounder.set_direction(Direction::Up);
      for (std::size_t ai = 0; ai < n_active; ++ai) update_upper(ai);
    }
    if (cfg.observer) {
      std::vector<double> dl(l.begin(), l.end()), du(u.begin(), u.end());
      cfg.observer(sweep, dl, du);
    }
    if (converged()) {
      reason = Termination::Converged;
      break;
    }
    if (!changed) {
      reason = Termination::Stalled;
      break;
    }
    if (sweep >= cfg.max_sweeps) {
      reason = Termination::SweepLimit;
      break;
    }
    if (cfg.deadline && (sweep & 63) == 0 &&
        std::chrono::steady_clock::now() > *cfg.deadline) {
      reason = Termination::TimedOut;
      break;
    }
  }
  if (safe && hw) rounder.set_direction(Direction::Nearest);
  return finish(reason, l, u, sweep, changed);
}

}  // namespace detail

/// The timed iteration phase. Builds the directed probability tables, runs the
/// configured kernel until convergence, stall, sweep limit, or deadline, and
/// returns both bounds (never a midpoint). For the safe variants the exact
/// reachability value is contained in [lower, upper] whenever the function
/// returns, converged or not.
inline SolveResult iterate(const PreparedProblem& pp, const SolveConfig& cfg) {
  if (cfg.epsilon <= 0) throw std::invalid_argument("epsilon must be positive");
  if (cfg.max_sweeps < 1) throw std::invalid_argument("max_sweeps must be at least 1");
  Rounder rounder(cfg.rounding);
  const bool hw = rounder.mode() == RoundingMode::HardwareMode;
  if (cfg.precision == Precision::Single) {
    if (hw) return detail::run_iteration<float, detail::HwOps>(pp, cfg, rounder);
    return detail::run_iteration<float, detail::NudgeOps>(pp, cfg, rounder);
  }
  if (hw) return detail::run_iteration<double, detail::HwOps>(pp, cfg, rounder);
  return detail::run_iteration<double, detail::NudgeOps>(pp, cfg, rounder);
}

/// Preprocess and solve in one call.
inline SolveResult solve(const Mdp& m, const std::vector<StateIndex>& goal, OptDir opt,
                         const SolveConfig& cfg) {
  PreparedProblem pp = prepare(m, goal, opt);
  return iterate(pp, cfg);
}

}  // namespace probound
