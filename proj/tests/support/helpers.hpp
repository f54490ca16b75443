#pragma once

// Shared test utilities: a deterministic random-model generator, fixed
// regression models, exact-rational reference computations, and a small
// subprocess runner for exercising the CLI binary.

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "probound/mdp.hpp"
#include "probound/oracle.hpp"
#include "probound/rational.hpp"

namespace testutil {

using namespace probound;

// All draws go through pick() so the sequence is identical across platforms;
// the standard distributions are not portable.
inline std::uint64_t pick(std::mt19937_64& rng, std::uint64_t n) { return rng() % n; }

struct RandomModelParams {
  StateIndex max_states = 8;
  std::uint32_t max_transitions = 3;
  std::uint32_t max_branches = 4;
  std::uint32_t max_den = 10;
};

/// Valid by construction: each transition distributes a random denominator
/// d <= max_den over up to max_branches distinct targets as exact fractions.
inline Mdp random_mdp(std::mt19937_64& rng, const RandomModelParams& p = {}) {
  Mdp m;
  m.state_count = static_cast<StateIndex>(2 + pick(rng, p.max_states - 1));
  m.initial = static_cast<StateIndex>(pick(rng, m.state_count));
  m.transitions.resize(m.state_count);
  for (StateIndex s = 0; s < m.state_count; ++s) {
    // Bias toward few transitions to keep scheduler spaces enumerable.
    std::uint64_t r = pick(rng, 10);
    std::uint32_t n_trans = r < 5 ? 1 : r < 8 ? 2 : 3;
    n_trans = std::min(n_trans, p.max_transitions);
    for (std::uint32_t t = 0; t < n_trans; ++t) {
      std::uint32_t den = static_cast<std::uint32_t>(1 + pick(rng, p.max_den));
      std::uint32_t k = static_cast<std::uint32_t>(1 + pick(rng, p.max_branches));
      k = std::min({k, den, static_cast<std::uint32_t>(m.state_count)});
      // k distinct targets
      std::vector<StateIndex> targets;
      while (targets.size() < k) {
        StateIndex cand = static_cast<StateIndex>(pick(rng, m.state_count));
        if (std::find(targets.begin(), targets.end(), cand) == targets.end())
          targets.push_back(cand);
      }
      // composition of den into k positive parts
      std::vector<std::uint32_t> cuts{0, den};
      while (cuts.size() < k + 1) {
        std::uint32_t c = static_cast<std::uint32_t>(1 + pick(rng, den - 1));
        if (std::find(cuts.begin(), cuts.end(), c) == cuts.end()) cuts.push_back(c);
      }
      std::sort(cuts.begin(), cuts.end());
      Transition tr;
      for (std::uint32_t i = 0; i < k; ++i)
        tr.branches.push_back(
            Branch{targets[i], Rational(cuts[i + 1] - cuts[i], den)});
      m.transitions[s].push_back(std::move(tr));
    }
  }
  std::uint32_t goal_count = static_cast<std::uint32_t>(1 + pick(rng, 2));
  std::vector<StateIndex> goal;
  while (goal.size() < goal_count) {
    StateIndex cand = static_cast<StateIndex>(pick(rng, m.state_count));
    if (std::find(goal.begin(), goal.end(), cand) == goal.end()) goal.push_back(cand);
  }
  std::sort(goal.begin(), goal.end());
  m.labels["goal"] = goal;
  return m;
}

/// Three-state chain with a 99/100 self-loop: the rounded fixpoint sits many
/// ULPs away from the exact value 1/3, wide enough that tiny epsilons are
/// unreachable and the safe variants terminate by stall.
inline Mdp amplifier_model() {
  Mdp m;
  m.state_count = 3;
  m.initial = 0;
  m.transitions.resize(3);
  m.transitions[0].push_back(Transition{{Branch{0, Rational(99, 100)},
                                         Branch{1, Rational(1, 300)},
                                         Branch{2, Rational(1, 150)}}});
  m.transitions[1].push_back(Transition{{Branch{1, Rational(1)}}});
  m.transitions[2].push_back(Transition{{Branch{2, Rational(1)}}});
  m.labels["goal"] = {1};
  return m;
}

/// Four states, two transitions at the top: a genuinely nondeterministic
/// fixture (max picks the 2/3 branch route, min the 1/3 one).
inline Mdp branching_model() {
  Mdp m;
  m.state_count = 4;
  m.initial = 0;
  m.transitions.resize(4);
  m.transitions[0].push_back(
      Transition{{Branch{1, Rational(1, 2)}, Branch{2, Rational(1, 2)}}});
  m.transitions[0].push_back(
      Transition{{Branch{1, Rational(1, 3)}, Branch{3, Rational(2, 3)}}});
  m.transitions[1].push_back(Transition{{Branch{1, Rational(1)}}});  // goal
  m.transitions[2].push_back(
      Transition{{Branch{1, Rational(1, 4)}, Branch{3, Rational(3, 4)}}});
  m.transitions[3].push_back(Transition{{Branch{3, Rational(1)}}});  // sink
  m.labels["goal"] = {1};
  return m;
}

/// Exact Bellman value over rationals for one state, given exact values v.
inline Rational exact_bellman(const Mdp& m, StateIndex s, const std::vector<Rational>& v,
                              OptDir opt) {
  Rational best;
  bool first = true;
  for (const auto& tr : m.transitions[s]) {
    Rational acc = 0;
    for (const auto& b : tr.branches) acc += b.prob * v[b.target];
    if (first || (opt == OptDir::Max ? acc > best : acc < best)) best = acc;
    first = false;
  }
  return best;
}

struct CliResult {
  int exit_code = -1;
  std::string out;
};

inline std::filesystem::path test_tmp_dir() {
  auto dir = std::filesystem::temp_directory_path() / "probound-tests";
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

/// Runs the CLI with the given (already shell-safe) arguments.
inline CliResult run_cli(const std::string& args) {
  static int counter = 0;
  auto out_path = test_tmp_dir() / ("out-" + std::to_string(counter++) + ".txt");
  std::string cmd = std::string(PROBOUND_CLI_PATH) + " " + args + " > " +
                    out_path.string() + " 2>&1";
  int status = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out_path);
  std::filesystem::remove(out_path);
  return r;
}

}  // namespace testutil
