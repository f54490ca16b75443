// Command-line front end: check PCTL reachability properties, run value
// queries, generate the gamma-chain model family, query the exact rational
// oracle, and benchmark solver variants to CSV.
//
// Exit codes for `check`: 0 = true, 1 = false, 2 = unknown, 3 = any error.
// Other subcommands: 0 = success, 3 = error.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "probound/probound.hpp"

namespace {

using nlohmann::json;
using namespace probound;

struct SolverFlags {
  std::string alg = "sr-sii";
  std::string epsilon = "1/1000000";
  std::string precision = "double";
  std::string rounding = "hardware";
  bool check_all_states = false;
  std::uint64_t max_sweeps = 100000000;
  std::string format = "text";
  double timeout = 0.0;
};

void add_solver_flags(CLI::App* cmd, SolverFlags& f) {
  cmd->add_option("--alg", f.alg, "Solver variant")
      ->check(CLI::IsMember({"iii", "sii", "sr-iii", "sr-sii"}));
  cmd->add_option("--epsilon", f.epsilon,
                  "Relative convergence threshold, an exact rational (1/1000000)");
  cmd->add_option("--precision", f.precision, "Floating-point format")
      ->check(CLI::IsMember({"single", "double"}));
  cmd->add_option("--rounding", f.rounding,
                  "Directed-rounding strategy (hardware falls back to nudge "
                  "when mode control is unavailable)")
      ->check(CLI::IsMember({"hardware", "nudge"}));
  cmd->add_flag("--check-all-states", f.check_all_states,
                "Require convergence at every state, not only the initial one");
  cmd->add_option("--max-sweeps", f.max_sweeps, "Sweep limit");
  cmd->add_option("--format", f.format, "Report format")
      ->check(CLI::IsMember({"text", "structured"}));
  cmd->add_option("--timeout", f.timeout, "Solve timeout in seconds (0 = none)");
}

Variant variant_of(const std::string& s) {
  if (s == "iii") return Variant::III;
  if (s == "sii") return Variant::SII;
  if (s == "sr-iii") return Variant::SrIII;
  return Variant::SrSII;
}

SolveConfig config_of(const SolverFlags& f) {
  SolveConfig cfg;
  cfg.variant = variant_of(f.alg);
  cfg.epsilon = parse_rational_arg(f.epsilon);
  cfg.precision = f.precision == "single" ? Precision::Single : Precision::Double;
  cfg.rounding = f.rounding == "nudge" ? RoundingMode::Nudge : RoundingMode::HardwareMode;
  cfg.check_all_states = f.check_all_states;
  cfg.max_sweeps = f.max_sweeps;
  if (f.timeout > 0)
    cfg.deadline = std::chrono::steady_clock::now() +
                   std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                       std::chrono::duration<double>(f.timeout));
  return cfg;
}

Mdp load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file '" + path + "'");
  return parse_model(in);
}

struct Report {
  std::string model;
  std::string property;
  std::optional<Verdict> verdict;
  SolveResult res;
  SolveConfig cfg;
};

json to_json(const Report& r) {
  json j;
  j["model"] = r.model;
  if (!r.property.empty()) j["property"] = r.property;
  if (r.verdict) j["verdict"] = to_string(*r.verdict);
  j["lower_hex"] = hex_float(r.res.lower);
  j["lower"] = decimal_float(r.res.lower);
  j["upper_hex"] = hex_float(r.res.upper);
  j["upper"] = decimal_float(r.res.upper);
  j["variant"] = to_string(r.cfg.variant);
  j["precision"] = to_string(r.cfg.precision);
  j["strategy"] = to_string(r.cfg.rounding);
  j["epsilon"] = format_rational(r.cfg.epsilon);
  j["sweeps"] = r.res.sweeps;
  j["status"] = to_string(r.res.termination);
  j["stalled"] = r.res.stalled;
  j["mode_switches"] = r.res.mode_switches;
  j["rounding_fallback"] = r.res.rounding_fallback;
  j["time_s"] = r.res.iteration_seconds;
  return j;
}

void print_report(const Report& r, const std::string& format) {
  if (format == "structured") {
    std::cout << to_json(r).dump(2) << "\n";
    return;
  }
  std::cout << "model:         " << r.model << "\n";
  if (!r.property.empty()) std::cout << "property:      " << r.property << "\n";
  if (r.verdict) std::cout << "verdict:       " << to_string(*r.verdict) << "\n";
  std::cout << "interval:      [" << hex_float(r.res.lower) << ", "
            << hex_float(r.res.upper) << "]\n";
  std::cout << "               [" << decimal_float(r.res.lower) << ", "
            << decimal_float(r.res.upper) << "]\n";
  if (!is_safe(r.cfg.variant)) {
    double mid = 0.5 * (r.res.lower + r.res.upper);
    std::cout << "midpoint:      " << decimal_float(mid)
              << "  (unsafe variant: no correctness guarantee)\n";
  }
  std::cout << "config:        " << to_string(r.cfg.variant) << ", "
            << to_string(r.cfg.precision) << ", " << to_string(r.cfg.rounding)
            << (r.res.rounding_fallback ? " (fell back to nudge)" : "")
            << ", epsilon " << format_rational(r.cfg.epsilon) << "\n";
  std::cout << "sweeps:        " << r.res.sweeps << "\n";
  std::cout << "status:        " << to_string(r.res.termination) << "\n";
  std::cout << "mode-switches: " << r.res.mode_switches << "\n";
  char t[32];
  std::snprintf(t, sizeof t, "%.6f", r.res.iteration_seconds);
  std::cout << "time:          " << t << " s\n";
}

int run_check(const std::string& model_path, const std::string& property_text,
              const SolverFlags& flags, bool refine_unknown) {
  Mdp m = load_model(model_path);
  PropertySpec prop = parse_property(property_text);
  auto goal = label_states(m, prop.goal_label);
  SolveConfig cfg = config_of(flags);
  cfg.check_all_states = true;  // threshold semantics quantify over states
  PreparedProblem pp = prepare(m, goal, prop.opt);
  SolveResult res = iterate(pp, cfg);

  Report rep{model_path, property_text, std::nullopt, res, cfg};
  if (const auto* th = std::get_if<Threshold>(&prop.query)) {
    Verdict v = evaluate(res.lower, res.upper, th->cmp, th->bound);
    if (v == Verdict::Unknown && refine_unknown) {
      SolveConfig finer = cfg;
      finer.epsilon = cfg.epsilon / 100;
      rep.res = iterate(pp, finer);
      rep.cfg = finer;
      v = evaluate(rep.res.lower, rep.res.upper, th->cmp, th->bound);
    }
    rep.verdict = v;
  }
  print_report(rep, flags.format);
  if (!rep.verdict) return 0;
  switch (*rep.verdict) {
    case Verdict::True: return 0;
    case Verdict::False: return 1;
    case Verdict::Unknown: return 2;
  }
  return 3;
}

int run_solve(const std::string& model_path, const std::string& label,
              const std::string& opt_name, const SolverFlags& flags) {
  Mdp m = load_model(model_path);
  auto goal = label_states(m, label);
  OptDir opt = opt_name == "min" ? OptDir::Min : OptDir::Max;
  SolveConfig cfg = config_of(flags);
  SolveResult res = solve(m, goal, opt, cfg);
  Report rep{model_path,
             "P" + std::string(to_string(opt)) + "=? [ F \"" + label + "\" ]",
             std::nullopt, res, cfg};
  print_report(rep, flags.format);
  return 0;
}

int run_oracle(const std::string& model_path, const std::string& label,
               const std::string& opt_name, std::uint64_t limit) {
  Mdp m = load_model(model_path);
  auto goal = label_states(m, label);
  OptDir opt = opt_name == "min" ? OptDir::Min : OptDir::Max;
  ExactResult res = exact_reachability(m, goal, opt, limit);
  std::cout << format_rational(res.value) << "\n";
  return 0;
}

int run_gen(std::uint32_t n, const std::string& gamma_text, const std::string& out_path) {
  Rational gamma = parse_rational_arg(gamma_text);
  std::string text = serialize_model(build_counterexample(n, gamma));
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write '" + out_path + "'");
    out << text;
  }
  return 0;
}

int run_bench(const std::vector<std::string>& model_paths, const std::string& label,
              const std::string& opt_name, const std::vector<std::string>& algs,
              const std::vector<std::string>& strategies,
              const std::vector<std::string>& precisions, unsigned reps,
              const std::string& epsilon, double timeout, const std::string& out_path) {
  BenchGrid grid;
  grid.repetitions = reps;
  grid.epsilon = parse_rational_arg(epsilon);
  if (timeout > 0) grid.timeout_seconds = timeout;
  if (!algs.empty()) {
    grid.variants.clear();
    for (const auto& a : algs) grid.variants.push_back(variant_of(a));
  }
  if (!strategies.empty()) {
    grid.strategies.clear();
    for (const auto& s : strategies)
      grid.strategies.push_back(s == "nudge" ? RoundingMode::Nudge
                                             : RoundingMode::HardwareMode);
  }
  if (!precisions.empty()) {
    grid.precisions.clear();
    for (const auto& p : precisions)
      grid.precisions.push_back(p == "single" ? Precision::Single : Precision::Double);
  }
  std::vector<BenchModel> models;
  for (const auto& path : model_paths) {
    BenchModel bm;
    bm.name = path;
    bm.model = load_model(path);
    bm.goal = label_states(bm.model, label);
    bm.opt = opt_name == "min" ? OptDir::Min : OptDir::Max;
    models.push_back(std::move(bm));
  }
  std::string csv = bench_csv(run_bench(models, grid));
  if (out_path.empty()) {
    std::cout << csv;
  } else {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write '" + out_path + "'");
    out << csv;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "probound: reachability probabilities in MDPs with guaranteed-correct "
      "floating-point bounds"};
  app.require_subcommand(1);

  // check
  auto* check = app.add_subcommand("check", "Check a PCTL threshold property");
  std::string check_model, check_property;
  SolverFlags check_flags;
  bool refine_unknown = false;
  check->add_option("model", check_model, "Model file")->required();
  check->add_option("property", check_property, "Property, e.g. 'P<=1/2 [ F \"plus\" ]'")
      ->required();
  add_solver_flags(check, check_flags);
  check->add_flag("--refine-unknown", refine_unknown,
                  "On unknown, retry once with epsilon/100");

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "Compute a verified value interval");
  std::string solve_model, solve_label, solve_opt = "max";
  SolverFlags solve_flags;
  solve_cmd->add_option("model", solve_model, "Model file")->required();
  solve_cmd->add_option("--label", solve_label, "Goal label")->required();
  solve_cmd->add_option("--opt", solve_opt, "Optimisation direction")
      ->check(CLI::IsMember({"max", "min"}));
  add_solver_flags(solve_cmd, solve_flags);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a gamma-chain model");
  std::uint32_t gen_n = 1;
  std::string gen_gamma = "1/10", gen_out;
  gen->add_option("n", gen_n, "Chain length parameter")->required();
  gen->add_option("gamma", gen_gamma, "Rational in (0, 1/2)")->required();
  gen->add_option("-o,--output", gen_out, "Output file (default stdout)");

  // oracle
  auto* oracle_cmd = app.add_subcommand("oracle", "Exact rational reachability value");
  std::string oracle_model, oracle_label, oracle_opt = "max";
  std::uint64_t oracle_limit = 1000000;
  oracle_cmd->add_option("model", oracle_model, "Model file")->required();
  oracle_cmd->add_option("--label", oracle_label, "Goal label")->required();
  oracle_cmd->add_option("--opt", oracle_opt, "Optimisation direction")
      ->check(CLI::IsMember({"max", "min"}));
  oracle_cmd->add_option("--limit", oracle_limit, "Scheduler enumeration limit");

  // bench
  auto* bench = app.add_subcommand("bench", "Benchmark solver variants to CSV");
  std::vector<std::string> bench_models, bench_algs, bench_strategies, bench_precisions;
  std::string bench_label, bench_opt = "max", bench_epsilon = "1/1000000", bench_out;
  unsigned bench_reps = 3;
  double bench_timeout = 0.0;
  bench->add_option("models", bench_models, "Model files")->required();
  bench->add_option("--label", bench_label, "Goal label")->required();
  bench->add_option("--opt", bench_opt, "Optimisation direction")
      ->check(CLI::IsMember({"max", "min"}));
  bench->add_option("--alg", bench_algs, "Variants (default: all four)")
      ->check(CLI::IsMember({"iii", "sii", "sr-iii", "sr-sii"}));
  bench->add_option("--rounding", bench_strategies, "Strategies (default: both)")
      ->check(CLI::IsMember({"hardware", "nudge"}));
  bench->add_option("--precision", bench_precisions, "Precisions (default: both)")
      ->check(CLI::IsMember({"single", "double"}));
  bench->add_option("--reps", bench_reps, "Repetitions per cell");
  bench->add_option("--epsilon", bench_epsilon, "Convergence threshold");
  bench->add_option("--timeout", bench_timeout, "Per-cell timeout in seconds");
  bench->add_option("-o,--output", bench_out, "CSV output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 3;
  }

  try {
    if (check->parsed())
      return run_check(check_model, check_property, check_flags, refine_unknown);
    if (solve_cmd->parsed())
      return run_solve(solve_model, solve_label, solve_opt, solve_flags);
    if (gen->parsed()) return run_gen(gen_n, gen_gamma, gen_out);
    if (oracle_cmd->parsed())
      return run_oracle(oracle_model, oracle_label, oracle_opt, oracle_limit);
    if (bench->parsed())
      return run_bench(bench_models, bench_label, bench_opt, bench_algs,
                       bench_strategies, bench_precisions, bench_reps, bench_epsilon,
                       bench_timeout, bench_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 3;
}
