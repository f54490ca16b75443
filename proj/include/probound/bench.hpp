#pragma once

#include <algorithm>
#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "probound/iteration.hpp"
#include "probound/mdp.hpp"
#include "probound/rounding.hpp"

namespace probound {

// Benchmark harness over a grid of solver configurations. Timing covers the
// iteration phase only; parsing and preprocessing are excluded.

struct BenchGrid {
  std::vector<Variant> variants{Variant::III, Variant::SII, Variant::SrIII,
                                Variant::SrSII};
  std::vector<RoundingMode> strategies{RoundingMode::HardwareMode, RoundingMode::Nudge};
  std::vector<Precision> precisions{Precision::Single, Precision::Double};
  unsigned repetitions = 3;
  Rational epsilon = Rational(1, 1000000);
  std::uint64_t max_sweeps = 100000000;
  std::optional<double> timeout_seconds;
};

struct BenchRow {
  std::string model;
  std::string variant;
  std::string strategy;
  std::string precision;
  std::string rep;  // "1".."R" or "median"
  std::uint64_t sweeps = 0;
  std::uint64_t mode_switches = 0;
  std::string lower_hex;
  std::string upper_hex;
  double time_s = 0.0;
  std::string status;  // converged | stalled | sweep-limit | TO
};

inline const char* bench_csv_header() {
  return "model,variant,strategy,precision,rep,sweeps,mode_switches,lower_hex,"
         "upper_hex,time_s,status";
}

inline std::string to_csv_line(const BenchRow& r) {
  char t[32];
  std::snprintf(t, sizeof t, "%.6f", r.time_s);
  return r.model + "," + r.variant + "," + r.strategy + "," + r.precision + "," +
         r.rep + "," + std::to_string(r.sweeps) + "," +
         std::to_string(r.mode_switches) + "," + r.lower_hex + "," + r.upper_hex +
         "," + t + "," + r.status;
}

struct BenchModel {
  std::string name;
  Mdp model;
  std::vector<StateIndex> goal;
  OptDir opt = OptDir::Max;
};

/// One row per (model, variant, strategy, precision, repetition) plus a
/// median-of-repetitions summary row per cell. A cell that exceeds the
/// timeout is recorded with status TO and the run continues.
inline std::vector<BenchRow> run_bench(const std::vector<BenchModel>& models,
                                       const BenchGrid& grid) {
  std::vector<BenchRow> rows;
  for (const auto& bm : models) {
    PreparedProblem pp = prepare(bm.model, bm.goal, bm.opt);
    for (Variant variant : grid.variants) {
      for (RoundingMode strategy : grid.strategies) {
        for (Precision precision : grid.precisions) {
          std::vector<BenchRow> reps;
          for (unsigned rep = 1; rep <= grid.repetitions; ++rep) {
            SolveConfig cfg;
            cfg.variant = variant;
            cfg.rounding = strategy;
            cfg.precision = precision;
            cfg.epsilon = grid.epsilon;
            cfg.max_sweeps = grid.max_sweeps;
            if (grid.timeout_seconds)
              cfg.deadline = std::chrono::steady_clock::now() +
                             std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                 std::chrono::duration<double>(*grid.timeout_seconds));
            SolveResult res = iterate(pp, cfg);
            BenchRow row;
            row.model = bm.name;
            row.variant = to_string(variant);
            row.strategy = to_string(strategy);
            row.precision = to_string(precision);
            row.rep = std::to_string(rep);
            row.sweeps = res.sweeps;
            row.mode_switches = res.mode_switches;
            row.lower_hex = hex_float(res.lower);
            row.upper_hex = hex_float(res.upper);
            row.time_s = res.iteration_seconds;
            row.status = res.termination == Termination::TimedOut
                             ? "TO"
                             : to_string(res.termination);
            reps.push_back(row);
            rows.push_back(row);
          }
          // Median summary over the successful repetitions.
          std::vector<double> times;
          for (const auto& r : reps)
            if (r.status != "TO") times.push_back(r.time_s);
          BenchRow med = reps.front();
          med.rep = "median";
          if (times.empty()) {
            med.status = "TO";
          } else {
            std::sort(times.begin(), times.end());
            med.time_s = times[times.size() / 2];
          }
          rows.push_back(med);
        }
      }
    }
  }
  return rows;
}

inline std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::string out = bench_csv_header();
  out += "\n";
  for (const auto& r : rows) {
    out += to_csv_line(r);
    out += "\n";
  }
  return out;
}

}  // namespace probound
