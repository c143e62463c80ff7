#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "stratmc/driver.hpp"
#include "stratmc/problems.hpp"
#include "stratmc/random.hpp"

namespace stratmc {

// Shortest round-trippable decimal representation.
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

struct ExperimentConfig {
  std::string problem = "hypersphere2";
  GeometryKind geometry = GeometryKind::Rectangles;
  bool dynamic_alpha = false;
  double alpha = 0.0;
  double tau = 0.5;
  std::int64_t c = 10;
  std::int64_t n_max = 10'000;
  int repetitions = 100;
  std::uint64_t base_seed = 0;
  std::int64_t min_samples = 0;  // 0 -> driver default
  ReserveMode reserve = ReserveMode::Auto;
  bool measure_time = false;  // off keeps the CSV byte-deterministic
  std::string out = "results.csv";
  std::string cache_dir = ".";

  std::string alpha_label() const {
    if (dynamic_alpha) return "dynamic";
    std::ostringstream os;
    os << alpha;
    return os.str();
  }

  DriverConfig driver_config(const Problem& problem_spec,
                             std::uint64_t seed) const {
    DriverConfig d;
    d.dimension = problem_spec.dimension;
    d.geometry = geometry;
    d.budget = n_max;
    d.samples_per_stratum = c;
    d.min_split_samples = min_samples;
    d.reserve = reserve;
    d.alpha = dynamic_alpha ? AlphaSchedule::dynamic(tau)
                            : AlphaSchedule::fixed(alpha);
    d.seed = seed;
    return d;
  }
};

struct RepetitionRow {
  int rep = 0;
  std::uint64_t seed = 0;
  double estimate = 0.0;
  double v_hat = 0.0;
  std::int64_t n_strata = 0;
  std::int64_t evals = 0;
  double alpha_final = 0.0;
  std::int64_t wall_ms = 0;
};

struct ExperimentSummary {
  ExperimentConfig config;
  std::vector<RepetitionRow> rows;
  double mean_estimate = 0.0;
  double var_across_reps = std::numeric_limits<double>::quiet_NaN();
  double ref_var_q = std::numeric_limits<double>::quiet_NaN();
  double speedup = std::numeric_limits<double>::quiet_NaN();
};

struct ReferenceStats {
  double mean = 0.0;
  double variance = 0.0;
  std::int64_t samples = 0;
  std::uint64_t seed = 0;
};

inline constexpr std::uint64_t kReferenceStream = ~std::uint64_t{0};

// Plain Monte Carlo moments of the problem, cached in a sidecar file keyed
// by problem id; recomputed only when absent or keyed differently.
inline ReferenceStats reference_statistics(const Problem& problem,
                                           std::uint64_t seed,
                                           const std::string& cache_dir,
                                           std::int64_t n_samples = 1'000'000) {
  namespace fs = std::filesystem;
  const fs::path path = fs::path(cache_dir) / ("ref_" + problem.id + ".json");
  if (fs::exists(path)) {
    std::ifstream in(path);
    nlohmann::json j;
    in >> j;
    if (j.value("problem", "") == problem.id &&
        j.value("seed", std::uint64_t{0}) == seed &&
        j.value("samples", std::int64_t{0}) == n_samples) {
      return ReferenceStats{j["mean"], j["variance"], n_samples, seed};
    }
  }
  ModelFunction model(problem.dimension, problem.evaluator);
  RandomSource rng(seed, StreamId{kReferenceStream, 0});
  StratumStats stats;
  std::vector<double> u(problem.dimension);
  for (std::int64_t i = 0; i < n_samples; ++i) {
    for (double& x : u) x = rng.next_unit();
    stats.update(model(u));
  }
  const ReferenceStats ref{stats.mean, stats.variance(), n_samples, seed};
  if (!cache_dir.empty()) {
    fs::create_directories(path.parent_path());
    nlohmann::json j;
    j["problem"] = problem.id;
    j["seed"] = seed;
    j["samples"] = n_samples;
    j["mean"] = ref.mean;
    j["variance"] = ref.variance;
    std::ofstream out(path);
    out << j.dump(2) << "\n";
  }
  return ref;
}

inline constexpr const char* kRepetitionHeader =
    "rep,seed,estimate,v_hat,n_strata,evals,alpha_final,wall_ms";
inline constexpr const char* kSummaryHeader =
    "problem,geometry,alpha_mode,c,n_max,reps,mean_estimate,var_estimator,"
    "ref_var_q,speedup";

inline std::string geometry_label(GeometryKind kind) {
  return kind == GeometryKind::Rectangles ? "hyperrect" : "simplex";
}

inline void write_repetition_csv(const std::string& path,
                                 const std::vector<RepetitionRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << kRepetitionHeader << "\n";
  for (const auto& r : rows) {
    out << r.rep << ',' << r.seed << ',' << format_double(r.estimate) << ','
        << format_double(r.v_hat) << ',' << r.n_strata << ',' << r.evals << ','
        << format_double(r.alpha_final) << ',' << r.wall_ms << "\n";
  }
}

inline std::string summary_csv_line(const ExperimentSummary& s) {
  std::ostringstream os;
  os << s.config.problem << ',' << geometry_label(s.config.geometry) << ','
     << s.config.alpha_label() << ',' << s.config.c << ',' << s.config.n_max
     << ',' << s.config.repetitions << ',' << format_double(s.mean_estimate)
     << ',' << (std::isnan(s.var_across_reps) ? "" : format_double(s.var_across_reps))
     << ',' << format_double(s.ref_var_q) << ','
     << (std::isnan(s.speedup) ? "" : format_double(s.speedup));
  return os.str();
}

// Runs the configured number of adaptive repetitions (seed = base + rep),
// writes one CSV row per repetition, and summarizes the empirical speedup
// against the cached plain Monte Carlo reference.
inline ExperimentSummary run_experiment(const ExperimentConfig& config) {
  if (config.repetitions < 1) throw std::invalid_argument("run_experiment: repetitions >= 1");
  const Problem problem = make_problem(config.problem);
  const ReferenceStats ref =
      reference_statistics(problem, config.base_seed, config.cache_dir);
  ModelFunction model(problem.dimension, problem.evaluator);

  ExperimentSummary summary;
  summary.config = config;
  summary.ref_var_q = ref.variance;

  StratumStats estimates;
  for (int rep = 0; rep < config.repetitions; ++rep) {
    const std::uint64_t seed = config.base_seed + static_cast<std::uint64_t>(rep);
    const auto t0 = std::chrono::steady_clock::now();
    AdaptiveSampler sampler(config.driver_config(problem, seed), model);
    const RunReport report = sampler.run();
    const auto t1 = std::chrono::steady_clock::now();
    RepetitionRow row;
    row.rep = rep;
    row.seed = seed;
    row.estimate = report.estimate;
    row.v_hat = report.v_hat;
    row.n_strata = report.n_strata;
    row.evals = report.evaluations;
    row.alpha_final =
        report.alpha_history.empty() ? 0.0 : report.alpha_history.back();
    row.wall_ms =
        config.measure_time
            ? std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count()
            : 0;
    summary.rows.push_back(row);
    estimates.update(report.estimate);
  }

  summary.mean_estimate = estimates.mean;
  if (config.repetitions >= 2) {
    summary.var_across_reps = estimates.variance();
    const double mc_variance = ref.variance / static_cast<double>(config.n_max);
    if (summary.var_across_reps > 0.0) {
      summary.speedup = mc_variance / summary.var_across_reps;
    } else {
      summary.speedup = std::numeric_limits<double>::infinity();
    }
  }

  if (!config.out.empty()) {
    write_repetition_csv(config.out, summary.rows);
  }
  return summary;
}

struct SweepResult {
  std::vector<ExperimentSummary> summaries;
  int failures = 0;
};

inline std::string sweep_cell_filename(const ExperimentConfig& config) {
  std::ostringstream os;
  os << config.problem << '_' << geometry_label(config.geometry) << '_'
     << config.alpha_label() << '_' << config.c << '_' << config.n_max << ".csv";
  return os.str();
}

// Runs every cell of the grid, one CSV per cell plus a merged summary
// table. Cells that fail are reported and skipped.
inline SweepResult run_sweep(std::vector<ExperimentConfig> grid,
                             const std::string& out_dir,
                             std::string* error_log = nullptr) {
  if (grid.empty()) throw std::invalid_argument("run_sweep: empty grid");
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  SweepResult result;
  std::ofstream merged(fs::path(out_dir) / "summary.csv", std::ios::binary);
  merged << kSummaryHeader << "\n";
  for (auto& config : grid) {
    config.out = (fs::path(out_dir) / sweep_cell_filename(config)).string();
    try {
      ExperimentSummary s = run_experiment(config);
      merged << summary_csv_line(s) << "\n";
      result.summaries.push_back(std::move(s));
    } catch (const std::exception& e) {
      ++result.failures;
      if (error_log) {
        *error_log += sweep_cell_filename(config) + ": " + e.what() + "\n";
      }
    }
  }
  return result;
}

}  // namespace stratmc
