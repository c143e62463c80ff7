// Experiment runner: single experiments and grid sweeps, CSV output.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stratmc/experiment.hpp"

namespace {

stratmc::GeometryKind parse_geometry(const std::string& s) {
  if (s == "hyperrect") return stratmc::GeometryKind::Rectangles;
  if (s == "simplex") return stratmc::GeometryKind::Simplices;
  throw CLI::ValidationError("--geometry must be 'hyperrect' or 'simplex'");
}

stratmc::ReserveMode parse_reserve(const std::string& s) {
  if (s == "auto") return stratmc::ReserveMode::Auto;
  if (s == "on") return stratmc::ReserveMode::On;
  if (s == "off") return stratmc::ReserveMode::Off;
  throw CLI::ValidationError("--reserve-one must be 'auto', 'on' or 'off'");
}

void parse_alpha(const std::string& s, stratmc::ExperimentConfig& config) {
  if (s == "dynamic") {
    config.dynamic_alpha = true;
    return;
  }
  config.dynamic_alpha = false;
  config.alpha = std::stod(s);
  if (config.alpha < 0.0 || config.alpha > 0.95) {
    throw CLI::ValidationError("--alpha must be in [0, 0.95] or 'dynamic'");
  }
}

void print_summary(const stratmc::ExperimentSummary& s) {
  std::cout << stratmc::kSummaryHeader << "\n"
            << stratmc::summary_csv_line(s) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adaptive stratified sampling experiments"};
  app.require_subcommand(1);

  std::string geometry = "hyperrect";
  std::string alpha = "0";
  std::string reserve = "auto";
  stratmc::ExperimentConfig config;

  CLI::App* run = app.add_subcommand("run", "run one experiment configuration");
  run->set_config("--config", "", "key=value file; flags take precedence");
  run->add_option("--problem", config.problem,
                  "hypersphere2..hypersphere6, fault, sod, step1d");
  run->add_option("--geometry", geometry, "hyperrect or simplex");
  run->add_option("--alpha", alpha, "hybrid parameter in [0,0.95] or 'dynamic'");
  run->add_option("--tau", config.tau, "dynamic-alpha band parameter in (0,1]");
  run->add_option("--c", config.c, "average new samples per stratum per iteration");
  run->add_option("--n-max", config.n_max, "total sampling budget");
  run->add_option("--reps", config.repetitions, "number of repetitions");
  run->add_option("--seed", config.base_seed, "base seed; repetition r uses seed+r");
  run->add_option("--min-samples", config.min_samples,
                  "minimum samples before a stratum may split (0 = default)");
  run->add_option("--reserve-one", reserve, "auto, on or off");
  run->add_option("--out", config.out, "per-repetition CSV path");
  run->add_option("--cache-dir", config.cache_dir, "reference-variance cache directory");
  run->add_flag("--measure-time", config.measure_time,
                "fill wall_ms (breaks byte-for-byte reproducibility)");

  std::vector<std::string> problems = {"hypersphere2"};
  std::vector<std::string> geometries = {"hyperrect"};
  std::vector<std::string> alphas = {"0"};
  std::vector<std::int64_t> cs = {10};
  std::vector<std::int64_t> n_maxes = {10'000};
  std::string out_dir = "sweep";

  CLI::App* sweep = app.add_subcommand("sweep", "run a grid of configurations");
  sweep->set_config("--config", "", "key=value file; flags take precedence");
  sweep->add_option("--problems", problems, "problem ids")->delimiter(',');
  sweep->add_option("--geometries", geometries, "hyperrect and/or simplex")->delimiter(',');
  sweep->add_option("--alphas", alphas, "alpha values and/or 'dynamic'")->delimiter(',');
  sweep->add_option("--cs", cs, "sampling constants")->delimiter(',');
  sweep->add_option("--n-maxes", n_maxes, "budgets")->delimiter(',');
  sweep->add_option("--reps", config.repetitions, "repetitions per cell");
  sweep->add_option("--seed", config.base_seed, "base seed");
  sweep->add_option("--tau", config.tau, "dynamic-alpha band parameter");
  sweep->add_option("--min-samples", config.min_samples, "split threshold (0 = default)");
  sweep->add_option("--reserve-one", reserve, "auto, on or off");
  sweep->add_option("--out-dir", out_dir, "output directory");
  sweep->add_option("--cache-dir", config.cache_dir, "reference-variance cache directory");
  sweep->add_flag("--measure-time", config.measure_time, "fill wall_ms");

  CLI11_PARSE(app, argc, argv);

  try {
    config.reserve = parse_reserve(reserve);
    if (run->parsed()) {
      config.geometry = parse_geometry(geometry);
      parse_alpha(alpha, config);
      const stratmc::ExperimentSummary summary = stratmc::run_experiment(config);
      print_summary(summary);
      const std::filesystem::path out(config.out);
      std::filesystem::path summary_path = out;
      summary_path.replace_filename(out.stem().string() + "_summary.csv");
      std::ofstream f(summary_path, std::ios::binary);
      f << stratmc::kSummaryHeader << "\n" << stratmc::summary_csv_line(summary) << "\n";
      return 0;
    }

    std::vector<stratmc::ExperimentConfig> grid;
    for (const auto& p : problems) {
      for (const auto& g : geometries) {
        for (const auto& a : alphas) {
          for (const auto c : cs) {
            for (const auto n : n_maxes) {
              stratmc::ExperimentConfig cell = config;
              cell.problem = p;
              cell.geometry = parse_geometry(g);
              parse_alpha(a, cell);
              cell.c = c;
              cell.n_max = n;
              grid.push_back(std::move(cell));
            }
          }
        }
      }
    }
    std::string errors;
    const stratmc::SweepResult result = stratmc::run_sweep(grid, out_dir, &errors);
    std::cout << "sweep: " << result.summaries.size() << " cells completed, "
              << result.failures << " failed\n";
    if (!errors.empty()) std::cerr << errors;
    return result.failures == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
