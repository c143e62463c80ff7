// Acceptance suite: every release criterion in one binary, one line each.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "stratmc/stratmc.hpp"

namespace {

using namespace stratmc;
namespace fs = std::filesystem;

struct Criterion {
  std::string name;
  std::function<bool(std::string&)> run;
};

fs::path g_work_dir = "acceptance_work";

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

ExperimentConfig experiment(const std::string& problem, GeometryKind geometry,
                            double alpha, std::int64_t c, std::int64_t n_max,
                            int reps, const std::string& out_name) {
  ExperimentConfig cfg;
  cfg.problem = problem;
  cfg.geometry = geometry;
  cfg.alpha = alpha;
  cfg.c = c;
  cfg.n_max = n_max;
  cfg.repetitions = reps;
  cfg.base_seed = 0;
  cfg.cache_dir = (g_work_dir / "cache").string();
  cfg.out = (g_work_dir / out_name).string();
  return cfg;
}

bool criterion_ball2(std::string& detail) {
  const auto summary = run_experiment(experiment(
      "hypersphere2", GeometryKind::Rectangles, 0.9, 10, 10000, 100, "c1.csv"));
  std::ostringstream os;
  os << "empirical speedup " << summary.speedup << " (need >= 100)";
  detail = os.str();
  return summary.speedup >= 100.0;
}

bool criterion_ball3_simplex(std::string& detail) {
  const auto summary = run_experiment(experiment(
      "hypersphere3", GeometryKind::Simplices, 0.9, 10, 10000, 100, "c2.csv"));
  std::ostringstream os;
  os << "empirical speedup " << summary.speedup << " (need in [8, 80])";
  detail = os.str();
  return summary.speedup >= 8.0 && summary.speedup <= 80.0;
}

bool criterion_ball4(std::string& detail) {
  const auto summary = run_experiment(experiment(
      "hypersphere4", GeometryKind::Rectangles, 0.9, 10, 10000, 100, "c3.csv"));
  std::ostringstream os;
  os << "empirical speedup " << summary.speedup << " (need >= 3)";
  detail = os.str();
  return summary.speedup >= 3.0;
}

bool criterion_fault(std::string& detail) {
  const Problem problem = make_problem("fault");
  const ReferenceStats ref =
      reference_statistics(problem, 0, (g_work_dir / "cache").string());
  ModelFunction model(problem.dimension, problem.evaluator);
  DriverConfig cfg;
  cfg.dimension = 2;
  cfg.geometry = GeometryKind::Rectangles;
  cfg.budget = 10000;
  cfg.samples_per_stratum = 10;
  cfg.alpha = AlphaSchedule::fixed(0.0);
  cfg.seed = 0;
  AdaptiveSampler sampler(cfg, model);
  sampler.run();

  const StrataSummary summary = sampler.stratification().summary();
  const double c0 = variance_constant(summary, 0.0);
  const double ratio = speedup(ref.variance, c0);

  // A stratum contains the discontinuity when the model takes both zero
  // and positive values inside it (probed on a grid).
  double straddling_measure = 0.0;
  for (const auto& st : sampler.stratification().strata) {
    const auto& box = std::get<HyperRectangle>(st.geometry);
    bool any_zero = false;
    bool any_positive = false;
    const int grid = 32;
    for (int i = 0; i <= grid && !(any_zero && any_positive); ++i) {
      for (int j = 0; j <= grid; ++j) {
        const double x = box.lower[0] + (box.upper[0] - box.lower[0]) * i / grid;
        const double y = box.lower[1] + (box.upper[1] - box.lower[1]) * j / grid;
        const double v = problem.evaluator(std::vector<double>{x, y});
        (v > 0.0 ? any_positive : any_zero) = true;
        if (any_zero && any_positive) break;
      }
    }
    if (any_zero && any_positive) straddling_measure += st.p;
  }
  std::ostringstream os;
  os << "speedup " << ratio << " (need >= 20), discontinuity measure "
     << straddling_measure << " (need <= 0.1)";
  detail = os.str();
  return ratio >= 20.0 && straddling_measure <= 0.1;
}

bool criterion_sod(std::string& detail) {
  const auto cfg = experiment("sod", GeometryKind::Rectangles, 0.9, 10, 10000,
                              100, "c5.csv");
  const auto summary = run_experiment(cfg);
  const Problem problem = make_problem("sod");
  const ReferenceStats ref = reference_statistics(problem, 0, cfg.cache_dir);
  int covered = 0;
  for (const auto& row : summary.rows) {
    if (std::abs(row.estimate - ref.mean) <= 4.0 * std::sqrt(row.v_hat)) ++covered;
  }
  std::ostringstream os;
  os << "empirical speedup " << summary.speedup << " (need >= 5), coverage "
     << covered << "/100 (need >= 95)";
  detail = os.str();
  return summary.speedup >= 5.0 && covered >= 95;
}

bool criterion_variance_ordering(std::string& detail) {
  double worst = 0.0;
  const auto check = [&](const StrataSummary& s, double var_q) {
    const double opt = v_opt_hat(s);
    const double prop = v_prop_hat(s);
    worst = std::max(worst, opt - prop);
    worst = std::max(worst, prop - var_q / static_cast<double>(s.n_samples));
    return opt <= prop + 1e-12 &&
           prop <= var_q / static_cast<double>(s.n_samples) + 1e-12;
  };
  bool ok = true;
  for (int m : {2, 3, 4, 5, 8, 16}) {
    StrataSummary s;
    for (int i = 0; i < m; ++i) {
      HyperRectangle cell({static_cast<double>(i) / m},
                          {static_cast<double>(i + 1) / m});
      const double q = step_fraction(cell, 0.5);
      s.p.push_back(1.0 / m);
      s.sigma.push_back(std::sqrt(q * (1.0 - q)));
    }
    s.n_samples = 1000;
    ok = check(s, 0.25) && ok;
  }
  const double r = hypersphere_radius(2);
  for (int m : {2, 4, 8}) {
    StrataSummary s;
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        HyperRectangle cell(
            {static_cast<double>(i) / m, static_cast<double>(j) / m},
            {static_cast<double>(i + 1) / m, static_cast<double>(j + 1) / m});
        const double q = disc_fraction(cell, r);
        s.p.push_back(1.0 / (m * m));
        s.sigma.push_back(std::sqrt(q * (1.0 - q)));
      }
    }
    s.n_samples = 1000;
    ok = check(s, 0.25) && ok;
  }
  std::ostringstream os;
  os << "worst ordering violation " << worst << " (tolerance 1e-12)";
  detail = os.str();
  return ok;
}

bool criterion_hybrid_bound(std::string& detail) {
  RandomSource rng(424242, StreamId{0, 0});
  double worst = -1.0;
  for (int t = 0; t < 1000; ++t) {
    const int k = 2 + static_cast<int>(rng.next_u64() % 6);
    StrataSummary s;
    s.p.resize(k);
    s.sigma.resize(k);
    double total = 0.0;
    for (int i = 0; i < k; ++i) {
      s.p[i] = 0.05 + rng.next_unit();
      total += s.p[i];
    }
    for (int i = 0; i < k; ++i) s.p[i] /= total;
    for (int i = 0; i < k; ++i) s.sigma[i] = 0.05 + 2.0 * rng.next_unit();
    s.n_samples = 1;
    const double alpha = 0.01 + 0.98 * rng.next_unit();
    const double va = variance_constant(s, alpha);
    const double v0 = variance_constant(s, 0.0);
    const double v1 = variance_constant(s, 1.0);
    const double bound = std::min(v0 / (1.0 - alpha), v1 / alpha);
    worst = std::max(worst, va - bound);
    if (va > bound + 1e-12) {
      detail = "bound violated";
      return false;
    }
  }
  std::ostringstream os;
  os << "worst excess " << worst << " over 1000 instances (tolerance 1e-12)";
  detail = os.str();
  return true;
}

bool criterion_gradient(std::string& detail) {
  RandomSource rng(31337, StreamId{0, 0});
  const double h = 1e-5;
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int k = 2 + static_cast<int>(rng.next_u64() % 5);
    StrataSummary s;
    s.p.resize(k);
    s.sigma.resize(k);
    double total = 0.0;
    for (int i = 0; i < k; ++i) {
      s.p[i] = 0.05 + rng.next_unit();
      total += s.p[i];
    }
    for (int i = 0; i < k; ++i) s.p[i] /= total;
    for (int i = 0; i < k; ++i) s.sigma[i] = 0.1 + 2.0 * rng.next_unit();
    s.n_samples = 100;
    const double alpha = 0.95 * rng.next_unit();
    const auto grad = variance_constant_gradient(s, alpha);
    for (int u = 0; u < k; ++u) {
      auto hi = s;
      auto lo = s;
      hi.sigma[u] += h;
      lo.sigma[u] -= h;
      const double fd =
          (variance_constant(hi, alpha) - variance_constant(lo, alpha)) / (2.0 * h);
      const double rel = std::abs(grad[u] - fd) / std::max(1e-12, std::abs(fd));
      worst = std::max(worst, rel);
      if (rel > 1e-5) {
        std::ostringstream os;
        os << "relative error " << rel << " exceeds 1e-5";
        detail = os.str();
        return false;
      }
    }
  }
  std::ostringstream os;
  os << "worst relative error " << worst << " over 100 instances (need <= 1e-5)";
  detail = os.str();
  return true;
}

bool criterion_splitting_monotonicity(std::string& detail) {
  double worst = 0.0;
  // Step fixture on refinement chains plus the quarter-circle grid, with
  // exact conditional variances for all strata and all planes.
  const auto score_box = [&](const std::vector<HyperRectangle>& cells,
                             auto&& fraction) {
    StrataSummary s;
    for (const auto& cell : cells) {
      const double q = fraction(cell);
      s.p.push_back(measure(Geometry(cell)));
      s.sigma.push_back(std::sqrt(q * (1.0 - q)));
    }
    s.n_samples = 100;
    bool ok = true;
    for (std::size_t t = 0; t < cells.size(); ++t) {
      for (const auto& plane : split_planes(Geometry(cells[t]))) {
        const auto [minus, plus] = bisect(Geometry(cells[t]), plane);
        const double qm = fraction(std::get<HyperRectangle>(minus));
        const double qp = fraction(std::get<HyperRectangle>(plus));
        const double score = score_split(s, t, std::sqrt(qm * (1.0 - qm)),
                                         std::sqrt(qp * (1.0 - qp)), 0.0);
        worst = std::min(worst, score);
        ok = ok && score >= -1e-12;
      }
    }
    return ok;
  };

  bool ok = true;
  for (int m : {2, 4, 8}) {
    std::vector<HyperRectangle> cells1d;
    for (int i = 0; i < m; ++i) {
      cells1d.emplace_back(std::vector<double>{static_cast<double>(i) / m},
                           std::vector<double>{static_cast<double>(i + 1) / m});
    }
    ok = score_box(cells1d, [](const HyperRectangle& c) {
           return step_fraction(c, 0.5);
         }) && ok;
    std::vector<HyperRectangle> cells2d;
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        cells2d.emplace_back(
            std::vector<double>{static_cast<double>(i) / m, static_cast<double>(j) / m},
            std::vector<double>{static_cast<double>(i + 1) / m,
                                static_cast<double>(j + 1) / m});
      }
    }
    const double r = hypersphere_radius(2);
    ok = score_box(cells2d, [r](const HyperRectangle& c) {
           return disc_fraction(c, r);
         }) && ok;
  }
  std::ostringstream os;
  os << "most negative exact score " << worst << " (tolerance -1e-12)";
  detail = os.str();
  return ok;
}

bool criterion_kde_borderline(std::string& detail) {
  const std::vector<double> constant(9, 5.0);
  for (double delta : {1e-6, 0.1, 10.0}) {
    if (kde_kurtosis(constant, delta) != 3.0) {
      std::ostringstream os;
      os << "kurtosis at bandwidth " << delta << " is "
         << kde_kurtosis(constant, delta) << " (need exactly 3)";
      detail = os.str();
      return false;
    }
  }
  detail = "kurtosis exactly 3 at bandwidths 1e-6, 0.1, 10";
  return true;
}

bool criterion_failure_probability(std::string& detail) {
  RandomSource rng(5150, StreamId{0, 0});
  const double sigma2 = 1.0 / 12.0;
  double worst_margin = 1.0;
  for (std::int64_t n : {5, 10, 20, 50}) {
    for (double theta : {0.1, 0.5, 0.9}) {
      const int trials = 100000;
      int under = 0;
      for (int t = 0; t < trials; ++t) {
        StratumStats s;
        for (std::int64_t i = 0; i < n; ++i) s.update(rng.next_unit());
        under += s.variance() <= theta * sigma2;
      }
      const double freq = static_cast<double>(under) / trials;
      const double bound = underestimation_bound(n, 1.8, theta);
      worst_margin = std::min(worst_margin, bound - freq);
      if (freq > bound) {
        std::ostringstream os;
        os << "frequency " << freq << " exceeds bound " << bound << " at n=" << n
           << " theta=" << theta;
        detail = os.str();
        return false;
      }
    }
  }
  std::ostringstream os;
  os << "bound held on all 12 cells, smallest margin " << worst_margin;
  detail = os.str();
  return true;
}

bool criterion_cartesian_bounds(std::string& detail) {
  bool ok = true;
  double worst = 0.0;
  // Smooth field: coordinate sum on uniform grids, equal exact stddevs.
  for (int n : {1, 2, 3}) {
    for (int m : {2, 4, 8}) {
      std::int64_t cells = 1;
      for (int i = 0; i < n; ++i) cells *= m;
      const double w = 1.0 / m;
      const double sigma = std::sqrt(n * w * w / 12.0);
      StrataSummary s;
      s.p.assign(cells, 1.0 / static_cast<double>(cells));
      s.sigma.assign(cells, sigma);
      s.n_samples = 1000;
      for (double alpha : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        const double va = variance_constant(s, alpha) / 1000.0;
        const double bound =
            cartesian_bound_smooth(n, static_cast<double>(n), cells, 1000, alpha);
        worst = std::max(worst, va - bound);
        ok = ok && va <= bound + 1e-15;
      }
    }
  }
  // Jump field: the diagonal step on m x m grids; diagonal cells carry
  // exact variance 1/4, everything else is constant.
  for (int m : {2, 4, 8}) {
    StrataSummary s;
    std::int64_t t_count = 0;
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        HyperRectangle cell(
            {static_cast<double>(i) / m, static_cast<double>(j) / m},
            {static_cast<double>(i + 1) / m, static_cast<double>(j + 1) / m});
        const double q = diagonal_fraction(cell);
        s.p.push_back(1.0 / (m * m));
        s.sigma.push_back(std::sqrt(q * (1.0 - q)));
        t_count += q > 0.0 && q < 1.0;
      }
    }
    s.n_samples = 1000;
    for (double alpha : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      double va;
      if (alpha == 1.0) {
        va = v_opt_hat(s);  // limit form; zero-stddev strata receive nothing
      } else {
        va = variance_constant(s, alpha) / 1000.0;
      }
      const double bound =
          cartesian_bound_jump(1.0, t_count, m * m, 1000, alpha);
      worst = std::max(worst, va - bound);
      ok = ok && va <= bound + 1e-15;
    }
  }
  std::ostringstream os;
  os << "worst bound excess " << worst << " (need <= 0)";
  detail = os.str();
  return ok;
}

bool criterion_geometry_suite(std::string& detail) {
  RandomSource rng(8086, StreamId{0, 0});
  for (int n = 1; n <= 5; ++n) {
    std::int64_t factorial = 1;
    for (int i = 2; i <= n; ++i) factorial *= i;
    if (kuhn_orientation_count(n) != (1 << (n - 1))) {
      detail = "orientation count mismatch";
      return false;
    }
    const auto simplices = kuhn_decomposition(n, kuhn_orientation(n, 0));
    if (simplices.size() != static_cast<std::size_t>(factorial)) {
      detail = "simplex count mismatch";
      return false;
    }
    double total = 0.0;
    for (const auto& s : simplices) total += s.volume();
    if (std::abs(total - 1.0) > 1e-12) {
      detail = "tessellation volume sum off";
      return false;
    }

    // Halving: the tracked measure is halved exactly on every split, and
    // the geometric measure agrees to 1e-12.
    Stratification strat;
    strat.strata.emplace_back(strat.fresh_id(),
                              Geometry(HyperRectangle::unit_cube(n)), 1.0);
    RandomSource sampler_rng(99, StreamId{static_cast<std::uint64_t>(n), 1});
    for (int i = 0; i < 64; ++i) {
      Point p(n);
      for (double& x : p) x = sampler_rng.next_unit();
      strat.add_sample(0, std::move(p), sampler_rng.next_unit());
    }
    for (int step = 0; step < 6; ++step) {
      const std::size_t pick = rng.next_u64() % strat.strata.size();
      if (strat.strata[pick].stats.count < 2) continue;
      const double parent_p = strat.strata[pick].p;
      const std::size_t planes = strat.strata[pick].table.planes.size();
      SplitCandidate cand{pick, strat.strata[pick].id,
                          static_cast<std::size_t>(rng.next_u64() % planes), 1.0};
      execute_split(strat, cand);
      const double child_minus = strat.strata[pick].p;
      const double child_plus = strat.strata.back().p;
      if (child_minus != parent_p * 0.5 || child_plus != parent_p * 0.5) {
        detail = "tracked measure not halved exactly";
        return false;
      }
      const double gm = measure(strat.strata[pick].geometry);
      const double gp = measure(strat.strata.back().geometry);
      if (std::abs(gm - parent_p * 0.5) > 1e-12 ||
          std::abs(gp - parent_p * 0.5) > 1e-12) {
        detail = "geometric measure drifted from the tracked one";
        return false;
      }
    }
    double tracked = 0.0;
    for (const auto& st : strat.strata) tracked += st.p;
    if (std::abs(tracked - 1.0) > 1e-12) {
      detail = "tracked measures no longer sum to one";
      return false;
    }

    // Barycentric round trip on a random orientation.
    const int orientation = static_cast<int>(rng.next_u64()) & (kuhn_orientation_count(n) - 1);
    for (const auto& s : kuhn_decomposition(n, kuhn_orientation(n, orientation))) {
      const Geometry g(s);
      RandomSource point_rng(3 * n + orientation, StreamId{7, 7});
      for (const auto& p : sample_uniform(g, point_rng, 20)) {
        const auto lambda = s.barycentric(p);
        Point rec(n, 0.0);
        for (std::size_t i = 0; i < lambda.size(); ++i) {
          for (int d = 0; d < n; ++d) rec[d] += lambda[i] * s.vertices()[i][d];
        }
        for (int d = 0; d < n; ++d) {
          if (std::abs(rec[d] - p[d]) > 1e-10) {
            detail = "barycentric round trip above 1e-10";
            return false;
          }
        }
      }
    }
  }
  detail = "counts, orientations, volume sums, exact halving, round trips for n=1..5";
  return true;
}

bool criterion_determinism(std::string& detail) {
  const auto cfg_a = experiment("hypersphere2", GeometryKind::Rectangles, 0.9,
                                10, 10000, 100, "c14_a.csv");
  auto cfg_b = cfg_a;
  cfg_b.out = (g_work_dir / "c14_b.csv").string();
  const auto sa = run_experiment(cfg_a);
  const auto sb = run_experiment(cfg_b);
  const bool rows_equal = slurp(cfg_a.out) == slurp(cfg_b.out);
  const bool summary_equal = summary_csv_line(sa) == summary_csv_line(sb);
  detail = rows_equal && summary_equal ? "byte-identical repetition and summary CSV"
                                       : "outputs differ between identical runs";
  return rows_equal && summary_equal;
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; i += 2) {
    if (std::string(argv[i]) == "--work-dir") g_work_dir = argv[i + 1];
  }
  fs::create_directories(g_work_dir);

  const std::vector<Criterion> criteria = {
      {"1 ball n=2 hyperrect alpha=0.9 speedup >= 100", criterion_ball2},
      {"2 ball n=3 simplex alpha=0.9 speedup in [8,80]", criterion_ball3_simplex},
      {"3 ball n=4 hyperrect alpha=0.9 speedup >= 3", criterion_ball4},
      {"4 fault stress alpha=0 speedup and isolation", criterion_fault},
      {"5 shock tube alpha=0.9 speedup and coverage", criterion_sod},
      {"6 variance ordering opt <= prop <= MC", criterion_variance_ordering},
      {"7 hybrid variance bound on random instances", criterion_hybrid_bound},
      {"8 variance-constant gradient vs finite differences", criterion_gradient},
      {"9 splitting monotonicity of exact scores", criterion_splitting_monotonicity},
      {"10 kernel kurtosis of constant samples", criterion_kde_borderline},
      {"11 variance-underestimation probability bound", criterion_failure_probability},
      {"12 uniform-grid variance bounds", criterion_cartesian_bounds},
      {"13 geometry suite n=1..5", criterion_geometry_suite},
      {"14 byte-identical CSV determinism", criterion_determinism},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    std::string detail;
    bool ok = false;
    try {
      ok = criterion.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] criterion %s%s%s\n", ok ? "PASS" : "FAIL",
                criterion.name.c_str(), detail.empty() ? "" : ": ",
                detail.c_str());
    std::fflush(stdout);
    failures += !ok;
  }
  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
  } else {
    std::printf("all %zu criteria passed\n", criteria.size());
  }
  return failures;
}
