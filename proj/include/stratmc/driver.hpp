#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "stratmc/allocation.hpp"
#include "stratmc/alpha_control.hpp"
#include "stratmc/distributions.hpp"
#include "stratmc/geometry.hpp"
#include "stratmc/splitting.hpp"
#include "stratmc/statistics.hpp"

namespace stratmc {

enum class GeometryKind { Rectangles, Simplices };

enum class ReserveMode { Auto, On, Off };  // Auto reserves when alpha > 0.5

struct DriverConfig {
  int dimension = 1;
  GeometryKind geometry = GeometryKind::Rectangles;
  std::int64_t budget = 10'000;              // hard cap on model evaluations
  std::int64_t samples_per_stratum = 10;     // average new samples per stratum
  std::int64_t initial_samples = 0;          // 0 -> max(30, 10 n)
  std::int64_t min_split_samples = 0;        // 0 -> max(4, 2 c)
  ReserveMode reserve = ReserveMode::Auto;
  AlphaSchedule alpha = AlphaSchedule::fixed(0.0);
  std::uint64_t seed = 0;
  KdeConfig kde = KdeConfig::relative();

  std::int64_t resolved_initial_samples() const {
    return initial_samples > 0 ? initial_samples
                               : std::max<std::int64_t>(30, 10 * dimension);
  }

  std::int64_t resolved_min_split_samples() const {
    return min_split_samples > 0
               ? min_split_samples
               : std::max<std::int64_t>(4, 2 * samples_per_stratum);
  }
};

struct IterationRow {
  std::int64_t n_total = 0;
  std::int64_t n_strata = 0;
  bool split_performed = false;
  double v_hat = 0.0;
  double alpha = 0.0;
};

struct RunReport {
  double estimate = 0.0;
  double v_hat = 0.0;
  std::int64_t n_strata = 0;
  std::vector<double> alpha_history;
  std::vector<IterationRow> iterations;
  std::int64_t evaluations = 0;
};

// Summary with kernel-smoothed kurtosis per stratum; a stratum with zero
// plain stddev gets the smoothed one so the objective stays defined.
inline StrataSummary kde_summary(const Stratification& strat,
                                 const KdeConfig& kde) {
  StrataSummary s;
  s.p.reserve(strat.strata.size());
  s.sigma.reserve(strat.strata.size());
  s.kappa.reserve(strat.strata.size());
  const double global_range = strat.value_range();
  const double floor =
      std::max(kde.floor, 1e-6 * (global_range > 0.0 ? global_range : 1.0));
  for (const auto& st : strat.strata) {
    s.p.push_back(st.p);
    double sigma = st.stats.stddev();
    double kappa = 3.0;
    if (!st.values.empty()) {
      double lo = st.values.front();
      double hi = st.values.front();
      for (double v : st.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      KdeConfig cfg = kde;
      cfg.floor = floor;
      const double delta = cfg.bandwidth(hi - lo);
      kappa = kde_kurtosis(st.values, delta);
      if (sigma == 0.0) {
        // Smoothed second moment about the mean: population variance + delta^2.
        double c2 = 0.0;
        double mean = 0.0;
        for (double v : st.values) mean += v;
        mean /= static_cast<double>(st.values.size());
        for (double v : st.values) c2 += (v - mean) * (v - mean);
        c2 /= static_cast<double>(st.values.size());
        sigma = std::sqrt(c2 + delta * delta);
      }
    }
    s.sigma.push_back(sigma);
    s.kappa.push_back(std::max(kappa, 1.0));
  }
  s.n_samples = strat.n_total;
  return s;
}

// Largest-remainder apportionment of total across weights; returns the
// number of samples handed out (= total for positive weights).
inline std::int64_t apportion_proportional(std::span<const double> weights,
                                           std::int64_t total,
                                           std::vector<std::int64_t>& counts) {
  double weight_sum = 0.0;
  for (double w : weights) weight_sum += w;
  if (!(weight_sum > 0.0) || total <= 0) return 0;
  std::vector<std::pair<double, std::size_t>> fractions(weights.size());
  std::int64_t handed = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double share = static_cast<double>(total) * weights[i] / weight_sum;
    const auto base = static_cast<std::int64_t>(share);
    counts[i] += base;
    handed += base;
    fractions[i] = {share - static_cast<double>(base), i};
  }
  std::sort(fractions.begin(), fractions.end(), [](const auto& a, const auto& b) {
    return a.first > b.first || (a.first == b.first && a.second < b.second);
  });
  for (std::size_t k = 0; handed < total && k < fractions.size(); ++k) {
    counts[fractions[k].second] += 1;
    ++handed;
  }
  return handed;
}

// Variance estimate of the stratified mean from per-stratum empirical
// variances; strata without samples contribute nothing here.
inline double estimator_variance(const Stratification& strat) {
  double v = 0.0;
  for (const auto& st : strat.strata) {
    if (st.stats.count >= 1) {
      v += st.p * st.p * st.stats.variance() / static_cast<double>(st.stats.count);
    }
  }
  return v;
}

// The adaptive loop: draw an initial proportional batch, then repeat
// split / allocate / evaluate / refresh alpha until the budget is spent.
class AdaptiveSampler {
 public:
  AdaptiveSampler(DriverConfig config, const ModelFunction& model)
      : config_(std::move(config)), model_(model) {
    if (config_.dimension != model_.dimension()) {
      throw std::invalid_argument("AdaptiveSampler: model dimension mismatch");
    }
    alpha_current_ = config_.alpha.mode == AlphaSchedule::Mode::Fixed
                         ? config_.alpha.fixed_value
                         : 0.0;
  }

  // Evaluates the initial sample set under proportional allocation on the
  // trivial stratification, then forms the coarse stratification (single
  // box, or the empirically best simplex tessellation) and seeds the
  // tentative-split tables.
  void initialize() {
    const std::int64_t n_init = config_.resolved_initial_samples();
    if (n_init > config_.budget) {
      throw std::invalid_argument("AdaptiveSampler: budget below initial batch");
    }
    const int n = config_.dimension;
    RandomSource rng(config_.seed, StreamId{0, 0});
    const Geometry cube{HyperRectangle::unit_cube(n)};
    std::vector<Point> points =
        sample_uniform(cube, rng, static_cast<std::size_t>(n_init));
    std::vector<double> values(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) values[i] = model_(points[i]);

    strat_ = Stratification{};
    if (config_.geometry == GeometryKind::Rectangles) {
      strat_.strata.emplace_back(strat_.fresh_id(), cube, 1.0);
      for (std::size_t i = 0; i < points.size(); ++i) {
        strat_.add_sample(0, std::move(points[i]), values[i]);
      }
    } else {
      TessellationChoice choice =
          select_initial_tessellation(n, points, values, alpha_current_);
      double factorial = 1.0;
      for (int i = 2; i <= n; ++i) factorial *= i;
      for (auto& sx : choice.simplices) {
        strat_.strata.emplace_back(strat_.fresh_id(), Geometry(std::move(sx)),
                                   1.0 / factorial);
      }
      for (std::size_t i = 0; i < points.size(); ++i) {
        strat_.add_sample(choice.assignment[i], std::move(points[i]), values[i]);
      }
    }
    initialized_ = true;
  }

  // Adopts a prepared stratification (no samples are drawn).
  void adopt(Stratification strat) {
    strat_ = std::move(strat);
    initialized_ = true;
  }

  // One loop pass: a single split attempt, then a batch of new samples
  // under the current rates, then the alpha refresh. Returns false once
  // the budget is exhausted.
  bool iterate() {
    if (!initialized_) throw std::logic_error("AdaptiveSampler: not initialized");
    if (strat_.n_total >= config_.budget) return false;

    bool split_done = false;
    const auto candidate = select_split(strat_, alpha_current_,
                                        config_.resolved_min_split_samples(),
                                        config_.alpha.alpha_max);
    if (candidate) {
      execute_split(strat_, *candidate);
      split_done = true;
    }

    const auto n_strata = static_cast<std::int64_t>(strat_.strata.size());
    const std::int64_t batch =
        batch_size(n_strata, config_.samples_per_stratum,
                   config_.budget - strat_.n_total);
    if (batch <= 0) return false;

    const StrataSummary summary = strat_.summary();
    const TargetRates rates = target_rates(summary.p, summary.sigma, alpha_current_);

    std::vector<std::int64_t> current(strat_.strata.size());
    for (std::size_t i = 0; i < strat_.strata.size(); ++i) {
      current[i] = strat_.strata[i].stats.count;
    }

    // Strata that have never been sampled take one sample off the top of
    // the batch so the final estimator never sees an empty stratum.
    std::vector<std::int64_t> counts(strat_.strata.size(), 0);
    std::int64_t allocated = 0;
    for (std::size_t i = 0; i < strat_.strata.size() && allocated < batch; ++i) {
      if (current[i] == 0) {
        counts[i] = 1;
        ++allocated;
      }
    }

    // The proportional fraction of every batch flows unconditionally, sized
    // by measure. The sequential rule alone cannot deliver it while the
    // rate targets are in chronic catch-up, and a stratum whose stddev was
    // misjudged as zero must keep receiving p-proportional samples or the
    // misjudgment can never be corrected.
    if (alpha_current_ > 0.0) {
      const auto floor_batch = static_cast<std::int64_t>(
          std::llround((1.0 - alpha_current_) * static_cast<double>(batch - allocated)));
      if (floor_batch > 0) {
        allocated += apportion_proportional(summary.p, floor_batch, counts);
      }
    }

    const std::int64_t remaining = batch - allocated;
    if (remaining > 0) {
      std::vector<std::int64_t> adjusted(current);
      for (std::size_t i = 0; i < adjusted.size(); ++i) adjusted[i] += counts[i];
      const bool reserve =
          (config_.reserve == ReserveMode::On ||
           (config_.reserve == ReserveMode::Auto && alpha_current_ > 0.5)) &&
          remaining >= n_strata;
      const AllocationPlan plan =
          reserve ? sequential_counts_reserve_one(rates.rates, adjusted,
                                                  strat_.n_total + allocated,
                                                  remaining)
                  : sequential_counts(rates.rates, adjusted,
                                      strat_.n_total + allocated, remaining);
      for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += plan.counts[i];
    }

    const std::uint64_t iteration_stream = static_cast<std::uint64_t>(strat_.iteration) + 1;
    for (std::size_t i = 0; i < strat_.strata.size(); ++i) {
      if (counts[i] <= 0) continue;
      RandomSource rng(config_.seed,
                       StreamId{strat_.strata[i].id, iteration_stream});
      std::vector<Point> pts = sample_uniform(strat_.strata[i].geometry, rng,
                                              static_cast<std::size_t>(counts[i]));
      for (auto& p : pts) {
        const double v = model_(p);
        strat_.add_sample(i, std::move(p), v);
      }
    }
    strat_.iteration += 1;

    if (config_.alpha.mode == AlphaSchedule::Mode::Dynamic) {
      alpha_current_ = update_alpha(kde_summary(strat_, config_.kde),
                                    strat_.n_total, config_.alpha);
    }
    report_.alpha_history.push_back(alpha_current_);
    report_.iterations.push_back(IterationRow{strat_.n_total,
                                              static_cast<std::int64_t>(strat_.strata.size()),
                                              split_done, estimator_variance(strat_),
                                              alpha_current_});
    return strat_.n_total < config_.budget;
  }

  RunReport finalize() const {
    RunReport report = report_;
    double estimate = 0.0;
    for (const auto& st : strat_.strata) {
      if (st.stats.count < 1) {
        throw std::runtime_error("finalize: stratum without samples");
      }
      estimate += st.p * st.stats.mean;
    }
    report.estimate = estimate;
    report.v_hat = estimator_variance(strat_);
    report.n_strata = static_cast<std::int64_t>(strat_.strata.size());
    report.evaluations = strat_.n_total;
    return report;
  }

  RunReport run() {
    initialize();
    while (iterate()) {
    }
    return finalize();
  }

  const Stratification& stratification() const noexcept { return strat_; }
  double current_alpha() const noexcept { return alpha_current_; }

 private:
  DriverConfig config_;
  const ModelFunction& model_;
  Stratification strat_;
  RunReport report_;
  double alpha_current_ = 0.0;
  bool initialized_ = false;
};

}  // namespace stratmc
