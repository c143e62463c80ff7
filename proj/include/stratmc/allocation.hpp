#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace stratmc {

struct TargetRates {
  std::vector<double> rates;
  bool proportional_fallback = false;  // all sigmas were zero under alpha > 0
};

// Asymptotic sampling rates q_S = (1-alpha) p_S + alpha sigma_bar_S p_S.
inline TargetRates target_rates(std::span<const double> p,
                                std::span<const double> sigma_hat,
                                double alpha) {
  if (p.size() != sigma_hat.size() || p.empty()) {
    throw std::invalid_argument("target_rates: size mismatch");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("target_rates: alpha in [0,1]");
  double w = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (sigma_hat[i] < 0.0) throw std::invalid_argument("target_rates: sigma >= 0");
    w += p[i] * sigma_hat[i];
  }
  TargetRates out;
  out.rates.resize(p.size());
  if (alpha == 0.0 || w <= 0.0) {
    out.rates.assign(p.begin(), p.end());
    out.proportional_fallback = alpha > 0.0 && w <= 0.0;
    return out;
  }
  for (std::size_t i = 0; i < p.size(); ++i) {
    out.rates[i] = (1.0 - alpha) * p[i] + alpha * (sigma_hat[i] / w) * p[i];
  }
  return out;
}

struct AllocationPlan {
  std::vector<std::int64_t> counts;
  std::int64_t total = 0;
};

namespace detail {

// Removes surplus one sample at a time, always from the stratum whose
// remaining deficit (target - current - still planned) is smallest, so each
// removal hurts the target least; the deficit updates as samples come off,
// which water-fills the batch across competing strata. Equal deficits drop
// from the larger stratum index. Reserved samples (floor 1) are never
// removed.
inline void truncate_to_batch(std::vector<std::int64_t>& counts,
                              std::vector<double> deficits,
                              std::int64_t n_new, std::int64_t floor_per_stratum) {
  std::int64_t total = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    total += counts[i];
    deficits[i] -= static_cast<double>(counts[i] - floor_per_stratum);
  }
  while (total > n_new) {
    std::size_t victim = counts.size();
    for (std::size_t i = 0; i < counts.size(); ++i) {
      if (counts[i] <= floor_per_stratum) continue;
      if (victim == counts.size() || deficits[i] <= deficits[victim]) victim = i;
    }
    if (victim == counts.size()) break;  // nothing removable; floors only
    --counts[victim];
    deficits[victim] += 1.0;
    --total;
  }
}

}  // namespace detail

// Per-stratum counts striving toward N_S = q_S (N_total + N_new), capped at
// the batch size both per stratum and in total.
inline AllocationPlan sequential_counts(std::span<const double> q,
                                        std::span<const std::int64_t> current,
                                        std::int64_t n_total, std::int64_t n_new) {
  if (q.size() != current.size() || q.empty()) {
    throw std::invalid_argument("sequential_counts: size mismatch");
  }
  if (n_new < 0) throw std::invalid_argument("sequential_counts: n_new >= 0");
  const double after = static_cast<double>(n_total + n_new);
  AllocationPlan plan;
  plan.counts.resize(q.size());
  std::vector<double> deficits(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double target = after * q[i];
    deficits[i] = target - static_cast<double>(current[i]);
    const auto want = static_cast<std::int64_t>(std::ceil(deficits[i]));
    plan.counts[i] = std::max<std::int64_t>(0, std::min(want, n_new));
  }
  detail::truncate_to_batch(plan.counts, deficits, n_new, 0);
  for (std::int64_t c : plan.counts) plan.total += c;
  return plan;
}

// Variant guaranteeing one sample per stratum, so a stratum whose stddev
// was mistakenly estimated as zero still gets revisited.
inline AllocationPlan sequential_counts_reserve_one(
    std::span<const double> q, std::span<const std::int64_t> current,
    std::int64_t n_total, std::int64_t n_new) {
  if (q.size() != current.size() || q.empty()) {
    throw std::invalid_argument("sequential_counts_reserve_one: size mismatch");
  }
  const auto n_strata = static_cast<std::int64_t>(q.size());
  if (n_new < n_strata) {
    throw std::invalid_argument("sequential_counts_reserve_one: n_new < n_strata");
  }
  const double after = static_cast<double>(n_total + n_new - n_strata);
  AllocationPlan plan;
  plan.counts.resize(q.size());
  std::vector<double> deficits(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double target = after * q[i];
    deficits[i] = target - static_cast<double>(current[i]);
    const auto want = static_cast<std::int64_t>(std::ceil(deficits[i]));
    plan.counts[i] =
        1 + std::max<std::int64_t>(0, std::min(want, n_new - n_strata));
  }
  detail::truncate_to_batch(plan.counts, deficits, n_new, 1);
  for (std::int64_t c : plan.counts) plan.total += c;
  return plan;
}

// Batch size giving every stratum c new samples on average, clipped to the
// remaining budget.
inline std::int64_t batch_size(std::int64_t n_strata, std::int64_t c,
                               std::int64_t remaining_budget) {
  if (n_strata < 1 || c < 1) throw std::invalid_argument("batch_size: n_strata, c >= 1");
  if (remaining_budget < 0) remaining_budget = 0;
  return std::min(c * n_strata, remaining_budget);
}

}  // namespace stratmc
