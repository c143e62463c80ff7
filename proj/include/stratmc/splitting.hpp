#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "stratmc/geometry.hpp"
#include "stratmc/statistics.hpp"
#include "stratmc/variance.hpp"

namespace stratmc {

// Online statistics for both halves of every candidate bisection of one
// stratum, maintained as samples arrive. For a simplex the barycentric
// transform is computed once per sample and shared across all edges.
struct TentativeSplitTable {
  std::vector<SplitPlane> planes;
  std::vector<std::pair<StratumStats, StratumStats>> sides;

  static TentativeSplitTable for_geometry(const Geometry& g) {
    TentativeSplitTable t;
    t.planes = split_planes(g);
    t.sides.resize(t.planes.size());
    return t;
  }

  void record(const Geometry& g, std::span<const double> point, double value) {
    if (const auto* r = std::get_if<HyperRectangle>(&g)) {
      for (std::size_t j = 0; j < planes.size(); ++j) {
        const int axis = planes[j].a;
        const double mid =
            r->lower[axis] + 0.5 * (r->upper[axis] - r->lower[axis]);
        if (point[axis] < mid) {
          sides[j].first.update(value);
        } else {
          sides[j].second.update(value);
        }
      }
      return;
    }
    const std::vector<double> lambda = std::get<Simplex>(g).barycentric(point);
    for (std::size_t j = 0; j < planes.size(); ++j) {
      if (side_of_barycentric(lambda, planes[j]) == Side::Minus) {
        sides[j].first.update(value);
      } else {
        sides[j].second.update(value);
      }
    }
  }
};

// A member of the current partition. The measure p is tracked by exact
// binary halving on splits; retained samples support redistribution.
struct StratumRecord {
  std::uint64_t id = 0;
  Geometry geometry;
  double p = 1.0;
  StratumStats stats;
  std::vector<Point> points;
  std::vector<double> values;
  TentativeSplitTable table;

  StratumRecord(std::uint64_t id_, Geometry g, double measure_)
      : id(id_), geometry(std::move(g)), p(measure_),
        table(TentativeSplitTable::for_geometry(geometry)) {}

  void add_sample(Point point, double value) {
    table.record(geometry, point, value);
    stats.update(value);
    points.push_back(std::move(point));
    values.push_back(value);
  }
};

// The full disjoint partition of the unit hypercube with global sample
// bookkeeping. iteration 0 is the initial batch.
struct Stratification {
  std::vector<StratumRecord> strata;
  std::int64_t n_total = 0;
  std::int64_t iteration = 0;
  std::uint64_t next_id = 0;
  double value_min = std::numeric_limits<double>::infinity();
  double value_max = -std::numeric_limits<double>::infinity();

  std::uint64_t fresh_id() { return next_id++; }

  void add_sample(std::size_t stratum_index, Point point, double value) {
    value_min = std::min(value_min, value);
    value_max = std::max(value_max, value);
    strata[stratum_index].add_sample(std::move(point), value);
    ++n_total;
  }

  double value_range() const noexcept {
    return value_max >= value_min ? value_max - value_min : 0.0;
  }

  StrataSummary summary() const {
    StrataSummary s;
    s.p.reserve(strata.size());
    s.sigma.reserve(strata.size());
    for (const auto& st : strata) {
      s.p.push_back(st.p);
      s.sigma.push_back(st.stats.stddev());
    }
    s.n_samples = n_total;
    return s;
  }
};

// Estimator variance reduction, scaled by N, from bisecting stratum T into
// equal-measure children with stddevs sigma_minus/sigma_plus, under the
// hybrid allocation with the given alpha. Written as the difference of the
// old and refined per-stratum terms so the second sum over unaffected
// strata only carries the normalizer shift.
inline double score_split(const StrataSummary& s, std::size_t t_index,
                          double sigma_minus, double sigma_plus, double alpha,
                          double alpha_max = 0.95) {
  if (t_index >= s.size()) throw std::invalid_argument("score_split: bad index");
  if (sigma_minus < 0.0 || sigma_plus < 0.0) {
    throw std::invalid_argument("score_split: child stddevs >= 0");
  }
  const double p_t = s.p[t_index];
  const double sigma_t = s.sigma[t_index];
  const double w_old = s.mean_sigma();
  const double w_new = w_old - p_t * sigma_t + 0.5 * p_t * (sigma_minus + sigma_plus);
  if (w_old <= 0.0 && w_new <= 0.0) return 0.0;  // fully degenerate either way

  // Fall back below alpha_max whenever the exact rate condition would fail
  // for either stratification.
  double a = alpha;
  if (a >= 1.0) {
    const bool zero_old = std::any_of(s.sigma.begin(), s.sigma.end(),
                                      [](double v) { return v == 0.0; });
    const bool zero_new = sigma_minus == 0.0 || sigma_plus == 0.0;
    if (zero_old || zero_new) a = alpha_max;
  }
  if (w_old <= 0.0 || w_new <= 0.0) a = 0.0;
  if (a == 0.0) {
    return p_t * (sigma_t * sigma_t -
                  0.5 * (sigma_minus * sigma_minus + sigma_plus * sigma_plus));
  }

  auto rate_old = [&](double sigma) { return (a * sigma + (1.0 - a) * w_old) / w_old; };
  auto rate_new = [&](double sigma) { return (a * sigma + (1.0 - a) * w_new) / w_new; };

  double score = p_t * (sigma_t * sigma_t / rate_old(sigma_t) -
                        0.5 * (sigma_minus * sigma_minus / rate_new(sigma_minus) +
                               sigma_plus * sigma_plus / rate_new(sigma_plus)));
  if (a > 0.0) {
    double cross = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i == t_index || s.sigma[i] == 0.0) continue;
      const double shift = s.sigma[i] / w_new - s.sigma[i] / w_old;
      cross += s.p[i] * s.sigma[i] * s.sigma[i] * shift /
               (rate_old(s.sigma[i]) * rate_new(s.sigma[i]));
    }
    score += a * cross;
  }
  return score;
}

struct SplitCandidate {
  std::size_t stratum_index = 0;
  std::uint64_t stratum_id = 0;
  std::size_t plane_index = 0;
  double score = 0.0;
};

// Greedy choice: the (stratum, plane) pair with the largest variance
// reduction among strata holding at least min_samples. Child stddevs come
// from the tentative tables; sides with fewer than two samples count as
// zero. Returns nothing when no strictly positive reduction exists.
inline std::optional<SplitCandidate> select_split(const Stratification& strat,
                                                  double alpha,
                                                  std::int64_t min_samples,
                                                  double alpha_max = 0.95) {
  if (min_samples < 2) throw std::invalid_argument("select_split: min_samples >= 2");
  const StrataSummary summary = strat.summary();
  std::optional<SplitCandidate> best;
  for (std::size_t i = 0; i < strat.strata.size(); ++i) {
    const StratumRecord& st = strat.strata[i];
    if (st.stats.count < min_samples) continue;
    for (std::size_t j = 0; j < st.table.planes.size(); ++j) {
      const auto& [minus, plus] = st.table.sides[j];
      const double score = score_split(summary, i, minus.stddev(), plus.stddev(),
                                       alpha, alpha_max);
      const bool better =
          !best || score > best->score ||
          (score == best->score &&
           (st.id < best->stratum_id ||
            (st.id == best->stratum_id && j < best->plane_index)));
      if (better) best = SplitCandidate{i, st.id, j, score};
    }
  }
  if (!best || !(best->score > 0.0)) return std::nullopt;
  return best;
}

// Replaces the chosen stratum by its two bisection children. Children take
// the parent's tentative side statistics for the chosen plane, exactly half
// the parent's measure, and the parent's samples redistributed by side;
// their own tentative tables are rebuilt from those samples.
inline void execute_split(Stratification& strat, const SplitCandidate& cand) {
  if (cand.stratum_index >= strat.strata.size()) {
    throw std::invalid_argument("execute_split: bad stratum index");
  }
  StratumRecord parent = std::move(strat.strata[cand.stratum_index]);
  const SplitPlane plane = parent.table.planes.at(cand.plane_index);
  auto [geom_minus, geom_plus] = bisect(parent.geometry, plane);

  StratumRecord minus(strat.fresh_id(), std::move(geom_minus), parent.p * 0.5);
  StratumRecord plus(strat.fresh_id(), std::move(geom_plus), parent.p * 0.5);

  // Retained samples are inside the parent by construction; the side
  // decision must not re-validate containment, which can spuriously fail
  // for points within rounding distance of a thin simplex's face.
  const auto* rect = std::get_if<HyperRectangle>(&parent.geometry);
  const auto* simplex = std::get_if<Simplex>(&parent.geometry);
  const double mid =
      rect ? rect->lower[plane.a] + 0.5 * (rect->upper[plane.a] - rect->lower[plane.a])
           : 0.0;
  for (std::size_t k = 0; k < parent.points.size(); ++k) {
    Side side;
    if (rect) {
      side = parent.points[k][plane.a] < mid ? Side::Minus : Side::Plus;
    } else {
      side = side_of_barycentric(simplex->barycentric(parent.points[k]), plane);
    }
    StratumRecord& child = side == Side::Minus ? minus : plus;
    child.table.record(child.geometry, parent.points[k], parent.values[k]);
    child.points.push_back(std::move(parent.points[k]));
    child.values.push_back(parent.values[k]);
  }
  minus.stats = parent.table.sides[cand.plane_index].first;
  plus.stats = parent.table.sides[cand.plane_index].second;
  if (minus.stats.count != static_cast<std::int64_t>(minus.points.size()) ||
      plus.stats.count != static_cast<std::int64_t>(plus.points.size())) {
    throw std::logic_error("execute_split: redistribution mismatch");
  }

  strat.strata[cand.stratum_index] = std::move(minus);
  strat.strata.push_back(std::move(plus));
}

}  // namespace stratmc
