#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "stratmc/variance.hpp"

namespace stratmc {

// Hybrid-parameter schedule: either a fixed value or the dynamic band
// search over a grid of alpha values.
struct AlphaSchedule {
  enum class Mode { Fixed, Dynamic };

  Mode mode = Mode::Fixed;
  double fixed_value = 0.0;
  double tau = 0.5;        // accept the smallest alpha within (1-tau) J* of J*
  double alpha_max = 0.95;
  double grid_step = 0.01;

  static AlphaSchedule fixed(double alpha) {
    if (!(alpha >= 0.0 && alpha <= 0.95)) {
      throw std::invalid_argument("AlphaSchedule: fixed alpha in [0, 0.95]");
    }
    AlphaSchedule s;
    s.mode = Mode::Fixed;
    s.fixed_value = alpha;
    return s;
  }

  static AlphaSchedule dynamic(double tau = 0.5, double alpha_max = 0.95,
                               double grid_step = 0.01) {
    if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("AlphaSchedule: tau in (0,1]");
    if (!(alpha_max > 0.0 && alpha_max <= 1.0)) {
      throw std::invalid_argument("AlphaSchedule: alpha_max in (0,1]");
    }
    if (!(grid_step > 0.0)) throw std::invalid_argument("AlphaSchedule: grid_step > 0");
    AlphaSchedule s;
    s.mode = Mode::Dynamic;
    s.tau = tau;
    s.alpha_max = alpha_max;
    s.grid_step = grid_step;
    return s;
  }
};

// Upper end of the one-standard-deviation asymptotic confidence band for
// the empirical variance constant: C_alpha plus its fluctuation scale.
inline double objective_j(const StrataSummary& s, std::int64_t n_samples,
                          double alpha) {
  if (n_samples < 1) throw std::invalid_argument("objective_j: n >= 1");
  const double c = variance_constant(s, alpha);
  const double fluctuation = fluctuation_variance(s, alpha);
  return c + std::sqrt(fluctuation) / std::sqrt(static_cast<double>(n_samples));
}

// Grid search for the next hybrid parameter: the smallest grid alpha whose
// objective lies within the (1-tau) band above the grid minimum. Grid
// points violating the rate condition are excluded; an empty admissible
// set yields 0.
inline double update_alpha(const StrataSummary& s, std::int64_t n_samples,
                           const AlphaSchedule& schedule) {
  if (schedule.mode == AlphaSchedule::Mode::Fixed) return schedule.fixed_value;
  std::vector<double> grid;
  std::vector<double> values;
  for (double a = 0.0; a <= schedule.alpha_max + 1e-12; a += schedule.grid_step) {
    const double alpha = std::min(a, schedule.alpha_max);
    if (!clt_condition_holds(s, alpha)) continue;
    grid.push_back(alpha);
    values.push_back(objective_j(s, n_samples, alpha));
    if (alpha == schedule.alpha_max) break;
  }
  if (grid.empty()) return 0.0;
  double j_star = values.front();
  for (double v : values) j_star = std::min(j_star, v);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (values[i] - j_star <= (1.0 - schedule.tau) * j_star) return grid[i];
  }
  return 0.0;
}

}  // namespace stratmc
