#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "stratmc/distributions.hpp"

namespace stratmc {

// Per-stratum measures and standard deviations (true or empirical), plus
// optional kurtoses, for a stratification holding n_samples in total.
struct StrataSummary {
  std::vector<double> p;
  std::vector<double> sigma;
  std::vector<double> kappa;  // empty when absent
  std::int64_t n_samples = 0;

  std::size_t size() const noexcept { return p.size(); }

  void validate() const {
    if (sigma.size() != p.size()) throw std::invalid_argument("StrataSummary: size mismatch");
    if (!kappa.empty() && kappa.size() != p.size()) {
      throw std::invalid_argument("StrataSummary: kappa size mismatch");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (!(p[i] > 0.0)) throw std::invalid_argument("StrataSummary: p > 0");
      if (sigma[i] < 0.0) throw std::invalid_argument("StrataSummary: sigma >= 0");
      if (!kappa.empty() && !(kappa[i] >= 1.0)) {
        throw std::invalid_argument("StrataSummary: kappa >= 1");
      }
      sum += p[i];
    }
    if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("StrataSummary: sum p != 1");
  }

  double mean_sigma() const noexcept {  // <p, sigma>
    double w = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) w += p[i] * sigma[i];
    return w;
  }
};

inline double v_prop_hat(const StrataSummary& s) {
  if (s.n_samples < 1) throw std::invalid_argument("v_prop_hat: n >= 1");
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) acc += s.p[i] * s.sigma[i] * s.sigma[i];
  return acc / static_cast<double>(s.n_samples);
}

inline double v_opt_hat(const StrataSummary& s) {
  if (s.n_samples < 1) throw std::invalid_argument("v_opt_hat: n >= 1");
  const double w = s.mean_sigma();
  return w * w / static_cast<double>(s.n_samples);
}

// The allocation rates degenerate when alpha*sigma_S + (1-alpha)<p,sigma>
// vanishes for some stratum. This rules out all-zero sigma, and the fully
// optimal rule (alpha=1) whenever any single sigma_S is zero.
inline bool clt_condition_holds(const StrataSummary& s, double alpha) {
  const double w = s.mean_sigma();
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (alpha * s.sigma[i] + (1.0 - alpha) * w <= 0.0) return false;
  }
  return !s.p.empty();
}

// Substitute for alpha that keeps the rates non-degenerate; used by the
// adaptive machinery when empirical sigmas hit zero. Returns 0 when every
// sigma vanishes (all allocations coincide there).
inline double effective_alpha(const StrataSummary& s, double alpha,
                              double alpha_max = 0.95) {
  if (clt_condition_holds(s, alpha)) return alpha;
  if (s.mean_sigma() <= 0.0) return 0.0;
  return std::min(alpha, alpha_max);
}

// N-normalized estimator variance as a function of the strata stddevs.
inline double variance_constant(const StrataSummary& s, double alpha) {
  const double w = s.mean_sigma();
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double d = alpha * s.sigma[i] + (1.0 - alpha) * w;
    if (d <= 0.0) {
      if (s.sigma[i] == 0.0 && alpha < 1.0) {
        throw std::invalid_argument(
            "variance_constant: all strata stddevs are zero");
      }
      throw std::invalid_argument(
          "variance_constant: rate condition violated (alpha=1 with a "
          "zero-stddev stratum)");
    }
    acc += s.p[i] * s.sigma[i] * s.sigma[i] / d;
  }
  return w * acc;
}

// Gradient of the variance constant with respect to the stddev vector.
inline std::vector<double> variance_constant_gradient(const StrataSummary& s,
                                                      double alpha) {
  const double w = s.mean_sigma();
  const std::size_t k = s.size();
  double cubic = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double d = alpha * s.sigma[i] + (1.0 - alpha) * w;
    if (d <= 0.0) throw std::invalid_argument("variance_constant_gradient: rate condition violated");
    cubic += s.p[i] * s.sigma[i] * s.sigma[i] * s.sigma[i] / (d * d);
  }
  std::vector<double> grad(k);
  for (std::size_t u = 0; u < k; ++u) {
    const double d = alpha * s.sigma[u] + (1.0 - alpha) * w;
    grad[u] = s.p[u] * s.sigma[u] * w / d * (1.0 + (1.0 - alpha) * w / d) +
              alpha * s.p[u] * cubic;
  }
  return grad;
}

// Asymptotic variance of the empirical variance constant. Zero-stddev
// strata contribute exactly zero.
inline double fluctuation_variance(const StrataSummary& s, double alpha) {
  if (s.kappa.size() != s.size()) {
    throw std::invalid_argument("fluctuation_variance: kappa required");
  }
  const double w = s.mean_sigma();
  const std::vector<double> grad = variance_constant_gradient(s, alpha);
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.sigma[i] == 0.0) continue;
    if (!(s.kappa[i] >= 1.0)) throw std::invalid_argument("fluctuation_variance: kappa >= 1");
    const double d = (1.0 - alpha) * w + alpha * s.sigma[i];
    const double diag =
        s.sigma[i] * s.sigma[i] * (s.kappa[i] - 1.0) * w / (4.0 * s.p[i] * d);
    acc += grad[i] * grad[i] * diag;
  }
  return acc;
}

// Central-limit interval around the point estimate at the given coverage.
inline std::pair<double, double> confidence_interval(double q_hat, double v_hat,
                                                     double coverage) {
  if (v_hat < 0.0) throw std::invalid_argument("confidence_interval: v_hat >= 0");
  if (!(coverage > 0.0 && coverage < 1.0)) {
    throw std::invalid_argument("confidence_interval: coverage in (0,1)");
  }
  const double z = standard_normal_quantile(0.5 * (1.0 + coverage));
  const double half = z * std::sqrt(v_hat);
  return {q_hat - half, q_hat + half};
}

// Factor by which plain Monte Carlo needs more evaluations for the same
// mean squared error. Infinite for a perfectly resolved stratification.
inline double speedup(double var_q, double c_alpha) {
  if (c_alpha < 0.0) throw std::invalid_argument("speedup: c_alpha >= 0");
  if (c_alpha == 0.0) return std::numeric_limits<double>::infinity();
  return var_q / c_alpha;
}

// Variance bound for a uniform Cartesian stratification of a continuously
// differentiable integrand; grad_sup_sq bounds the squared gradient norm.
inline double cartesian_bound_smooth(int n, double grad_sup_sq,
                                     std::int64_t strata_count, std::int64_t n_samples,
                                     double alpha) {
  if (n < 1 || strata_count < 1 || n_samples < 1 || grad_sup_sq < 0.0) {
    throw std::invalid_argument("cartesian_bound_smooth: bad arguments");
  }
  const double base = static_cast<double>(n) * grad_sup_sq /
                      (3.0 * static_cast<double>(n_samples)) *
                      std::pow(static_cast<double>(strata_count), -2.0 / n);
  const double inv_a = alpha > 0.0 ? 1.0 / alpha : std::numeric_limits<double>::infinity();
  const double inv_b = alpha < 1.0 ? 1.0 / (1.0 - alpha) : std::numeric_limits<double>::infinity();
  return base * std::min(inv_a, inv_b);
}

// Variance bound for a piecewise constant integrand with a jump of size
// delta crossing t_count of the s_count strata.
inline double cartesian_bound_jump(double delta, std::int64_t t_count,
                                   std::int64_t s_count, std::int64_t n_samples,
                                   double alpha) {
  if (!(delta > 0.0) || t_count < 0 || t_count > s_count || n_samples < 1) {
    throw std::invalid_argument("cartesian_bound_jump: bad arguments");
  }
  const double ratio = static_cast<double>(t_count) / static_cast<double>(s_count);
  const double base = delta * delta / (4.0 * static_cast<double>(n_samples));
  if (alpha == 0.0) return base * ratio;
  if (alpha == 1.0) return base * ratio * ratio;
  return base * ratio * std::min(1.0 / (1.0 - alpha), ratio / alpha);
}

}  // namespace stratmc
