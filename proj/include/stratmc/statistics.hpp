#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace stratmc {

// Online count/mean/sum-of-squared-deviations for one sample stream.
// variance() uses the (N-1) divisor and is defined as 0 below two samples.
struct StratumStats {
  std::int64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void update(double value) noexcept {
    ++count;
    const double d = value - mean;
    mean += d / static_cast<double>(count);
    m2 += d * (value - mean);
  }

  double variance() const noexcept {
    return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0;
  }

  double stddev() const noexcept { return std::sqrt(variance()); }
};

// Exact pooled combination of two disjoint sample sets.
inline StratumStats merge(const StratumStats& a, const StratumStats& b) noexcept {
  if (a.count == 0) return b;
  if (b.count == 0) return a;
  StratumStats out;
  out.count = a.count + b.count;
  const double na = static_cast<double>(a.count);
  const double nb = static_cast<double>(b.count);
  const double n = na + nb;
  const double d = b.mean - a.mean;
  out.mean = (na * a.mean + nb * b.mean) / n;
  out.m2 = a.m2 + b.m2 + d * d * na * nb / n;
  return out;
}

// Bandwidth selection for kernel-smoothed moments. The effective bandwidth
// is strictly positive for every input, including constant samples.
struct KdeConfig {
  enum class Rule { Fixed, Relative };

  Rule rule = Rule::Relative;
  double value = 0.05;   // bandwidth for Fixed, fraction of range for Relative
  double floor = 1e-6;

  static KdeConfig fixed(double delta, double floor_value = 1e-12) {
    return KdeConfig{Rule::Fixed, delta, floor_value};
  }
  static KdeConfig relative(double fraction = 0.05, double floor_value = 1e-6) {
    return KdeConfig{Rule::Relative, fraction, floor_value};
  }

  double bandwidth(double sample_range) const {
    const double base = rule == Rule::Fixed ? value : value * sample_range;
    const double delta = std::max(base, floor);
    if (!(delta > 0.0)) throw std::invalid_argument("KdeConfig: bandwidth <= 0");
    return delta;
  }
};

struct KdeMoments {
  double m1 = 0.0;
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;
};

// Raw moments of the sample set smoothed by a Gaussian kernel of bandwidth
// delta. Only the even-order corrections survive the kernel's symmetry.
inline KdeMoments kde_moments(std::span<const double> samples, double delta) {
  if (samples.empty()) throw std::invalid_argument("kde_moments: empty samples");
  if (!(delta > 0.0)) throw std::invalid_argument("kde_moments: delta <= 0");
  const double n = static_cast<double>(samples.size());
  double r1 = 0.0, r2 = 0.0, r3 = 0.0, r4 = 0.0;
  for (double q : samples) {
    const double q2 = q * q;
    r1 += q;
    r2 += q2;
    r3 += q2 * q;
    r4 += q2 * q2;
  }
  r1 /= n; r2 /= n; r3 /= n; r4 /= n;
  const double d2 = delta * delta;
  return KdeMoments{r1, r2 + d2, r3 + 3.0 * d2 * r1,
                    r4 + 6.0 * d2 * r2 + 3.0 * d2 * d2};
}

// Kernel-smoothed kurtosis. Computed from moments centered at the sample
// mean so that the smoothing terms are not lost to cancellation; finite for
// every input, and exactly 3 for constant samples at any bandwidth.
inline double kde_kurtosis(std::span<const double> samples, double delta) {
  if (samples.empty()) throw std::invalid_argument("kde_kurtosis: empty samples");
  if (!(delta > 0.0)) throw std::invalid_argument("kde_kurtosis: delta <= 0");
  const double n = static_cast<double>(samples.size());
  double mean = 0.0;
  for (double q : samples) mean += q;
  mean /= n;
  double c2 = 0.0, c4 = 0.0;
  for (double q : samples) {
    const double d = q - mean;
    const double d2 = d * d;
    c2 += d2;
    c4 += d2 * d2;
  }
  c2 /= n; c4 /= n;
  const double b2 = delta * delta;
  const double var = c2 + b2;
  return (c4 + 6.0 * b2 * c2 + 3.0 * b2 * b2) / (var * var);
}

// Upper bound on P(empirical variance <= theta * true variance) for a
// stratum holding n_s samples of a distribution with kurtosis kappa.
inline double underestimation_bound(std::int64_t n_s, double kappa,
                                    double theta) {
  if (n_s < 2) throw std::invalid_argument("underestimation_bound: n_s >= 2");
  if (!(kappa >= 1.0)) throw std::invalid_argument("underestimation_bound: kappa >= 1");
  if (!(theta >= 0.0 && theta <= 1.0)) {
    throw std::invalid_argument("underestimation_bound: theta in [0,1]");
  }
  const double n = static_cast<double>(n_s);
  const double g = kappa - (n - 3.0) / (n - 1.0);
  const double one_minus = 1.0 - theta;
  return g / (n * one_minus * one_minus + g);
}

// Smallest sample count bringing the bound below p_crit. The bound is
// monotone non-increasing in the sample count, so a forward scan suffices.
inline std::int64_t required_samples(double kappa, double theta,
                                     double p_crit) {
  if (!(theta >= 0.0 && theta < 1.0)) {
    throw std::invalid_argument("required_samples: theta in [0,1)");
  }
  if (!(p_crit > 0.0 && p_crit <= 1.0)) {
    throw std::invalid_argument("required_samples: p_crit in (0,1]");
  }
  constexpr std::int64_t kCap = 1'000'000'000;
  for (std::int64_t n = 2; n <= kCap; ++n) {
    if (underestimation_bound(n, kappa, theta) <= p_crit) return n;
  }
  throw std::runtime_error("required_samples: no feasible sample count below cap");
}

// A bound larger than 1 carries no information; it is reported as-is with
// the flag set instead of being clipped.
struct ConcentrationBound {
  double value = 1.0;
  bool vacuous = false;
};

// Deviation bound for the proportional-allocation variance estimator.
// m_s are almost-sure bounds on the per-stratum empirical stddevs.
inline ConcentrationBound concentration_bound_prop(std::span<const double> p,
                                                   std::span<const double> m,
                                                   double vartheta,
                                                   std::int64_t n) {
  if (p.size() != m.size()) throw std::invalid_argument("concentration_bound_prop: size mismatch");
  if (!(vartheta > 0.0)) throw std::invalid_argument("concentration_bound_prop: vartheta > 0");
  if (n < 1) throw std::invalid_argument("concentration_bound_prop: n >= 1");
  double denom = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (m[i] < 0.0) throw std::invalid_argument("concentration_bound_prop: m >= 0");
    const double m2 = m[i] * m[i];
    denom += p[i] * p[i] * m2 * m2;
  }
  const double nn = static_cast<double>(n);
  double value;
  if (denom == 0.0) {
    value = 0.0;
  } else {
    value = 2.0 * std::exp(-2.0 * vartheta * vartheta * nn * nn / denom);
  }
  return ConcentrationBound{value, value > 1.0};
}

// Bias of the optimal-allocation variance estimator induced by the biased
// stddev estimators b_s = E(sigma_hat) - sigma.
inline double optimal_estimator_bias(std::span<const double> p,
                                     std::span<const double> sigma,
                                     std::span<const double> b) {
  const std::size_t k = p.size();
  if (sigma.size() != k || b.size() != k) {
    throw std::invalid_argument("optimal_estimator_bias: size mismatch");
  }
  double bias = 0.0;
  for (std::size_t s = 0; s < k; ++s) {
    for (std::size_t t = 0; t < k; ++t) {
      if (s == t) continue;
      bias += p[s] * p[t] * (b[s] * b[t] + b[s] * sigma[t] + b[t] * sigma[s]);
    }
  }
  return bias;
}

// Deviation bound for the optimal-allocation variance estimator. Requires
// vartheta to exceed |bias|/n.
inline ConcentrationBound concentration_bound_opt(std::span<const double> p,
                                                  std::span<const double> m,
                                                  std::span<const double> sigma,
                                                  std::span<const double> b,
                                                  double vartheta,
                                                  std::int64_t n) {
  if (p.size() != m.size()) throw std::invalid_argument("concentration_bound_opt: size mismatch");
  if (n < 1) throw std::invalid_argument("concentration_bound_opt: n >= 1");
  const double bias = std::abs(optimal_estimator_bias(p, sigma, b));
  const double nn = static_cast<double>(n);
  if (!(vartheta > bias / nn)) {
    throw std::invalid_argument("concentration_bound_opt: vartheta <= |B|/n");
  }
  double pm = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (m[i] < 0.0) throw std::invalid_argument("concentration_bound_opt: m >= 0");
    pm += p[i] * m[i];
  }
  const double denom = pm * pm * pm * pm;
  double value;
  if (denom == 0.0) {
    value = 0.0;
  } else {
    const double gap = bias - vartheta * nn;
    value = 2.0 * std::exp(-2.0 * gap * gap / denom);
  }
  return ConcentrationBound{value, value > 1.0};
}

}  // namespace stratmc
