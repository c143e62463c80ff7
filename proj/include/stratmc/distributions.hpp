#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace stratmc {

// Quantile of the standard normal distribution, computed by the AS241
// (PPND16) rational approximation. Absolute error is far below the 1e-9
// contract required for lognormal inversion and confidence intervals.
inline double standard_normal_quantile(double p) {
  if (std::isnan(p) || p < 0.0 || p > 1.0) {
    throw std::domain_error("standard_normal_quantile: p must be in [0,1]");
  }
  if (p == 0.0) return -std::numeric_limits<double>::infinity();
  if (p == 1.0) return std::numeric_limits<double>::infinity();

  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
        (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
              6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
            1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
          1.3314166789178437745e+2) * r + 3.3871328727963666080e+0);
    const double den =
        (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
              3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
            5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
          4.2313330701600911252e+1) * r + 1.0);
    return q * num / den;
  }

  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
            3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
          4.63033784615654529590e+0) * r + 1.42343711074968357734e+0);
    const double den =
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
          2.05319162663775882187e+0) * r + 1.0);
    value = num / den;
  } else {
    r -= 5.0;
    const double num =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
          5.46378491116411436990e+0) * r + 6.65790464350110377720e+0);
    const double den =
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
            1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
    value = num / den;
  }
  return (q < 0.0) ? -value : value;
}

enum class MarginalKind { Uniform, Lognormal, Exponential };

// One input distribution, mapped from [0,1] via its quantile function.
class MarginalDistribution {
 public:
  static MarginalDistribution uniform(double a, double b) {
    if (!(a < b)) throw std::invalid_argument("uniform: requires a < b");
    return MarginalDistribution(MarginalKind::Uniform, a, b);
  }

  // mu and sigma are the mean and standard deviation of log(X).
  static MarginalDistribution lognormal(double mu, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("lognormal: sigma > 0");
    return MarginalDistribution(MarginalKind::Lognormal, mu, sigma);
  }

  // Alternative parameterization by the lognormal's own mean/stddev.
  static MarginalDistribution lognormal_from_moments(double mean,
                                                     double stddev) {
    if (!(mean > 0.0) || !(stddev > 0.0)) {
      throw std::invalid_argument("lognormal_from_moments: mean, stddev > 0");
    }
    const double s2 = std::log1p((stddev * stddev) / (mean * mean));
    return lognormal(std::log(mean) - 0.5 * s2, std::sqrt(s2));
  }

  static MarginalDistribution exponential(double mean) {
    if (!(mean > 0.0)) throw std::invalid_argument("exponential: mean > 0");
    return MarginalDistribution(MarginalKind::Exponential, mean, 0.0);
  }

  MarginalKind kind() const noexcept { return kind_; }
  double param_a() const noexcept { return a_; }
  double param_b() const noexcept { return b_; }

  // Quantile function; monotone non-decreasing on [0,1].
  double inverse_cdf(double u) const {
    if (std::isnan(u) || u < 0.0 || u > 1.0) {
      throw std::domain_error("inverse_cdf: u must be in [0,1]");
    }
    switch (kind_) {
      case MarginalKind::Uniform:
        return a_ + (b_ - a_) * u;
      case MarginalKind::Lognormal:
        return std::exp(a_ + b_ * standard_normal_quantile(u));
      case MarginalKind::Exponential:
        return -a_ * std::log1p(-u);
    }
    return 0.0;  // unreachable
  }

  double mean() const noexcept {
    switch (kind_) {
      case MarginalKind::Uniform: return 0.5 * (a_ + b_);
      case MarginalKind::Lognormal: return std::exp(a_ + 0.5 * b_ * b_);
      case MarginalKind::Exponential: return a_;
    }
    return 0.0;  // unreachable
  }

 private:
  MarginalDistribution(MarginalKind kind, double a, double b)
      : kind_(kind), a_(a), b_(b) {}

  MarginalKind kind_;
  double a_;
  double b_;
};

// Ordered, mutually independent marginals; one per input dimension.
class ParameterMap {
 public:
  ParameterMap() = default;
  explicit ParameterMap(std::vector<MarginalDistribution> marginals)
      : marginals_(std::move(marginals)) {}

  int dimension() const noexcept { return static_cast<int>(marginals_.size()); }
  const MarginalDistribution& marginal(int i) const { return marginals_.at(i); }

  std::vector<double> map_point(std::span<const double> u) const {
    if (static_cast<int>(u.size()) != dimension()) {
      throw std::invalid_argument("map_point: dimension mismatch");
    }
    std::vector<double> y(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) {
      y[k] = marginals_[k].inverse_cdf(u[k]);
    }
    return y;
  }

 private:
  std::vector<MarginalDistribution> marginals_;
};

// Deterministic scalar model over the unit hypercube with an evaluation
// counter. Evaluations may run concurrently; the counter is atomic.
class ModelFunction {
 public:
  using Evaluator = std::function<double(std::span<const double>)>;

  ModelFunction(int dimension, Evaluator fn)
      : dimension_(dimension), fn_(std::move(fn)) {
    if (dimension_ < 1) throw std::invalid_argument("ModelFunction: dimension");
    if (!fn_) throw std::invalid_argument("ModelFunction: empty evaluator");
  }

  int dimension() const noexcept { return dimension_; }

  double operator()(std::span<const double> u) const {
    evaluations_.fetch_add(1, std::memory_order_relaxed);
    return fn_(u);
  }

  std::uint64_t evaluations() const noexcept {
    return evaluations_.load(std::memory_order_relaxed);
  }

 private:
  int dimension_;
  Evaluator fn_;
  mutable std::atomic<std::uint64_t> evaluations_{0};
};

}  // namespace stratmc
