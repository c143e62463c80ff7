#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "stratmc/distributions.hpp"
#include "stratmc/geometry.hpp"

namespace stratmc {

// ---------------------------------------------------------------------------
// Hypersphere indicator
// ---------------------------------------------------------------------------

// Radius such that the n-ball's volume equals 2^(n-1). Above n=3 the ball
// pokes out of the unit cube, so the indicator's support gets clipped.
inline double hypersphere_radius(int n) {
  if (n < 1 || n > 6) throw std::invalid_argument("hypersphere_radius: 1 <= n <= 6");
  const double target = std::pow(2.0, n - 1);
  const double unit_ball =
      std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
  return std::pow(target / unit_ball, 1.0 / n);
}

inline ModelFunction::Evaluator hypersphere_indicator(int n) {
  const double r2 = hypersphere_radius(n) * hypersphere_radius(n);
  return [r2](std::span<const double> u) {
    double norm2 = 0.0;
    for (double x : u) norm2 += x * x;
    return norm2 <= r2 ? 1.0 : 0.0;
  };
}

namespace detail {

// P(x^2 + y^2 <= u) for independent uniforms on [0,1]; closed form.
inline double two_square_cdf(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 2.0) return 1.0;
  if (u <= 1.0) return 0.25 * std::numbers::pi * u;
  const double s = std::sqrt(u - 1.0);
  const double root = std::sqrt(u);
  return s + 0.5 * u * (std::asin(1.0 / root) - std::asin(s / root));
}

}  // namespace detail

// Expected value of the indicator by quadrature over the coordinates not
// absorbed into the closed-form two-coordinate tail.
inline double hypersphere_mean_reference(int n) {
  const double r2 = hypersphere_radius(n) * hypersphere_radius(n);
  if (n <= 3) return 0.5;  // the ball's positive orthant stays inside the cube
  if (n == 4) {
    // Composite Simpson over (x, y) of P(x^2 + y^2 + s <= r^2).
    const int m = 2000;  // panels per axis (even)
    const double h = 1.0 / m;
    auto inner = [&](double x) {
      double acc = 0.0;
      for (int j = 0; j <= m; ++j) {
        const double y = j * h;
        const double w = (j == 0 || j == m) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
        acc += w * detail::two_square_cdf(r2 - x * x - y * y);
      }
      return acc * h / 3.0;
    };
    double acc = 0.0;
    for (int i = 0; i <= m; ++i) {
      const double x = i * h;
      const double w = (i == 0 || i == m) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
      acc += w * inner(x);
    }
    return acc * h / 3.0;
  }
  throw std::invalid_argument("hypersphere_mean_reference: implemented for n <= 4");
}

// ---------------------------------------------------------------------------
// Fault stress
// ---------------------------------------------------------------------------

using HeadFunction = std::function<double(double)>;  // well distance (m) -> head (m)

// Steady radial head profile, calibrated to 50 m of head at 10 m distance
// and zero at the 1000 m outer radius.
inline HeadFunction thiem_head() {
  const double amplitude = 50.0 / std::log(100.0);
  return [amplitude](double r) { return amplitude * std::log(1000.0 / r); };
}

struct FaultStressModel {
  HeadFunction head = thiem_head();
  double friction_drop = 0.8;       // dimensionless
  double shear_stress = 20.0;       // MPa
  double original_stress = 50.0;    // MPa
  double caprock_depth = 2000.0;    // m
  double formation_height = 100.0;  // m

  // Stress threshold (MPa) at well distance r (m) and friction mu. Zero on
  // the stable side of the Coulomb criterion, positive elsewhere.
  double operator()(double r, double mu) const {
    const double depth = caprock_depth + 0.5 * formation_height + head(r);
    const double pressure_mpa = 1000.0 * 9.81 * depth / 1e6;
    const double normal_stress = original_stress - pressure_mpa;
    const double coulomb = normal_stress * mu - shear_stress;
    if (coulomb < 0.0) return shear_stress - normal_stress * mu * friction_drop;
    return 0.0;
  }
};

inline ParameterMap fault_stress_parameters(bool lognormal_by_moments = false) {
  std::vector<MarginalDistribution> marginals;
  marginals.push_back(MarginalDistribution::uniform(10.0, 1000.0));
  marginals.push_back(lognormal_by_moments
                          ? MarginalDistribution::lognormal_from_moments(0.2, 0.7)
                          : MarginalDistribution::lognormal(0.2, 0.7));
  return ParameterMap(std::move(marginals));
}

inline ModelFunction::Evaluator fault_stress_evaluator(
    FaultStressModel model = FaultStressModel{},
    bool lognormal_by_moments = false) {
  return [model = std::move(model),
          pm = fault_stress_parameters(lognormal_by_moments)](
             std::span<const double> u) {
    const std::vector<double> y = pm.map_point(u);
    return model(y[0], y[1]);
  };
}

// ---------------------------------------------------------------------------
// Sod shock tube
// ---------------------------------------------------------------------------

struct EulerState {
  double rho = 0.0;
  double u = 0.0;
  double p = 0.0;
};

// Exact solution of the 1D Euler Riemann problem for an ideal gas, solved
// by a bracketed Newton iteration on the star-region pressure.
class RiemannSolution {
 public:
  RiemannSolution(EulerState left, EulerState right, double gamma = 1.4)
      : left_(left), right_(right), gamma_(gamma) {
    if (!(left.rho > 0.0) || !(right.rho > 0.0) || !(left.p > 0.0) ||
        !(right.p > 0.0)) {
      throw std::invalid_argument("RiemannSolution: positive density and pressure");
    }
    a_left_ = std::sqrt(gamma_ * left_.p / left_.rho);
    a_right_ = std::sqrt(gamma_ * right_.p / right_.rho);
    solve_star_pressure();
    u_star_ = 0.5 * (left_.u + right_.u) +
              0.5 * (wave_function(p_star_, right_) - wave_function(p_star_, left_));
  }

  double star_pressure() const noexcept { return p_star_; }
  double star_velocity() const noexcept { return u_star_; }

  bool left_is_shock() const noexcept { return p_star_ > left_.p; }
  bool right_is_shock() const noexcept { return p_star_ > right_.p; }

  double left_star_density() const noexcept {
    return star_density(left_, left_is_shock());
  }
  double right_star_density() const noexcept {
    return star_density(right_, right_is_shock());
  }

  double right_shock_speed() const {
    const double ratio = p_star_ / right_.p;
    return right_.u +
           a_right_ * std::sqrt((gamma_ + 1.0) / (2.0 * gamma_) * ratio +
                                (gamma_ - 1.0) / (2.0 * gamma_));
  }

  double left_shock_speed() const {
    const double ratio = p_star_ / left_.p;
    return left_.u -
           a_left_ * std::sqrt((gamma_ + 1.0) / (2.0 * gamma_) * ratio +
                               (gamma_ - 1.0) / (2.0 * gamma_));
  }

  // Density of the self-similar solution at the slope xi = x / t.
  double density_at(double xi) const {
    const double g = gamma_;
    if (xi <= u_star_) {
      // Left wave family.
      if (left_is_shock()) {
        return xi <= left_shock_speed() ? left_.rho : left_star_density();
      }
      const double head = left_.u - a_left_;
      const double a_star = a_left_ * std::pow(p_star_ / left_.p, (g - 1.0) / (2.0 * g));
      const double tail = u_star_ - a_star;
      if (xi <= head) return left_.rho;
      if (xi >= tail) return left_star_density();
      const double factor =
          2.0 / (g + 1.0) + (g - 1.0) / ((g + 1.0) * a_left_) * (left_.u - xi);
      return left_.rho * std::pow(factor, 2.0 / (g - 1.0));
    }
    // Right wave family.
    if (right_is_shock()) {
      return xi >= right_shock_speed() ? right_.rho : right_star_density();
    }
    const double head = right_.u + a_right_;
    const double a_star = a_right_ * std::pow(p_star_ / right_.p, (g - 1.0) / (2.0 * g));
    const double tail = u_star_ + a_star;
    if (xi >= head) return right_.rho;
    if (xi <= tail) return right_star_density();
    const double factor =
        2.0 / (g + 1.0) - (g - 1.0) / ((g + 1.0) * a_right_) * (right_.u - xi);
    return right_.rho * std::pow(factor, 2.0 / (g - 1.0));
  }

 private:
  double star_density(const EulerState& side, bool shock) const noexcept {
    const double g = gamma_;
    const double ratio = p_star_ / side.p;
    if (shock) {
      const double gm = (g - 1.0) / (g + 1.0);
      return side.rho * (ratio + gm) / (gm * ratio + 1.0);
    }
    return side.rho * std::pow(ratio, 1.0 / g);
  }

  // Velocity jump across one wave as a function of the star pressure.
  double wave_function(double p, const EulerState& side) const {
    const double g = gamma_;
    if (p > side.p) {
      const double a_coef = 2.0 / ((g + 1.0) * side.rho);
      const double b_coef = (g - 1.0) / (g + 1.0) * side.p;
      return (p - side.p) * std::sqrt(a_coef / (p + b_coef));
    }
    const double a = std::sqrt(g * side.p / side.rho);
    return 2.0 * a / (g - 1.0) * (std::pow(p / side.p, (g - 1.0) / (2.0 * g)) - 1.0);
  }

  double wave_function_derivative(double p, const EulerState& side) const {
    const double g = gamma_;
    if (p > side.p) {
      const double a_coef = 2.0 / ((g + 1.0) * side.rho);
      const double b_coef = (g - 1.0) / (g + 1.0) * side.p;
      const double root = std::sqrt(a_coef / (p + b_coef));
      return root * (1.0 - 0.5 * (p - side.p) / (b_coef + p));
    }
    const double a = std::sqrt(g * side.p / side.rho);
    return std::pow(p / side.p, -(g + 1.0) / (2.0 * g)) / (side.rho * a);
  }

  void solve_star_pressure() {
    const double du = right_.u - left_.u;
    auto f = [&](double p) {
      return wave_function(p, left_) + wave_function(p, right_) + du;
    };
    // f is monotone increasing in p; bracket the root before Newton.
    double lo = 1e-12;
    double hi = std::max(left_.p, right_.p);
    while (f(hi) < 0.0) hi *= 2.0;
    double p = 0.5 * (left_.p + right_.p) -
               0.125 * du * (left_.rho + right_.rho) * (a_left_ + a_right_);
    p = std::clamp(p, lo, hi);
    const double tol = 1e-12;
    for (int it = 0; it < 100; ++it) {
      const double fp = f(p);
      if (fp > 0.0) {
        hi = p;
      } else {
        lo = p;
      }
      const double dfp = wave_function_derivative(p, left_) +
                         wave_function_derivative(p, right_);
      double next = p - fp / dfp;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      const double change = std::abs(next - p) / (0.5 * (next + p));
      p = next;
      if (change < tol) {
        p_star_ = p;
        return;
      }
    }
    throw std::runtime_error("RiemannSolution: star pressure iteration failed");
  }

  EulerState left_;
  EulerState right_;
  double gamma_;
  double a_left_ = 0.0;
  double a_right_ = 0.0;
  double p_star_ = 0.0;
  double u_star_ = 0.0;
};

inline ParameterMap sod_parameters() {
  std::vector<MarginalDistribution> marginals;
  marginals.push_back(MarginalDistribution::uniform(0.7, 1.3));    // left density
  marginals.push_back(MarginalDistribution::uniform(0.05, 0.2));   // right density
  marginals.push_back(MarginalDistribution::uniform(0.45, 0.55));  // membrane
  return ParameterMap(std::move(marginals));
}

// Density at (x, t) = (0.7, 0.1) with the classic pressure pair (1, 0.1)
// and gamma = 1.4 held fixed; the densities and membrane position vary.
inline double sod_density(double rho_left, double rho_right, double membrane) {
  const RiemannSolution solution(EulerState{rho_left, 0.0, 1.0},
                                 EulerState{rho_right, 0.0, 0.1});
  return solution.density_at((0.7 - membrane) / 0.1);
}

inline ModelFunction::Evaluator sod_evaluator() {
  return [pm = sod_parameters()](std::span<const double> u) {
    const std::vector<double> y = pm.map_point(u);
    return sod_density(y[0], y[1], y[2]);
  };
}

// ---------------------------------------------------------------------------
// Analytic fixtures with exactly computable conditional statistics
// ---------------------------------------------------------------------------

inline ModelFunction::Evaluator linear_field() {
  return [](std::span<const double> u) {
    double s = 0.0;
    for (double x : u) s += x;
    return s;
  };
}

inline ModelFunction::Evaluator interval_step(double threshold) {
  return [threshold](std::span<const double> u) {
    return u[0] >= threshold ? 1.0 : 0.0;
  };
}

inline ModelFunction::Evaluator diagonal_step() {
  return [](std::span<const double> u) { return u[1] >= u[0] ? 1.0 : 0.0; };
}

// Exact variance of the coordinate-sum field on a box.
inline double linear_field_variance(const HyperRectangle& box) {
  double v = 0.0;
  for (int i = 0; i < box.dimension(); ++i) {
    const double w = box.upper[i] - box.lower[i];
    v += w * w / 12.0;
  }
  return v;
}

// Fraction of the box with u0 >= threshold.
inline double step_fraction(const HyperRectangle& box, double threshold) {
  const double w = box.upper[0] - box.lower[0];
  return std::clamp((box.upper[0] - threshold) / w, 0.0, 1.0);
}

// Fraction of a 2D box above the diagonal u1 = u0; exact piecewise-linear
// integration split at the kinks.
inline double diagonal_fraction(const HyperRectangle& box) {
  if (box.dimension() != 2) throw std::invalid_argument("diagonal_fraction: 2D only");
  const double a1 = box.lower[0], b1 = box.upper[0];
  const double a2 = box.lower[1], b2 = box.upper[1];
  auto height = [&](double x) {
    return std::clamp(b2 - std::max(x, a2), 0.0, b2 - a2);
  };
  std::vector<double> cuts = {a1, b1};
  if (a2 > a1 && a2 < b1) cuts.push_back(a2);
  if (b2 > a1 && b2 < b1) cuts.push_back(b2);
  std::sort(cuts.begin(), cuts.end());
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    area += 0.5 * (height(cuts[i]) + height(cuts[i + 1])) * (cuts[i + 1] - cuts[i]);
  }
  return area / ((b1 - a1) * (b2 - a2));
}

// Fraction of a 2D simplex above the diagonal, by exact half-plane clipping.
inline double diagonal_fraction(const Simplex& simplex) {
  if (simplex.dimension() != 2) throw std::invalid_argument("diagonal_fraction: 2D only");
  std::vector<std::pair<double, double>> poly;
  for (const auto& v : simplex.vertices()) poly.emplace_back(v[0], v[1]);
  auto inside = [](const std::pair<double, double>& q) { return q.second >= q.first; };
  auto intersect = [](const std::pair<double, double>& s,
                      const std::pair<double, double>& e) {
    const double ds = s.second - s.first;
    const double de = e.second - e.first;
    const double t = ds / (ds - de);
    return std::pair<double, double>{s.first + t * (e.first - s.first),
                                     s.second + t * (e.second - s.second)};
  };
  std::vector<std::pair<double, double>> clipped;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& s = poly[i];
    const auto& e = poly[(i + 1) % poly.size()];
    if (inside(s)) {
      clipped.push_back(s);
      if (!inside(e)) clipped.push_back(intersect(s, e));
    } else if (inside(e)) {
      clipped.push_back(intersect(s, e));
    }
  }
  auto shoelace = [](const std::vector<std::pair<double, double>>& pts) {
    double acc = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto& a = pts[i];
      const auto& b = pts[(i + 1) % pts.size()];
      acc += a.first * b.second - b.first * a.second;
    }
    return 0.5 * std::abs(acc);
  };
  if (clipped.size() < 3) return 0.0;
  return shoelace(clipped) / simplex.volume();
}

// Fraction of a 2D box inside the origin-centered disc of radius r.
inline double disc_fraction(const HyperRectangle& box, double radius) {
  if (box.dimension() != 2) throw std::invalid_argument("disc_fraction: 2D only");
  const double a1 = box.lower[0], b1 = box.upper[0];
  const double a2 = box.lower[1], b2 = box.upper[1];
  const double r2 = radius * radius;
  auto arc_integral = [&](double x) {  // antiderivative of sqrt(r^2 - x^2)
    return 0.5 * (x * std::sqrt(std::max(r2 - x * x, 0.0)) +
                  r2 * std::asin(std::clamp(x / radius, -1.0, 1.0)));
  };
  const double x_full = b2 < radius ? std::sqrt(r2 - b2 * b2) : 0.0;
  const double x_zero = a2 < radius ? std::sqrt(r2 - a2 * a2) : 0.0;
  const double t1 = std::clamp(x_full, a1, b1);
  const double t2 = std::clamp(x_zero, a1, b1);
  double area = (t1 - a1) * (b2 - a2);
  if (t2 > t1) {
    area += arc_integral(t2) - arc_integral(t1) - a2 * (t2 - t1);
  }
  return area / ((b1 - a1) * (b2 - a2));
}

// Mean/variance pair of an indicator with ones-fraction q.
inline std::pair<double, double> bernoulli_stats(double q) {
  return {q, q * (1.0 - q)};
}

// ---------------------------------------------------------------------------
// Problem registry
// ---------------------------------------------------------------------------

struct Problem {
  std::string id;
  int dimension = 1;
  ParameterMap parameters;
  ModelFunction::Evaluator evaluator;  // over the unit hypercube
  std::optional<double> analytic_mean;
  std::string description;
};

inline Problem make_problem(const std::string& id) {
  if (id.rfind("hypersphere", 0) == 0 && id.size() == 12) {
    const int n = id.back() - '0';
    if (n >= 1 && n <= 6) {
      std::vector<MarginalDistribution> marginals(
          n, MarginalDistribution::uniform(0.0, 1.0));
      std::optional<double> mean;
      if (n <= 4) mean = hypersphere_mean_reference(n);
      return Problem{id, n, ParameterMap(std::move(marginals)),
                     hypersphere_indicator(n), mean,
                     "indicator of the volume-matched ball, clipped to the cube"};
    }
  }
  if (id == "fault") {
    return Problem{id, 2, fault_stress_parameters(), fault_stress_evaluator(),
                   std::nullopt,
                   "stress threshold of a pressurized fault (MPa)"};
  }
  if (id == "sod") {
    return Problem{id, 3, sod_parameters(), sod_evaluator(), std::nullopt,
                   "shock tube density at (x,t) = (0.7, 0.1)"};
  }
  if (id == "step1d") {
    std::vector<MarginalDistribution> marginals(
        1, MarginalDistribution::uniform(0.0, 1.0));
    return Problem{id, 1, ParameterMap(std::move(marginals)), interval_step(0.5),
                   0.5, "unit step at one half"};
  }
  throw std::invalid_argument("make_problem: unknown problem id '" + id + "'");
}

}  // namespace stratmc
