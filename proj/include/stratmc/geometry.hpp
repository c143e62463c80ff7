#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

#include "stratmc/random.hpp"
#include "stratmc/statistics.hpp"
#include "stratmc/variance.hpp"

namespace stratmc {

using Point = std::vector<double>;

inline constexpr int kMaxRectangleDim = 20;
inline constexpr int kMaxSimplexDim = 8;
inline constexpr double kPivotThreshold = 1e-12;

// Axis-aligned box in unit-cube coordinates.
struct HyperRectangle {
  std::vector<double> lower;
  std::vector<double> upper;

  HyperRectangle(std::vector<double> lo, std::vector<double> hi)
      : lower(std::move(lo)), upper(std::move(hi)) {
    const int n = static_cast<int>(lower.size());
    if (n < 1 || n > kMaxRectangleDim || upper.size() != lower.size()) {
      throw std::invalid_argument("HyperRectangle: bad dimension");
    }
    for (int i = 0; i < n; ++i) {
      if (!(lower[i] < upper[i]) || lower[i] < 0.0 || upper[i] > 1.0) {
        throw std::invalid_argument("HyperRectangle: requires 0 <= lower < upper <= 1");
      }
    }
  }

  static HyperRectangle unit_cube(int n) {
    return HyperRectangle(std::vector<double>(n, 0.0), std::vector<double>(n, 1.0));
  }

  int dimension() const noexcept { return static_cast<int>(lower.size()); }
};

namespace detail {

// In-place Gauss-Jordan inverse with partial pivoting, row-major k x k.
inline std::vector<double> invert_matrix(std::vector<double> a, int k) {
  std::vector<double> inv(static_cast<std::size_t>(k) * k, 0.0);
  for (int i = 0; i < k; ++i) inv[i * k + i] = 1.0;
  for (int col = 0; col < k; ++col) {
    int pivot = col;
    for (int r = col + 1; r < k; ++r) {
      if (std::abs(a[r * k + col]) > std::abs(a[pivot * k + col])) pivot = r;
    }
    if (std::abs(a[pivot * k + col]) < kPivotThreshold) {
      throw std::runtime_error("invert_matrix: singular system");
    }
    if (pivot != col) {
      for (int c = 0; c < k; ++c) {
        std::swap(a[pivot * k + c], a[col * k + c]);
        std::swap(inv[pivot * k + c], inv[col * k + c]);
      }
    }
    const double scale = 1.0 / a[col * k + col];
    for (int c = 0; c < k; ++c) {
      a[col * k + c] *= scale;
      inv[col * k + c] *= scale;
    }
    for (int r = 0; r < k; ++r) {
      if (r == col) continue;
      const double f = a[r * k + col];
      if (f == 0.0) continue;
      for (int c = 0; c < k; ++c) {
        a[r * k + c] -= f * a[col * k + c];
        inv[r * k + c] -= f * inv[col * k + c];
      }
    }
  }
  return inv;
}

// |det| of a row-major k x k matrix by partial-pivot elimination.
inline double abs_determinant(std::vector<double> a, int k) {
  double det = 1.0;
  for (int col = 0; col < k; ++col) {
    int pivot = col;
    for (int r = col + 1; r < k; ++r) {
      if (std::abs(a[r * k + col]) > std::abs(a[pivot * k + col])) pivot = r;
    }
    const double pv = a[pivot * k + col];
    if (pv == 0.0) return 0.0;
    if (pivot != col) {
      for (int c = 0; c < k; ++c) std::swap(a[pivot * k + c], a[col * k + c]);
    }
    det *= a[col * k + col];
    for (int r = col + 1; r < k; ++r) {
      const double f = a[r * k + col] / a[col * k + col];
      if (f == 0.0) continue;
      for (int c = col; c < k; ++c) a[r * k + c] -= f * a[col * k + c];
    }
  }
  return std::abs(det);
}

}  // namespace detail

// n-simplex given by n+1 affinely independent vertices. The affine system
// mapping a point to barycentric coordinates is inverted once at
// construction and cached; membership, splitting sides, and tentative
// bookkeeping all reuse it.
class Simplex {
 public:
  explicit Simplex(std::vector<Point> vertices) : vertices_(std::move(vertices)) {
    const int n = dimension();
    if (n < 1 || n > kMaxSimplexDim ||
        vertices_.size() != static_cast<std::size_t>(n) + 1) {
      throw std::invalid_argument("Simplex: needs n+1 vertices, 1 <= n <= 8");
    }
    const int k = n + 1;
    std::vector<double> m(static_cast<std::size_t>(k) * k);
    for (int j = 0; j < k; ++j) {
      if (static_cast<int>(vertices_[j].size()) != n) {
        throw std::invalid_argument("Simplex: vertex dimension mismatch");
      }
      for (int i = 0; i < n; ++i) m[i * k + j] = vertices_[j][i];
      m[n * k + j] = 1.0;
    }
    try {
      inverse_ = detail::invert_matrix(std::move(m), k);
    } catch (const std::runtime_error&) {
      throw std::runtime_error("Simplex: degenerate vertices");
    }
  }

  int dimension() const noexcept {
    return vertices_.empty() ? 0 : static_cast<int>(vertices_.front().size());
  }

  const std::vector<Point>& vertices() const noexcept { return vertices_; }

  // Weights solving p = sum lambda_i v_i with sum lambda_i = 1.
  std::vector<double> barycentric(std::span<const double> p) const {
    const int n = dimension();
    if (static_cast<int>(p.size()) != n) {
      throw std::invalid_argument("barycentric: dimension mismatch");
    }
    const int k = n + 1;
    std::vector<double> lambda(k, 0.0);
    for (int r = 0; r < k; ++r) {
      double acc = inverse_[r * k + n];  // constant column times 1
      for (int c = 0; c < n; ++c) acc += inverse_[r * k + c] * p[c];
      lambda[r] = acc;
    }
    return lambda;
  }

  double volume() const {
    const int n = dimension();
    std::vector<double> m(static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) m[i * n + j] = vertices_[j + 1][i] - vertices_[0][i];
    }
    double factorial = 1.0;
    for (int i = 2; i <= n; ++i) factorial *= i;
    return detail::abs_determinant(std::move(m), n) / factorial;
  }

 private:
  std::vector<Point> vertices_;
  std::vector<double> inverse_;  // (n+1) x (n+1), row-major
};

using Geometry = std::variant<HyperRectangle, Simplex>;

// Identifies a candidate bisection: a coordinate axis for rectangles
// (b == -1), or the edge between vertices a < b for simplices.
struct SplitPlane {
  int a = 0;
  int b = -1;
  bool operator==(const SplitPlane&) const = default;
};

enum class Side { Minus, Plus };

inline int dimension(const Geometry& g) {
  return std::visit([](const auto& shape) { return shape.dimension(); }, g);
}

inline double measure(const Geometry& g) {
  if (const auto* r = std::get_if<HyperRectangle>(&g)) {
    double v = 1.0;
    for (int i = 0; i < r->dimension(); ++i) v *= r->upper[i] - r->lower[i];
    if (!(v > 0.0)) throw std::runtime_error("measure: degenerate rectangle");
    return v;
  }
  const double v = std::get<Simplex>(g).volume();
  if (!(v > 0.0)) throw std::runtime_error("measure: degenerate simplex");
  return v;
}

// Membership with boundaries closed except where a sibling stratum would
// also claim the point; redistribution itself always goes through side_of.
inline bool contains(const Geometry& g, std::span<const double> p) {
  if (static_cast<int>(p.size()) != dimension(g)) {
    throw std::invalid_argument("contains: dimension mismatch");
  }
  if (const auto* r = std::get_if<HyperRectangle>(&g)) {
    for (int i = 0; i < r->dimension(); ++i) {
      const bool at_domain_edge = r->upper[i] == 1.0 && p[i] == 1.0;
      if (p[i] < r->lower[i] || (p[i] >= r->upper[i] && !at_domain_edge)) return false;
    }
    return true;
  }
  const std::vector<double> lambda = std::get<Simplex>(g).barycentric(p);
  return std::all_of(lambda.begin(), lambda.end(), [](double l) { return l >= 0.0; });
}

inline std::vector<Point> sample_uniform(const Geometry& g, RandomSource& rng,
                                         std::size_t k) {
  std::vector<Point> out;
  out.reserve(k);
  if (const auto* r = std::get_if<HyperRectangle>(&g)) {
    const int n = r->dimension();
    for (std::size_t s = 0; s < k; ++s) {
      Point p(n);
      for (int i = 0; i < n; ++i) {
        p[i] = r->lower[i] + (r->upper[i] - r->lower[i]) * rng.next_unit();
      }
      out.push_back(std::move(p));
    }
    return out;
  }
  // Convex combination with Dirichlet(1,...,1) weights, generated as
  // normalized exponential spacings.
  const Simplex& sx = std::get<Simplex>(g);
  const int n = sx.dimension();
  std::vector<double> w(n + 1);
  for (std::size_t s = 0; s < k; ++s) {
    double total = 0.0;
    for (int i = 0; i <= n; ++i) {
      w[i] = rng.next_exponential();
      total += w[i];
    }
    Point p(n, 0.0);
    if (total == 0.0) {
      for (int i = 0; i <= n; ++i) w[i] = 1.0;
      total = n + 1.0;
    }
    for (int i = 0; i <= n; ++i) {
      const double wi = w[i] / total;
      for (int d = 0; d < n; ++d) p[d] += wi * sx.vertices()[i][d];
    }
    out.push_back(std::move(p));
  }
  return out;
}

// Candidate bisections in deterministic order: n axes for a rectangle,
// n(n+1)/2 edges for a simplex.
inline std::vector<SplitPlane> split_planes(const Geometry& g) {
  std::vector<SplitPlane> planes;
  const int n = dimension(g);
  if (std::holds_alternative<HyperRectangle>(g)) {
    for (int i = 0; i < n; ++i) planes.push_back({i, -1});
    return planes;
  }
  for (int i = 0; i <= n; ++i) {
    for (int j = i + 1; j <= n; ++j) planes.push_back({i, j});
  }
  return planes;
}

inline void validate_plane(const Geometry& g, const SplitPlane& plane) {
  const int n = dimension(g);
  if (std::holds_alternative<HyperRectangle>(g)) {
    if (plane.b != -1 || plane.a < 0 || plane.a >= n) {
      throw std::invalid_argument("split plane: bad axis");
    }
    return;
  }
  if (plane.a < 0 || plane.b <= plane.a || plane.b > n) {
    throw std::invalid_argument("split plane: bad edge");
  }
}

// Equal-measure bisection through the axis midpoint (rectangle) or the
// hyperplane spanned by an edge midpoint and the remaining vertices
// (simplex). The minus child keeps the lower-indexed edge vertex.
inline std::pair<Geometry, Geometry> bisect(const Geometry& g,
                                            const SplitPlane& plane) {
  validate_plane(g, plane);
  if (const auto* r = std::get_if<HyperRectangle>(&g)) {
    const double mid = r->lower[plane.a] + 0.5 * (r->upper[plane.a] - r->lower[plane.a]);
    HyperRectangle minus = *r;
    HyperRectangle plus = *r;
    minus.upper[plane.a] = mid;
    plus.lower[plane.a] = mid;
    return {Geometry(std::move(minus)), Geometry(std::move(plus))};
  }
  const Simplex& sx = std::get<Simplex>(g);
  const int n = sx.dimension();
  Point mid(n);
  for (int d = 0; d < n; ++d) {
    mid[d] = 0.5 * (sx.vertices()[plane.a][d] + sx.vertices()[plane.b][d]);
  }
  std::vector<Point> vminus = sx.vertices();
  std::vector<Point> vplus = sx.vertices();
  vminus[plane.b] = mid;
  vplus[plane.a] = std::move(mid);
  return {Geometry(Simplex(std::move(vminus))), Geometry(Simplex(std::move(vplus)))};
}

// Which bisection child would receive p. Boundary points go to Plus.
inline Side side_of(const Geometry& g, const SplitPlane& plane,
                    std::span<const double> p) {
  validate_plane(g, plane);
  if (!contains(g, p)) throw std::invalid_argument("side_of: point outside geometry");
  if (const auto* r = std::get_if<HyperRectangle>(&g)) {
    const double mid = r->lower[plane.a] + 0.5 * (r->upper[plane.a] - r->lower[plane.a]);
    return p[plane.a] < mid ? Side::Minus : Side::Plus;
  }
  const std::vector<double> lambda = std::get<Simplex>(g).barycentric(p);
  return lambda[plane.a] > lambda[plane.b] ? Side::Minus : Side::Plus;
}

// Side decision reusing an already computed barycentric vector.
inline Side side_of_barycentric(std::span<const double> lambda,
                                const SplitPlane& plane) noexcept {
  return lambda[plane.a] > lambda[plane.b] ? Side::Minus : Side::Plus;
}

inline int kuhn_orientation_count(int n) {
  if (n < 1 || n > kMaxSimplexDim) throw std::invalid_argument("kuhn: 1 <= n <= 8");
  return 1 << (n - 1);
}

// Reflection pattern of one of the 2^(n-1) distinct diagonal choices.
// Complementary patterns produce the same tessellation, so the first
// coordinate is never reflected.
inline std::vector<bool> kuhn_orientation(int n, int index) {
  if (index < 0 || index >= kuhn_orientation_count(n)) {
    throw std::invalid_argument("kuhn_orientation: index out of range");
  }
  std::vector<bool> reflect(n, false);
  for (int i = 1; i < n; ++i) reflect[i] = (index >> (i - 1)) & 1;
  return reflect;
}

// Tessellation of the unit cube into n! simplices sharing the main
// diagonal: vertex chains 0 -> e_{pi(1)} -> ... -> (1,...,1) over all
// permutations pi, with coordinates optionally reflected first.
inline std::vector<Simplex> kuhn_decomposition(int n,
                                               const std::vector<bool>& reflect) {
  if (n < 1 || n > kMaxSimplexDim) throw std::invalid_argument("kuhn: 1 <= n <= 8");
  if (static_cast<int>(reflect.size()) != n) {
    throw std::invalid_argument("kuhn: reflect length != n");
  }
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<Simplex> out;
  do {
    std::vector<Point> verts;
    verts.reserve(n + 1);
    Point v(n, 0.0);
    verts.push_back(v);
    for (int step = 0; step < n; ++step) {
      v[perm[step]] = 1.0;
      verts.push_back(v);
    }
    for (auto& vertex : verts) {
      for (int i = 0; i < n; ++i) {
        if (reflect[i]) vertex[i] = 1.0 - vertex[i];
      }
    }
    out.emplace_back(std::move(verts));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

// Assigns a point to the tessellation member it lies in; ties on shared
// faces resolve to the most interior fit (largest minimal barycentric
// weight), so every point lands in exactly one simplex.
inline std::size_t assign_to_simplex(const std::vector<Simplex>& simplices,
                                     std::span<const double> p) {
  std::size_t best = 0;
  double best_min = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < simplices.size(); ++i) {
    const std::vector<double> lambda = simplices[i].barycentric(p);
    const double lo = *std::min_element(lambda.begin(), lambda.end());
    if (lo > best_min) {
      best_min = lo;
      best = i;
    }
  }
  return best;
}

struct TessellationChoice {
  int orientation = 0;
  std::vector<Simplex> simplices;
  std::vector<StratumStats> stats;
  std::vector<std::size_t> assignment;  // sample index -> simplex index
};

// Picks, among the 2^(n-1) diagonal orientations, the tessellation whose
// empirical estimator variance over the given samples is smallest. Ties go
// to the lowest orientation index.
inline TessellationChoice select_initial_tessellation(
    int n, std::span<const Point> points, std::span<const double> values,
    double alpha) {
  if (points.empty() || points.size() != values.size()) {
    throw std::invalid_argument("select_initial_tessellation: bad samples");
  }
  const int count = kuhn_orientation_count(n);
  TessellationChoice best;
  double best_score = std::numeric_limits<double>::infinity();
  for (int o = 0; o < count; ++o) {
    std::vector<Simplex> simplices = kuhn_decomposition(n, kuhn_orientation(n, o));
    std::vector<StratumStats> stats(simplices.size());
    std::vector<std::size_t> assignment(points.size());
    for (std::size_t s = 0; s < points.size(); ++s) {
      const std::size_t idx = assign_to_simplex(simplices, points[s]);
      assignment[s] = idx;
      stats[idx].update(values[s]);
    }
    StrataSummary summary;
    summary.p.assign(simplices.size(), 0.0);
    summary.sigma.resize(simplices.size());
    for (std::size_t i = 0; i < simplices.size(); ++i) {
      summary.p[i] = simplices[i].volume();
      summary.sigma[i] = stats[i].stddev();
    }
    summary.n_samples = static_cast<std::int64_t>(points.size());
    const double a_eff = effective_alpha(summary, alpha);
    const double score =
        summary.mean_sigma() > 0.0 ? variance_constant(summary, a_eff) : 0.0;
    if (score < best_score) {
      best_score = score;
      best = TessellationChoice{o, std::move(simplices), std::move(stats),
                                std::move(assignment)};
    }
  }
  return best;
}

}  // namespace stratmc
