#pragma once

// Uniform tensor grids in d = 1, 2, sampled scalar fields, trapezoid
// quadrature, and masks for the classically allowed / turning / forbidden
// regions and the dyadic strips near a turning point.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "semiclass/error.hpp"
#include "semiclass/exponents.hpp"

namespace semiclass {

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  int n = 8;

  double spacing() const { return (hi - lo) / (n - 1); }
  double coord(int i) const { return i == n - 1 ? hi : lo + i * spacing(); }

  bool operator==(const Axis&) const = default;
};

/// Point of R^d, d <= 2.
using Point = Eigen::Vector2d;

class Grid {
 public:
  Grid(int d, std::vector<Axis> axes) : d_(d), axes_(std::move(axes)) {
    if (d_ < 1 || d_ > 2) throw DomainError("grids exist for d = 1, 2 only");
    if (static_cast<int>(axes_.size()) != d_) throw DomainError("one axis per dimension");
    for (const auto& a : axes_) {
      if (a.n < 8) throw DomainError("a grid axis needs at least 8 points");
      if (!(a.hi > a.lo)) throw DomainError("grid axis with non-positive extent");
    }
    for (int a = 0; a < d_; ++a) {
      const Axis& ax = axes_[a];
      axis_weights_[a].assign(ax.n, ax.spacing());
      axis_weights_[a].front() *= 0.5;
      axis_weights_[a].back() *= 0.5;
    }
    if (d_ == 1) axis_weights_[1] = {1.0};
  }

  static Grid line(double lo, double hi, int n) { return Grid(1, {Axis{lo, hi, n}}); }
  static Grid square(double lo, double hi, int n) {
    return Grid(2, {Axis{lo, hi, n}, Axis{lo, hi, n}});
  }

  int dim() const { return d_; }
  const Axis& axis(int i) const { return axes_[i]; }
  double spacing(int i) const { return axes_[i].spacing(); }
  Eigen::Index size() const {
    Eigen::Index n = 1;
    for (const auto& a : axes_) n *= a.n;
    return n;
  }
  /// Cell measure prod_i dx_i.
  double cell_measure() const {
    double w = 1.0;
    for (const auto& a : axes_) w *= a.spacing();
    return w;
  }

  /// Flat index, first axis fastest.
  Eigen::Index index(int i, int j = 0) const {
    return static_cast<Eigen::Index>(i) + static_cast<Eigen::Index>(axes_[0].n) * j;
  }
  std::array<int, 2> multi_index(Eigen::Index k) const {
    const int n0 = axes_[0].n;
    return {static_cast<int>(k % n0), static_cast<int>(k / n0)};
  }
  Point point(Eigen::Index k) const {
    const auto [i, j] = multi_index(k);
    return {axes_[0].coord(i), d_ == 2 ? axes_[1].coord(j) : 0.0};
  }

  /// Composite trapezoid weight of point k (endpoints halved along every axis).
  double weight(Eigen::Index k) const {
    const auto [i, j] = multi_index(k);
    return axis_weights_[0][i] * axis_weights_[1][j];
  }
  Eigen::VectorXd trapezoid_weights() const {
    Eigen::VectorXd w(size());
    for (Eigen::Index k = 0; k < w.size(); ++k) w[k] = weight(k);
    return w;
  }

  bool operator==(const Grid& o) const { return d_ == o.d_ && axes_ == o.axes_; }

 private:
  int d_;
  std::vector<Axis> axes_;
  std::array<std::vector<double>, 2> axis_weights_;
};

using GridPtr = std::shared_ptr<const Grid>;

inline GridPtr make_grid(Grid g) { return std::make_shared<const Grid>(std::move(g)); }

inline void require_same_grid(const GridPtr& a, const GridPtr& b, const char* what) {
  if (a != b && !(a && b && *a == *b))
    throw GridMismatch(std::string(what) + ": objects live on different grids");
}

/// Real samples of a function on a grid. Eigenfunctions of the real symmetric
/// discretizations used here are real, so complex values are never needed.
struct ScalarField {
  GridPtr grid;
  Eigen::VectorXd values;

  ScalarField() = default;
  ScalarField(GridPtr g, Eigen::VectorXd v) : grid(std::move(g)), values(std::move(v)) {
    if (!grid) throw DomainError("field without grid");
    if (values.size() != grid->size())
      throw GridMismatch("field length does not match the grid");
  }

  static ScalarField zeros(GridPtr g) {
    const auto n = g->size();
    return {std::move(g), Eigen::VectorXd::Zero(n)};
  }

  template <class F>
  static ScalarField sample(GridPtr g, F&& f) {
    Eigen::VectorXd v(g->size());
    for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = f(g->point(k));
    return {std::move(g), std::move(v)};
  }

  bool all_finite() const { return values.allFinite(); }
};

struct Region {
  GridPtr grid;
  std::vector<char> mask;
  std::string label;

  static Region full(GridPtr g, std::string label = "R^d") {
    const auto n = static_cast<std::size_t>(g->size());
    return {std::move(g), std::vector<char>(n, 1), std::move(label)};
  }

  std::size_t count() const {
    return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1));
  }
  bool empty() const { return count() == 0; }
};

/// Pairwise (tree) summation; order fixed by index so results are reproducible.
inline double pairwise_sum(std::span<const double> v) {
  constexpr std::size_t kBlock = 64;
  if (v.size() <= kBlock) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

/// (sum_{mask} |f|^p w)^{1/p} with trapezoid weights; masked max of |f| for p = inf.
inline double lq_norm(const ScalarField& f, double p, const Region& region,
                      Diagnostics* diag = nullptr) {
  require_same_grid(f.grid, region.grid, "lq_norm");
  if (!(p >= 1.0)) throw DomainError("lq_norm needs p >= 1");
  if (region.empty()) {
    warn(diag, "lq_norm: empty region '" + region.label + "'");
    return 0.0;
  }
  const auto n = f.values.size();
  if (std::isinf(p)) {
    double m = 0.0;
    for (Eigen::Index k = 0; k < n; ++k)
      if (region.mask[k]) m = std::max(m, std::abs(f.values[k]));
    return m;
  }
  const Grid& g = *f.grid;
  std::vector<double> terms;
  terms.reserve(region.count());
  for (Eigen::Index k = 0; k < n; ++k) {
    if (!region.mask[k]) continue;
    const double a = std::abs(f.values[k]);
    const double w = g.weight(k);
    terms.push_back(p == 1.0 ? a * w : p == 2.0 ? a * a * w : std::pow(a, p) * w);
  }
  const double s = pairwise_sum(terms);
  return p == 1.0 ? s : p == 2.0 ? std::sqrt(s) : std::pow(s, 1.0 / p);
}

inline double lq_norm(const ScalarField& f, double p) {
  return lq_norm(f, p, Region::full(f.grid));
}

/// Trapezoid L2 inner product.
inline double inner(const ScalarField& f, const ScalarField& g) {
  require_same_grid(f.grid, g.grid, "inner");
  const Grid& grid = *f.grid;
  std::vector<double> terms(static_cast<std::size_t>(f.values.size()));
  for (Eigen::Index k = 0; k < f.values.size(); ++k)
    terms[k] = f.values[k] * g.values[k] * grid.weight(k);
  return pairwise_sum(terms);
}

enum class RegionKind { Bulk, Turning, Forbidden };

inline std::string_view to_string(RegionKind k) {
  switch (k) {
    case RegionKind::Bulk: return "bulk";
    case RegionKind::Turning: return "turning";
    case RegionKind::Forbidden: return "forbidden";
  }
  return "?";
}

/// {V < E - eps}, {|V - E| <= eps}, {V > E + eps}; these partition the grid.
inline Region region_by_potential(const ScalarField& V, double E, double eps, RegionKind kind) {
  if (!(eps > 0.0)) throw DomainError("region_by_potential needs eps > 0");
  Region r{V.grid, std::vector<char>(static_cast<std::size_t>(V.values.size()), 0),
           std::string(to_string(kind))};
  for (Eigen::Index k = 0; k < V.values.size(); ++k) {
    const double v = V.values[k];
    bool in = false;
    switch (kind) {
      case RegionKind::Bulk: in = v < E - eps; break;
      case RegionKind::Turning: in = std::abs(v - E) <= eps; break;
      case RegionKind::Forbidden: in = v > E + eps; break;
    }
    r.mask[k] = in ? 1 : 0;
  }
  return r;
}

/// Strips A_eps = {|x_1 - origin - eps| < eps/2} for eps = 2^k h^{2/3}, k over
/// dyadic_strip_range(h, M, delta). Together they cover
/// {M h^{2/3} <= x_1 - origin <= delta/2}.
inline std::vector<Region> dyadic_strips(const GridPtr& grid, double h, double M, double delta,
                                         double axis_origin) {
  const auto range = dyadic_strip_range(h, M, delta);
  const double scale = std::cbrt(h * h);
  std::vector<Region> strips;
  for (int k = range.k_first; k <= range.k_last; ++k) {
    const double eps = std::ldexp(scale, k);
    Region r{grid, std::vector<char>(static_cast<std::size_t>(grid->size()), 0),
             "A_eps k=" + std::to_string(k)};
    for (Eigen::Index i = 0; i < grid->size(); ++i) {
      const double x1 = grid->point(i)[0] - axis_origin;
      r.mask[i] = std::abs(x1 - eps) < eps / 2.0 ? 1 : 0;
    }
    strips.push_back(std::move(r));
  }
  return strips;
}

/// Flags fields that have not decayed below `threshold` (relative to their sup)
/// on the outer boundary of the grid, i.e. where Dirichlet truncation is not benign.
inline bool check_boundary_decay(const ScalarField& f, double threshold = 1e-10,
                                 Diagnostics* diag = nullptr) {
  const Grid& g = *f.grid;
  const double sup = f.values.cwiseAbs().maxCoeff();
  double edge = 0.0;
  for (Eigen::Index k = 0; k < f.values.size(); ++k) {
    const auto mi = g.multi_index(k);
    bool boundary = false;
    for (int a = 0; a < g.dim(); ++a)
      boundary = boundary || mi[a] == 0 || mi[a] == g.axis(a).n - 1;
    if (boundary) edge = std::max(edge, std::abs(f.values[k]));
  }
  const bool ok = sup == 0.0 || edge <= threshold * sup;
  if (!ok) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "field does not decay at the grid boundary (edge/sup = %.3g)",
                  edge / sup);
    warn(diag, buf);
  }
  return ok;
}

/// CSV with columns x [, y], value; numerics printed with %.12g.
inline void write_csv(std::ostream& os, const ScalarField& f) {
  const Grid& g = *f.grid;
  os << (g.dim() == 1 ? "x,value\n" : "x,y,value\n");
  char buf[96];
  for (Eigen::Index k = 0; k < f.values.size(); ++k) {
    const Point p = g.point(k);
    if (g.dim() == 1)
      std::snprintf(buf, sizeof buf, "%.12g,%.12g\n", p[0], f.values[k]);
    else
      std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g\n", p[0], p[1], f.values[k]);
    os << buf;
  }
}

}  // namespace semiclass
