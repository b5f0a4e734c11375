#pragma once

// P = -h^2 Delta + V on a grid: second-order central differences, Dirichlet
// truncation just outside the box. Symmetric in the Euclidean inner product.

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "semiclass/error.hpp"
#include "semiclass/grid.hpp"
#include "semiclass/potential.hpp"

namespace semiclass {

struct DiscreteOperator {
  GridPtr grid;
  double h = 0.0;
  ScalarField V;
  Eigen::SparseMatrix<double, Eigen::RowMajor> matrix;

  Eigen::Index size() const { return matrix.rows(); }

  /// Gershgorin upper bound on the spectrum (= on ||P|| since P >= min V >= 0 for
  /// nonnegative potentials).
  double upper_bound() const {
    double m = -std::numeric_limits<double>::infinity();
    for (Eigen::Index r = 0; r < matrix.outerSize(); ++r) {
      double diag = 0.0, off = 0.0;
      for (decltype(matrix)::InnerIterator it(matrix, r); it; ++it) {
        if (it.col() == r)
          diag += it.value();
        else
          off += std::abs(it.value());
      }
      m = std::max(m, diag + off);
    }
    return m;
  }

  /// The discrete Laplacian is nonnegative, so the spectrum lies above min V.
  double lower_bound() const { return V.values.minCoeff(); }

  double norm_estimate() const {
    return std::max(std::abs(upper_bound()), std::abs(lower_bound()));
  }

  /// Tridiagonal data (diagonal, off-diagonal) for d = 1.
  std::pair<Eigen::VectorXd, Eigen::VectorXd> tridiagonal() const {
    if (grid->dim() != 1) throw DomainError("tridiagonal form exists only for d = 1");
    const Eigen::Index n = size();
    Eigen::VectorXd diag(n), off(n - 1);
    const double c = h * h / (grid->spacing(0) * grid->spacing(0));
    for (Eigen::Index i = 0; i < n; ++i) diag[i] = 2.0 * c + V.values[i];
    off.setConstant(-c);
    return {diag, off};
  }
};

inline DiscreteOperator discretize(const ScalarField& V, double h, Diagnostics* diag = nullptr) {
  if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("semiclassical parameter h must be > 0");
  if (!V.all_finite()) throw DomainError("potential samples must be finite");
  const Grid& g = *V.grid;
  for (int a = 0; a < g.dim(); ++a) {
    if (g.spacing(a) > h / 4.0) {
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "resolution: dx_%d = %.3g exceeds h/4 = %.3g; oscillations may be under-resolved",
                    a, g.spacing(a), h / 4.0);
      warn(diag, buf);
    }
  }

  const Eigen::Index n = g.size();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(n) * (2 * g.dim() + 1));
  std::array<double, 2> c{};
  for (int a = 0; a < g.dim(); ++a) c[a] = h * h / (g.spacing(a) * g.spacing(a));

  for (Eigen::Index k = 0; k < n; ++k) {
    const auto mi = g.multi_index(k);
    double d = V.values[k];
    for (int a = 0; a < g.dim(); ++a) {
      d += 2.0 * c[a];
      const Eigen::Index stride = a == 0 ? 1 : g.axis(0).n;
      if (mi[a] > 0) trip.emplace_back(k, k - stride, -c[a]);
      if (mi[a] < g.axis(a).n - 1) trip.emplace_back(k, k + stride, -c[a]);
    }
    trip.emplace_back(k, k, d);
  }
  DiscreteOperator P;
  P.grid = V.grid;
  P.h = h;
  P.V = V;
  P.matrix.resize(n, n);
  P.matrix.setFromTriplets(trip.begin(), trip.end());
  P.matrix.makeCompressed();
  return P;
}

inline DiscreteOperator discretize(const PotentialSpec& spec, const GridPtr& grid, double h,
                                   Diagnostics* diag = nullptr) {
  if (!(h > 0.0)) throw DomainError("semiclassical parameter h must be > 0");
  return discretize(sample_potential(spec, grid), h, diag);
}

/// Exact sparse product; every row summed in fixed index order.
inline Eigen::VectorXd apply(const DiscreteOperator& P, const Eigen::VectorXd& f) {
  return P.matrix * f;
}

inline ScalarField matvec(const DiscreteOperator& P, const ScalarField& f) {
  require_same_grid(P.grid, f.grid, "matvec");
  return {P.grid, apply(P, f.values)};
}

}  // namespace semiclass
