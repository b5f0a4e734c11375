#pragma once

// Spectral clusters Pi_h = 1_{P in [E - w, E + w]}.
//   d = 1: Sturm-sequence bisection (exact inertia counts) + inverse iteration.
//   d = 2: Chebyshev-Jackson filtered subspace iteration with Rayleigh-Ritz.
// Plus analytic clusters of the isotropic harmonic oscillator |x|^2, either
// materialized on a grid or kept in separable (tensor) form.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "semiclass/error.hpp"
#include "semiclass/grid.hpp"
#include "semiclass/operator.hpp"
#include "semiclass/specialfn.hpp"
#include "semiclass/weyl.hpp"

namespace semiclass {

/// Orthonormal eigenpairs inside a window, eigenvectors stored as the columns
/// of `vectors` and normalized in the trapezoid L2 inner product of the grid.
struct SpectralCluster {
  double E = 0.0;
  double h = 0.0;
  double halfwidth = 0.0;
  GridPtr grid;
  std::vector<double> eigenvalues;
  Eigen::MatrixXd vectors;
  std::vector<double> residuals;  ///< ||P u - lambda u||_2 per pair (0 for analytic clusters)
  double tolerance = 0.0;
  Diagnostics diagnostics;

  Eigen::Index rank() const { return static_cast<Eigen::Index>(eigenvalues.size()); }
  bool empty() const { return eigenvalues.empty(); }

  ScalarField eigenvector(Eigen::Index j) const { return {grid, vectors.col(j)}; }

  /// Trapezoid Gram matrix <u_i, u_j>.
  Eigen::MatrixXd gram() const {
    const Eigen::VectorXd w = grid->trapezoid_weights();
    return vectors.transpose() * w.asDiagonal() * vectors;
  }

  /// sum_j w_j |u_j|^2
  ScalarField density(std::span<const double> weights) const {
    if (static_cast<Eigen::Index>(weights.size()) != rank())
      throw DomainError("density: one weight per eigenpair required");
    Eigen::VectorXd rho = Eigen::VectorXd::Zero(grid->size());
    for (Eigen::Index j = 0; j < rank(); ++j)
      if (weights[j] != 0.0) rho += weights[j] * vectors.col(j).cwiseAbs2();
    return {grid, std::move(rho)};
  }

  /// (u_j(x_k))_j
  Eigen::VectorXd values_at(Eigen::Index k) const { return vectors.row(k).transpose(); }

  /// Projector kernel row y -> Pi(x_k, y) = sum_j u_j(x_k) u_j(y).
  ScalarField kernel_row(Eigen::Index k) const { return {grid, vectors * values_at(k)}; }
};

struct SolverOptions {
  double slack = 1e-12;        ///< inclusive window edge slack (relative to max(1, |E|))
  double rel_tol = 1e-8;       ///< residual tolerance relative to the ||P|| estimate
  int max_iterations = 60;     ///< subspace iterations (d = 2)
  int degree = 0;              ///< Chebyshev degree (0: chosen from the window width)
  int block = 0;               ///< subspace size (0: 1.5 x Weyl estimate + margin)
  std::uint64_t seed = 20240531;
};

// ---------------------------------------------------------------------------
// Tridiagonal kernels

namespace detail {

/// Number of eigenvalues of the symmetric tridiagonal (diag, off) strictly below x
/// (Sturm count from the LDL^T pivots).
inline Eigen::Index sturm_count(const Eigen::VectorXd& diag, const Eigen::VectorXd& off,
                                double x, double pivmin) {
  Eigen::Index count = 0;
  double d = diag[0] - x;
  if (std::abs(d) < pivmin) d = -pivmin;
  if (d < 0.0) ++count;
  for (Eigen::Index i = 1; i < diag.size(); ++i) {
    d = (diag[i] - x) - off[i - 1] * off[i - 1] / d;
    if (std::abs(d) < pivmin) d = -pivmin;
    if (d < 0.0) ++count;
  }
  return count;
}

inline double pivot_floor(const Eigen::VectorXd& off) {
  const double m = off.size() ? off.cwiseAbs2().maxCoeff() : 1.0;
  return std::numeric_limits<double>::min() * std::max(1.0, m);
}

/// k-th eigenvalue (0-based, ascending) inside [lo, hi] by bisection on Sturm counts.
inline double bisect_eigenvalue(const Eigen::VectorXd& diag, const Eigen::VectorXd& off,
                                Eigen::Index k, double lo, double hi, double pivmin) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (sturm_count(diag, off, mid, pivmin) > k)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

/// Solves (T - shift I) x = b with Gaussian elimination and partial pivoting
/// (the LAPACK gttrf/gttrs scheme); zero pivots are nudged to keep inverse iteration going.
inline Eigen::VectorXd solve_shifted_tridiagonal(const Eigen::VectorXd& diag,
                                                 const Eigen::VectorXd& off, double shift,
                                                 Eigen::VectorXd b, double tiny) {
  const Eigen::Index n = diag.size();
  Eigen::VectorXd d = diag.array() - shift;
  Eigen::VectorXd dl = off, du = off;
  Eigen::VectorXd du2 = Eigen::VectorXd::Zero(std::max<Eigen::Index>(n - 2, 1));
  std::vector<char> piv(static_cast<std::size_t>(std::max<Eigen::Index>(n - 1, 1)), 0);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    if (std::abs(d[i]) >= std::abs(dl[i])) {
      if (d[i] == 0.0) d[i] = tiny;
      const double fact = dl[i] / d[i];
      dl[i] = fact;
      d[i + 1] -= fact * du[i];
    } else {
      const double fact = d[i] / dl[i];
      d[i] = dl[i];
      dl[i] = fact;
      const double temp = du[i];
      du[i] = d[i + 1];
      d[i + 1] = temp - fact * d[i + 1];
      if (i + 2 < n) {
        du2[i] = du[i + 1];
        du[i + 1] = -fact * du[i + 1];
      }
      piv[i] = 1;
    }
  }
  if (d[n - 1] == 0.0) d[n - 1] = tiny;
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    if (piv[i]) {
      const double temp = b[i] - dl[i] * b[i + 1];
      b[i] = b[i + 1];
      b[i + 1] = temp;
    } else {
      b[i + 1] -= dl[i] * b[i];
    }
  }
  b[n - 1] /= d[n - 1];
  if (n > 1) b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
  for (Eigen::Index i = n - 3; i >= 0; --i)
    b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
  return b;
}

inline void normalize_l2(const Grid& g, Eigen::Ref<Eigen::VectorXd> v) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < v.size(); ++k) s += g.weight(k) * v[k] * v[k];
  v /= std::sqrt(s);
}

inline void log_weyl_ratio(SpectralCluster& c, const DiscreteOperator& P) {
  const double vol = grid_phase_volume(P.V, c.E - c.halfwidth, c.E + c.halfwidth);
  const double predicted = weyl_predicted_count(vol, c.h, P.grid->dim());
  char buf[200];
  std::snprintf(buf, sizeof buf, "weyl: count %ld, predicted %.4g, ratio %.4g",
                static_cast<long>(c.rank()), predicted,
                predicted > 0.0 ? c.rank() / predicted : 0.0);
  c.diagnostics.note(buf);
}

}  // namespace detail

/// Number of eigenvalues of the 1D discrete operator in the closed interval [a, b].
inline Eigen::Index count_eigenvalues_1d(const DiscreteOperator& P, double a, double b) {
  const auto [diag, off] = P.tridiagonal();
  const double pivmin = detail::pivot_floor(off);
  return detail::sturm_count(diag, off, std::nextafter(b, kInf), pivmin) -
         detail::sturm_count(diag, off, a, pivmin);
}

/// Eigenvalue of the 1D discrete operator closest to E0.
inline double nearest_eigenvalue_1d(const DiscreteOperator& P, double E0) {
  const auto [diag, off] = P.tridiagonal();
  const double pivmin = detail::pivot_floor(off);
  const double lo = P.lower_bound() - 1.0, hi = P.upper_bound() + 1.0;
  const Eigen::Index k = detail::sturm_count(diag, off, E0, pivmin);
  double best = kInf;
  for (Eigen::Index j : {k - 1, k}) {
    if (j < 0 || j >= diag.size()) continue;
    const double l = detail::bisect_eigenvalue(diag, off, j, lo, hi, pivmin);
    if (std::abs(l - E0) < std::abs(best - E0)) best = l;
  }
  return best;
}

namespace detail {

inline SpectralCluster solve_window_1d(const DiscreteOperator& P, double E, double halfwidth,
                                       const SolverOptions& opt) {
  SpectralCluster c;
  c.E = E;
  c.h = P.h;
  c.halfwidth = halfwidth;
  c.grid = P.grid;
  c.tolerance = opt.rel_tol * P.norm_estimate();

  const auto [diag, off] = P.tridiagonal();
  const double pivmin = pivot_floor(off);
  const double slack = opt.slack * std::max(1.0, std::abs(E));
  const double lo = E - halfwidth - slack, hi = E + halfwidth + slack;
  const Eigen::Index k_lo = sturm_count(diag, off, lo, pivmin);
  const Eigen::Index k_hi = sturm_count(diag, off, std::nextafter(hi, kInf), pivmin);
  const Eigen::Index m = k_hi - k_lo;
  const Eigen::Index n = diag.size();
  c.vectors.resize(n, m);

  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const double tiny = std::numeric_limits<double>::epsilon() * P.norm_estimate();
  const double dx_measure = P.grid->cell_measure();

  for (Eigen::Index j = 0; j < m; ++j) {
    const double lambda = bisect_eigenvalue(diag, off, k_lo + j, lo, hi, pivmin);
    Eigen::VectorXd x(n);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = U(rng);
    double res = kInf;
    for (int it = 0; it < 6 && res > 0.1 * c.tolerance; ++it) {
      x = solve_shifted_tridiagonal(diag, off, lambda, x, tiny);
      for (Eigen::Index i = 0; i < j; ++i) {  // Euclidean reorthogonalization in the cluster
        const auto col = c.vectors.col(i);
        x -= (col.dot(x) / col.squaredNorm()) * col;
      }
      x.normalize();
      res = (apply(P, x) - lambda * x).norm();
    }
    c.eigenvalues.push_back(lambda);
    c.residuals.push_back(res);
    c.vectors.col(j) = x / std::sqrt(dx_measure);
    if (res > c.tolerance) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "inverse iteration residual %.3g above tolerance at lambda = %.12g",
                    res, lambda);
      c.diagnostics.warn(buf);
    }
  }
  for (Eigen::Index j = 0; j < m; ++j) normalize_l2(*P.grid, c.vectors.col(j));
  // Sturm counts fix the multiplicity, so coincident values (tunnelling pairs split
  // below working precision) are expected; reorthogonalization separates their vectors.
  for (Eigen::Index j = 1; j < m; ++j)
    if (!(c.eigenvalues[j] > c.eigenvalues[j - 1]))
      c.diagnostics.note("eigenvalues " + std::to_string(j - 1) + " and " + std::to_string(j) +
                         " coincide to working precision");
  return c;
}

/// Jackson-damped Chebyshev coefficients of the indicator of [alpha, beta] in [-1, 1].
inline Eigen::VectorXd jackson_indicator(double alpha, double beta, int m) {
  const double ta = std::acos(std::clamp(alpha, -1.0, 1.0));
  const double tb = std::acos(std::clamp(beta, -1.0, 1.0));
  const double pi = std::numbers::pi;
  Eigen::VectorXd c(m + 1);
  c[0] = (ta - tb) / pi;
  for (int k = 1; k <= m; ++k) c[k] = 2.0 * (std::sin(k * ta) - std::sin(k * tb)) / (k * pi);
  const double a = pi / (m + 1);
  for (int k = 0; k <= m; ++k)
    c[k] *= ((m - k + 1) * std::cos(k * a) + std::sin(k * a) / std::tan(a)) / (m + 1);
  return c;
}

inline double chebyshev_value(const Eigen::VectorXd& c, double x) {
  double t0 = 1.0, t1 = x, s = c[0] + (c.size() > 1 ? c[1] * x : 0.0);
  for (Eigen::Index k = 2; k < c.size(); ++k) {
    const double t2 = 2.0 * x * t1 - t0;
    s += c[k] * t2;
    t0 = t1;
    t1 = t2;
  }
  return s;
}

inline Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& Y) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(Y);
  return qr.householderQ() * Eigen::MatrixXd::Identity(Y.rows(), Y.cols());
}

inline SpectralCluster solve_window_2d(const DiscreteOperator& P, double E, double halfwidth,
                                       const SolverOptions& opt) {
  SpectralCluster c;
  c.E = E;
  c.h = P.h;
  c.halfwidth = halfwidth;
  c.grid = P.grid;
  const double norm = P.norm_estimate();
  c.tolerance = opt.rel_tol * norm;

  const double a0 = P.lower_bound(), b0 = P.upper_bound();
  const double centre = 0.5 * (a0 + b0), half = 0.5 * (b0 - a0) * (1.0 + 1e-9);
  const double slack = opt.slack * std::max(1.0, std::abs(E));
  const double lo = E - halfwidth - slack, hi = E + halfwidth + slack;
  const double alpha = (lo - centre) / half, beta = (hi - centre) / half;
  if (beta <= -1.0 || alpha >= 1.0) {
    c.diagnostics.note("window outside the spectrum bounds");
    c.vectors.resize(P.size(), 0);
    return c;
  }

  // A filter slightly wider than the window so edge eigenvalues are not damped.
  const double widen = 0.5 * halfwidth / half;
  const double fa = std::max(-1.0, alpha - widen), fb = std::min(1.0, beta + widen);
  const double dtheta = std::acos(fa) - std::acos(fb);
  const int degree = opt.degree > 0 ? opt.degree
                                    : std::clamp(static_cast<int>(std::ceil(8.0 * std::numbers::pi / dtheta)),
                                                 40, 40000);
  const Eigen::VectorXd coef = jackson_indicator(fa, fb, degree);

  const double vol = grid_phase_volume(P.V, lo, hi);
  const double est = weyl_predicted_count(vol, P.h, P.grid->dim());
  Eigen::Index block = opt.block > 0 ? opt.block
                                     : static_cast<Eigen::Index>(std::ceil(1.5 * est)) + 12;
  block = std::min<Eigen::Index>(block, P.size());

  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> N01;
  const auto random_block = [&](Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd X(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) X(i, j) = N01(rng);
    return X;
  };
  Eigen::MatrixXd X = orthonormalize(random_block(P.size(), block));

  const auto filter = [&](const Eigen::MatrixXd& X0) {
    Eigen::MatrixXd T0 = X0;
    Eigen::MatrixXd T1 = (P.matrix * X0 - centre * X0) / half;
    Eigen::MatrixXd Y = coef[0] * T0 + coef[1] * T1;
    for (int k = 2; k <= degree; ++k) {
      Eigen::MatrixXd T2 = (2.0 / half) * (P.matrix * T1 - centre * T1) - T0;
      Y += coef[k] * T2;
      T0.swap(T1);
      T1.swap(T2);
    }
    return Y;
  };

  Eigen::VectorXd theta;
  Eigen::MatrixXd ritz;
  std::vector<double> res;
  Eigen::Index previous_count = -1;
  int it = 0;
  double worst = kInf;
  for (; it < opt.max_iterations; ++it) {
    X = orthonormalize(filter(X));
    const Eigen::MatrixXd AX = P.matrix * X;
    const Eigen::MatrixXd Hs = X.transpose() * AX;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (Hs + Hs.transpose()));
    theta = es.eigenvalues();
    ritz = X * es.eigenvectors();
    const Eigen::MatrixXd R = AX * es.eigenvectors() - ritz * theta.asDiagonal();
    X = ritz;
    res.assign(static_cast<std::size_t>(block), 0.0);
    Eigen::Index count = 0;
    worst = 0.0;
    for (Eigen::Index j = 0; j < block; ++j) {
      res[j] = R.col(j).norm();
      if (theta[j] >= lo && theta[j] <= hi) {
        ++count;
        worst = std::max(worst, res[j]);
      }
    }
    // Verification: the block must reach past the filter's acceptance region,
    // otherwise eigenvalues with a large filter value could be missing.
    double p_in = kInf, p_min_block = kInf;
    for (Eigen::Index j = 0; j < block; ++j) {
      const double p = std::abs(chebyshev_value(coef, (theta[j] - centre) / half));
      if (theta[j] >= lo && theta[j] <= hi) p_in = std::min(p_in, p);
      p_min_block = std::min(p_min_block, p);
    }
    const bool saturated = count > 0 && p_min_block > 0.05 * p_in && block < P.size();
    if (saturated || count > block - 4) {
      const Eigen::Index grow = std::max<Eigen::Index>(8, block / 2);
      Eigen::MatrixXd Xn(P.size(), block + grow);
      Xn << X, random_block(P.size(), grow);
      X = orthonormalize(Xn);
      block += grow;
      c.diagnostics.note("subspace grown to " + std::to_string(block));
      previous_count = -1;
      continue;
    }
    if (count == previous_count && worst <= c.tolerance) break;
    previous_count = count;
  }
  if (it == opt.max_iterations)
    throw ConvergenceError("filtered subspace iteration did not converge in the window", it, worst);

  std::vector<Eigen::Index> keep;
  for (Eigen::Index j = 0; j < block; ++j)
    if (theta[j] >= lo && theta[j] <= hi) keep.push_back(j);
  c.vectors.resize(P.size(), static_cast<Eigen::Index>(keep.size()));
  const double scale = 1.0 / std::sqrt(P.grid->cell_measure());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    c.eigenvalues.push_back(theta[keep[i]]);
    c.residuals.push_back(res[keep[i]]);
    c.vectors.col(static_cast<Eigen::Index>(i)) = ritz.col(keep[i]) * scale;
    normalize_l2(*P.grid, c.vectors.col(static_cast<Eigen::Index>(i)));
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "chebyshev: degree %d, block %ld, iterations %d", degree,
                static_cast<long>(block), it + 1);
  c.diagnostics.note(buf);
  return c;
}

}  // namespace detail

/// All discrete eigenpairs of P with eigenvalues in [E - halfwidth, E + halfwidth]
/// (inclusive, with a 1e-12 relative slack at the edges).
inline SpectralCluster solve_window(const DiscreteOperator& P, double E, double halfwidth,
                                    const SolverOptions& opt = {}) {
  if (!(halfwidth > 0.0)) throw DomainError("solve_window needs halfwidth > 0");
  SpectralCluster c = P.grid->dim() == 1 ? detail::solve_window_1d(P, E, halfwidth, opt)
                                         : detail::solve_window_2d(P, E, halfwidth, opt);
  detail::log_weyl_ratio(c, P);
  return c;
}

inline SpectralCluster solve_window(const DiscreteOperator& P, double E) {
  return solve_window(P, E, P.h);
}

// ---------------------------------------------------------------------------
// Analytic clusters of -h^2 Delta + |x|^2

/// Quantum numbers (a, b) of the states; in d = 1 only `a` is used.
struct OscillatorState {
  int a = 0;
  int b = 0;
};

/// States of the isotropic oscillator with eigenvalue in [E - w, E + w] (inclusive),
/// ordered by energy then by a.
inline std::vector<OscillatorState> oscillator_states(int d, double E, double h, double w) {
  if (d != 1 && d != 2) throw DomainError("analytic clusters exist for d = 1, 2");
  if (!(h > 0.0)) throw DomainError("analytic cluster needs h > 0");
  const double slack = 1e-12 * std::max(1.0, std::abs(E));
  std::vector<OscillatorState> out;
  // level l has energy (2l + d) h
  const long l_lo = std::max(0L, static_cast<long>(std::ceil((E - w - slack) / h - d) / 2.0));
  const long l_hi = static_cast<long>(std::floor(((E + w + slack) / h - d) / 2.0));
  for (long l = std::max(0L, l_lo - 1); l <= l_hi + 1; ++l) {
    const double lam = (2.0 * l + d) * h;
    if (lam < E - w - slack || lam > E + w + slack) continue;
    if (l > kMaxHermiteDegree) throw DomainError("level index exceeds the Hermite degree limit");
    if (d == 1)
      out.push_back({static_cast<int>(l), 0});
    else
      for (long a = 0; a <= l; ++a) out.push_back({static_cast<int>(a), static_cast<int>(l - a)});
  }
  return out;
}

inline double oscillator_energy(const OscillatorState& s, int d, double h) {
  return (2.0 * (s.a + (d == 2 ? s.b : 0)) + d) * h;
}

/// Cluster of the isotropic oscillator built from sampled Hermite functions.
inline SpectralCluster analytic_cluster(int d, double E, double h, const GridPtr& grid,
                                        double halfwidth = -1.0) {
  if (grid->dim() != d) throw GridMismatch("analytic_cluster: grid dimension differs from d");
  const double w = halfwidth > 0.0 ? halfwidth : h;
  const auto states = oscillator_states(d, E, h, w);
  if (states.empty()) throw DomainError("analytic_cluster: no oscillator level in the window");
  int nmax = 0;
  for (const auto& s : states) nmax = std::max({nmax, s.a, s.b});

  std::array<Eigen::MatrixXd, 2> tables;
  for (int ax = 0; ax < d; ++ax) {
    std::vector<double> xs(static_cast<std::size_t>(grid->axis(ax).n));
    for (int i = 0; i < grid->axis(ax).n; ++i) xs[i] = grid->axis(ax).coord(i);
    tables[ax] = hermite_table(nmax, h, xs);
  }
  SpectralCluster c;
  c.E = E;
  c.h = h;
  c.halfwidth = w;
  c.grid = grid;
  c.vectors.resize(grid->size(), static_cast<Eigen::Index>(states.size()));
  for (std::size_t j = 0; j < states.size(); ++j) {
    c.eigenvalues.push_back(oscillator_energy(states[j], d, h));
    c.residuals.push_back(0.0);
    for (Eigen::Index k = 0; k < grid->size(); ++k) {
      const auto [i0, i1] = grid->multi_index(k);
      c.vectors(k, static_cast<Eigen::Index>(j)) =
          tables[0](states[j].a, i0) * (d == 2 ? tables[1](states[j].b, i1) : 1.0);
    }
  }
  const double dev = (c.gram() - Eigen::MatrixXd::Identity(c.rank(), c.rank())).cwiseAbs().maxCoeff();
  char buf[120];
  std::snprintf(buf, sizeof buf, "analytic cluster: rank %ld, max Gram deviation %.3g",
                static_cast<long>(c.rank()), dev);
  c.diagnostics.note(buf);
  if (dev > 1e-8) c.diagnostics.warn("analytic cluster not orthonormal on this grid (under-resolved?)");
  return c;
}

/// Oscillator cluster on a 2D tensor grid kept in factored form: state (a, b) is
/// phi_a(x_1) phi_b(x_2), so densities and projector-kernel rows are a single
/// matrix product of the 1D Hermite tables instead of rank x n sampled vectors.
class SeparableCluster2D {
 public:
  SeparableCluster2D(double E, double h, GridPtr grid, double halfwidth = -1.0)
      : E_(E), h_(h), halfwidth_(halfwidth > 0.0 ? halfwidth : h), grid_(std::move(grid)) {
    if (grid_->dim() != 2) throw GridMismatch("SeparableCluster2D needs a 2D grid");
    states_ = oscillator_states(2, E_, h_, halfwidth_);
    if (states_.empty()) throw DomainError("SeparableCluster2D: no oscillator level in the window");
    int nmax = 0;
    for (const auto& s : states_) nmax = std::max({nmax, s.a, s.b});
    for (int ax = 0; ax < 2; ++ax) {
      std::vector<double> xs(static_cast<std::size_t>(grid_->axis(ax).n));
      for (int i = 0; i < grid_->axis(ax).n; ++i) xs[i] = grid_->axis(ax).coord(i);
      tables_[ax] = hermite_table(nmax, h_, xs);
    }
  }

  double E() const { return E_; }
  double h() const { return h_; }
  double halfwidth() const { return halfwidth_; }
  const GridPtr& grid() const { return grid_; }
  Eigen::Index rank() const { return static_cast<Eigen::Index>(states_.size()); }
  const std::vector<OscillatorState>& states() const { return states_; }
  std::vector<double> eigenvalues() const {
    std::vector<double> out;
    for (const auto& s : states_) out.push_back(oscillator_energy(s, 2, h_));
    return out;
  }

  /// sum_s c_s phi_{a_s}(x_1) phi_{b_s}(x_2) evaluated on the whole grid.
  ScalarField combination(std::span<const double> coeff, bool squared) const {
    const auto& tx = tables_[0];
    const auto& ty = tables_[1];
    const Eigen::Index nx = tx.cols(), ny = ty.cols();
    // Group states by a: field = sum_a X_a(x1) Y_a(x2), Y_a = sum_{b} c_{ab} f(phi_b).
    const int na = static_cast<int>(tx.rows());
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(na, nx), B = Eigen::MatrixXd::Zero(na, ny);
    std::vector<char> used(static_cast<std::size_t>(na), 0);
    for (std::size_t s = 0; s < states_.size(); ++s) {
      const int a = states_[s].a, b = states_[s].b;
      if (coeff[s] == 0.0) continue;
      used[a] = 1;
      if (squared)
        B.row(a) += coeff[s] * ty.row(b).cwiseAbs2();
      else
        B.row(a) += coeff[s] * ty.row(b);
    }
    for (int a = 0; a < na; ++a)
      if (used[a]) A.row(a) = squared ? Eigen::RowVectorXd(tx.row(a).cwiseAbs2()) : Eigen::RowVectorXd(tx.row(a));
    Eigen::MatrixXd F(nx, ny);
    F.noalias() = A.transpose() * B;  // F(i, j) at flat index i + nx j
    return {grid_, Eigen::Map<const Eigen::VectorXd>(F.data(), F.size())};
  }

  ScalarField density(std::span<const double> weights) const {
    if (static_cast<Eigen::Index>(weights.size()) != rank())
      throw DomainError("density: one weight per eigenpair required");
    return combination(weights, true);
  }

  Eigen::VectorXd values_at(Eigen::Index k) const {
    const auto [i, j] = grid_->multi_index(k);
    Eigen::VectorXd c(rank());
    for (std::size_t s = 0; s < states_.size(); ++s)
      c[static_cast<Eigen::Index>(s)] = tables_[0](states_[s].a, i) * tables_[1](states_[s].b, j);
    return c;
  }

  ScalarField kernel_row(Eigen::Index k) const {
    const Eigen::VectorXd c = values_at(k);
    return combination(std::span<const double>(c.data(), static_cast<std::size_t>(c.size())), false);
  }

  /// Trapezoid Gram matrix, using the tensor structure of the weights.
  Eigen::MatrixXd gram() const {
    std::array<Eigen::MatrixXd, 2> g;
    for (int ax = 0; ax < 2; ++ax) {
      const Axis& axis = grid_->axis(ax);
      Eigen::VectorXd w = Eigen::VectorXd::Constant(axis.n, axis.spacing());
      w[0] *= 0.5;
      w[axis.n - 1] *= 0.5;
      g[ax] = tables_[ax] * w.asDiagonal() * tables_[ax].transpose();
    }
    const Eigen::Index r = rank();
    Eigen::MatrixXd G(r, r);
    for (Eigen::Index p = 0; p < r; ++p)
      for (Eigen::Index q = 0; q < r; ++q)
        G(p, q) = g[0](states_[p].a, states_[q].a) * g[1](states_[p].b, states_[q].b);
    return G;
  }

 private:
  double E_, h_, halfwidth_;
  GridPtr grid_;
  std::vector<OscillatorState> states_;
  std::array<Eigen::MatrixXd, 2> tables_;
};

// ---------------------------------------------------------------------------
// Serialization

inline void write_eigenvalues_csv(std::ostream& os, const SpectralCluster& c) {
  os << "index,eigenvalue,residual\n";
  char buf[96];
  for (Eigen::Index j = 0; j < c.rank(); ++j) {
    std::snprintf(buf, sizeof buf, "%ld,%.12g,%.12g\n", static_cast<long>(j), c.eigenvalues[j],
                  c.residuals[j]);
    os << buf;
  }
}

/// Binary eigenvector dump: one JSON header line {"rows","cols","h","E","dtype","order"}
/// followed by rows x cols little-endian doubles in column order.
inline void write_eigenvectors_binary(const std::string& path, const SpectralCluster& c) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  char header[256];
  std::snprintf(header, sizeof header,
                "{\"rows\":%ld,\"cols\":%ld,\"h\":%.17g,\"E\":%.17g,\"dtype\":\"float64\",\"order\":\"column\"}\n",
                static_cast<long>(c.vectors.rows()), static_cast<long>(c.vectors.cols()), c.h, c.E);
  os << header;
  os.write(reinterpret_cast<const char*>(c.vectors.data()),
           static_cast<std::streamsize>(sizeof(double) * c.vectors.size()));
}

}  // namespace semiclass
