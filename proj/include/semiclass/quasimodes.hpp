#pragma once

// Saturating families: Gaussian ground state at a nondegenerate minimum,
// Gaussian beams of the 2D oscillator, zonal-type quasimodes u = Pi_h(x_0, .),
// and the flat-space reference projector kernel.

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "semiclass/density.hpp"
#include "semiclass/eigensolve.hpp"
#include "semiclass/error.hpp"
#include "semiclass/grid.hpp"
#include "semiclass/operator.hpp"
#include "semiclass/potential.hpp"
#include "semiclass/specialfn.hpp"

namespace semiclass {

inline constexpr std::array<double, 3> kDefaultQs{2.0, 4.0, kInf};

struct QuasimodeReport {
  ScalarField field;
  double l2 = 0.0;
  double residual = 0.0;  ///< ||(P - E) u||_2
  double energy = 0.0;    ///< the E in the residual
  std::string region;
  std::map<double, double> lq_table;  ///< q -> ||u||_{L^q(region)}
  Eigen::Index x0_index = -1;         ///< grid index of the concentration point, if any
  Point x0 = Point::Zero();
};

inline std::map<double, double> lq_table(const ScalarField& u, std::span<const double> qs,
                                         const Region& region, Diagnostics* diag = nullptr) {
  std::map<double, double> t;
  for (double q : qs) t[q] = lq_norm(u, q, region, diag);
  return t;
}

/// JSON object with the scalar fields of a report (the field itself goes to CSV).
inline void write_report_json(std::ostream& os, const QuasimodeReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "{\"l2\": %.12g, \"residual\": %.12g, \"energy\": %.12g, \"region\": \"%s\", \"lq\": {",
                r.l2, r.residual, r.energy, r.region.c_str());
  os << buf;
  bool first = true;
  for (const auto& [q, v] : r.lq_table) {
    std::snprintf(buf, sizeof buf, "%s\"%s\": %.12g", first ? "" : ", ",
                  std::isinf(q) ? "inf" : std::to_string(q).c_str(), v);
    os << buf;
    first = false;
  }
  os << "}}\n";
}

// ---------------------------------------------------------------------------
// Gaussian ground state

struct GaussianGroundstate {
  Eigen::MatrixXd Omega;  ///< (H/2)^{1/2}
  double lambda = 0.0;    ///< h tr Omega
  double norm_const = 0.0;
};

inline GaussianGroundstate gaussian_parameters(double h, const Eigen::MatrixXd& H) {
  if (!(h > 0.0)) throw DomainError("gaussian ground state needs h > 0");
  if (H.rows() != H.cols()) throw DomainError("Hessian must be square");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.25 * (H + H.transpose()));
  if (es.eigenvalues().minCoeff() <= 0.0) throw DomainError("Hessian is not positive definite");
  GaussianGroundstate g;
  g.Omega = es.operatorSqrt();
  g.lambda = h * g.Omega.trace();
  const int d = static_cast<int>(H.rows());
  g.norm_const = std::pow(std::numbers::pi * h, -0.25 * d) * std::pow(g.Omega.determinant(), 0.25);
  return g;
}

/// ||u_h||_q of the normalized Gaussian, in closed form.
inline double gaussian_lq_closed_form(double h, const Eigen::MatrixXd& H, double q) {
  const auto g = gaussian_parameters(h, H);
  if (std::isinf(q)) return g.norm_const;
  const int d = static_cast<int>(H.rows());
  const double integral = std::pow(2.0 * std::numbers::pi * h / q, 0.5 * d) /
                          std::sqrt(g.Omega.determinant());
  return g.norm_const * std::pow(integral, 1.0 / q);
}

/// Exact ground state of P_0 = -h^2 Delta + (1/2)<x - x0, H (x - x0)> on `grid`, with
/// E = V(x0) + h tr Omega. The residual is taken against `full` (default: the
/// quadratic model) using (P - E) u = (V - V(x0) - V_quad) u, which holds because
/// (P_0 - h tr Omega) u = 0 exactly; it involves no finite-difference error.
inline QuasimodeReport gaussian_groundstate(double h, const Eigen::VectorXd& x0,
                                            const Eigen::MatrixXd& H, const GridPtr& grid,
                                            const PotentialSpec* full = nullptr,
                                            std::span<const double> qs = kDefaultQs,
                                            Diagnostics* diag = nullptr) {
  const int d = grid->dim();
  if (x0.size() != d || H.rows() != d) throw DomainError("gaussian_groundstate: dimension mismatch");
  const auto g = gaussian_parameters(h, H);
  const potential::Quadratic model{H, x0};
  const PotentialSpec model_spec = model;
  const PotentialSpec& V = full ? *full : model_spec;
  validate(V, d);

  Point p0 = Point::Zero();
  for (int i = 0; i < d; ++i) p0[i] = x0[i];
  const double v0 = evaluate(V, p0, d);

  QuasimodeReport r;
  r.energy = v0 + g.lambda;
  r.field = ScalarField::sample(grid, [&](const Point& x) {
    Eigen::VectorXd y(d);
    for (int i = 0; i < d; ++i) y[i] = x[i] - x0[i];
    return g.norm_const * std::exp(-0.5 * y.dot(g.Omega * y) / h);
  });
  check_boundary_decay(r.field, 1e-10, diag);
  r.l2 = lq_norm(r.field, 2.0);
  const auto remainder = ScalarField::sample(grid, [&](const Point& x) {
    Eigen::VectorXd y(d);
    for (int i = 0; i < d; ++i) y[i] = x[i] - x0[i];
    const double u = g.norm_const * std::exp(-0.5 * y.dot(g.Omega * y) / h);
    return (evaluate(V, x, d) - v0 - 0.5 * y.dot(H * y)) * u;
  });
  r.residual = lq_norm(remainder, 2.0);
  r.region = "R^d";
  r.lq_table = lq_table(r.field, qs, Region::full(grid));
  r.x0 = p0;
  return r;
}

/// ||(P_disc - E) u||_2 for a report's field, with the finite-difference operator of V.
inline double discrete_residual(const QuasimodeReport& r, const PotentialSpec& V, double h) {
  const auto P = discretize(V, r.field.grid, h);
  ScalarField res = matvec(P, r.field);
  res.values -= r.energy * r.field.values;
  return lq_norm(res, 2.0);
}

// ---------------------------------------------------------------------------
// Gaussian beams of -h^2 Delta + |x|^2 in d = 2

struct BeamOptions {
  double E_exc = 1.0;
  double eps = 0.25;  ///< bulk region {|x|^2 < E_h - eps}
};

inline double beam_h(int n, double E_exc) { return E_exc / (2.0 * n + 1.0); }

/// u_n(x) = phi_n(x_1) (pi h)^{-1/4} e^{-x_2^2/(2h)}, h = E_exc/(2n+1), an exact
/// eigenfunction with eigenvalue E_exc + h. Sampled on `grid2d`; the residual is
/// that of the finite-difference oscillator.
inline QuasimodeReport gaussian_beam(int n, const GridPtr& grid2d, const BeamOptions& opt = {},
                                     std::span<const double> qs = kDefaultQs,
                                     Diagnostics* diag = nullptr) {
  if (grid2d->dim() != 2) throw DomainError("gaussian_beam lives on 2D grids");
  const double h = beam_h(n, opt.E_exc);
  const auto& ax0 = grid2d->axis(0);
  std::vector<double> xs(static_cast<std::size_t>(ax0.n));
  for (int i = 0; i < ax0.n; ++i) xs[i] = ax0.coord(i);
  const Eigen::MatrixXd t = hermite_table(n, h, xs);
  const double c = std::pow(std::numbers::pi * h, -0.25);

  QuasimodeReport r;
  r.energy = opt.E_exc + h;
  Eigen::VectorXd v(grid2d->size());
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    const auto [i, j] = grid2d->multi_index(k);
    const double x2 = grid2d->axis(1).coord(j);
    v[k] = t(n, i) * c * std::exp(-0.5 * x2 * x2 / h);
  }
  r.field = ScalarField(grid2d, std::move(v));
  r.l2 = lq_norm(r.field, 2.0);
  const auto P = discretize(potential::Harmonic{}, grid2d, h, diag);
  ScalarField res = matvec(P, r.field);
  res.values -= r.energy * r.field.values;
  r.residual = lq_norm(res, 2.0);
  const auto bulk = region_by_potential(P.V, r.energy, opt.eps, RegionKind::Bulk);
  r.region = bulk.label;
  r.lq_table = lq_table(r.field, qs, bulk, diag);
  return r;
}

/// ||u_n||_{L^q(bulk)} from the product structure: the x_2 integral over the chord
/// |x_2| < sqrt(R^2 - x_1^2) is an erf, the x_1 integral a trapezoid sum with dx <= h/8.
inline double gaussian_beam_bulk_lq(int n, double q, const BeamOptions& opt = {}) {
  const double h = beam_h(n, opt.E_exc);
  const double R2 = opt.E_exc + h - opt.eps;
  if (!(R2 > 0.0)) throw DomainError("gaussian_beam_bulk_lq: empty bulk region");
  const double R = std::sqrt(R2);
  const double c = std::pow(std::numbers::pi * h, -0.25);
  const int m = std::max(1025, static_cast<int>(std::ceil(2.0 * R / (h / 8.0))) | 1);
  std::vector<double> xs(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) xs[i] = -R + 2.0 * R * i / (m - 1);
  const Eigen::MatrixXd t = hermite_table(n, h, xs);
  const double dx = 2.0 * R / (m - 1);
  if (std::isinf(q)) {
    double best = 0.0;
    for (int i = 1; i + 1 < m; ++i) best = std::max(best, std::abs(t(n, i)));
    return best * c;
  }
  std::vector<double> terms(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    const double chord = std::sqrt(std::max(0.0, R2 - xs[i] * xs[i]));
    const double inner = std::pow(c, q) * std::sqrt(2.0 * std::numbers::pi * h / q) *
                         std::erf(chord * std::sqrt(q / (2.0 * h)));
    const double w = (i == 0 || i == m - 1) ? 0.5 * dx : dx;
    terms[i] = w * std::pow(std::abs(t(n, i)), q) * inner;
  }
  return std::pow(pairwise_sum(terms), 1.0 / q);
}

// ---------------------------------------------------------------------------
// Zonal-type quasimode u = Pi_h(x_0, .)

/// x_0 maximizes rho_{Pi_h} over `region` (ties: lowest grid index); u(y) = sum_j
/// u_j(x_0) u_j(y). The residual uses the eigenvalues: ||(P-E)u||^2 = sum_j u_j(x_0)^2 (mu_j - E)^2.
template <class Cluster>
QuasimodeReport zonal_quasimode(const Cluster& cluster, const Region& region,
                                std::span<const double> qs = kDefaultQs,
                                Diagnostics* diag = nullptr) {
  if (cluster.rank() == 0) throw DomainError("zonal_quasimode: empty cluster");
  if (region.empty()) throw DomainError("zonal_quasimode: empty region");
  const std::vector<double> ones(static_cast<std::size_t>(cluster.rank()), 1.0);
  const ScalarField rho = cluster.density(ones);
  require_same_grid(rho.grid, region.grid, "zonal_quasimode");
  Eigen::Index best = -1;
  for (Eigen::Index k = 0; k < rho.values.size(); ++k)
    if (region.mask[k] && (best < 0 || rho.values[k] > rho.values[best])) best = k;

  QuasimodeReport r;
  r.x0_index = best;
  r.x0 = rho.grid->point(best);
  r.field = cluster.kernel_row(best);
  r.l2 = lq_norm(r.field, 2.0);
  const auto& mu = cluster_eigenvalues(cluster);
  double E = 0.0;
  if constexpr (requires { cluster.E(); })
    E = cluster.E();
  else
    E = cluster.E;
  r.energy = E;
  const Eigen::VectorXd ux = cluster.values_at(best);
  double s = 0.0;
  for (Eigen::Index j = 0; j < ux.size(); ++j) s += ux[j] * ux[j] * (mu[j] - E) * (mu[j] - E);
  r.residual = std::sqrt(s);
  r.region = region.label;
  r.lq_table = lq_table(r.field, qs, region, diag);
  return r;
}

// ---------------------------------------------------------------------------
// Flat reference kernel

/// (2 pi h)^{-d} int_{E - Vx0 - h <= |xi|^2 <= E - Vx0 + h} e^{i <xi, x - y>/h} dxi,
/// reduced radially: a sine difference in d = 1 and a J_1 difference in d = 2.
inline double flat_projector_kernel(double E, double Vx0, double h, const Point& x, const Point& y,
                                    int d) {
  if (d != 1 && d != 2) throw DomainError("flat_projector_kernel supports d = 1, 2");
  if (!(h > 0.0)) throw DomainError("flat_projector_kernel needs h > 0");
  if (!(E - Vx0 > h)) throw ConstraintError("flat_projector_kernel: empty annulus (need E - V(x0) > h)");
  const double rp = std::sqrt(E - Vx0 + h), rm = std::sqrt(E - Vx0 - h);
  const double pi = std::numbers::pi;
  if (d == 1) {
    const double s = (x[0] - y[0]) / h;
    if (s == 0.0) return (rp - rm) / (pi * h);
    return (std::sin(rp * s) - std::sin(rm * s)) / (s * pi * h);
  }
  const double s = std::hypot(x[0] - y[0], x[1] - y[1]) / h;
  const double pre = 1.0 / std::pow(2.0 * pi * h, 2);
  if (s == 0.0) return pre * pi * (rp * rp - rm * rm);
  const auto F = [s](double r) { return r * std::cyl_bessel_j(1.0, r * s) / s; };
  return pre * 2.0 * pi * (F(rp) - F(rm));
}

}  // namespace semiclass
