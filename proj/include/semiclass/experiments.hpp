#pragma once

// Named experiments: each runs an h-sweep, produces per-h norm rows, fits
// exponents and returns pass/fail checks. Shared by the CLI and the acceptance suite.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "semiclass/density.hpp"
#include "semiclass/eigensolve.hpp"
#include "semiclass/exponents.hpp"
#include "semiclass/grid.hpp"
#include "semiclass/operator.hpp"
#include "semiclass/potential.hpp"
#include "semiclass/quasimodes.hpp"
#include "semiclass/scaling.hpp"
#include "semiclass/specialfn.hpp"
#include "semiclass/weyl.hpp"

namespace semiclass {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct HSweep {
  double h_max = 1e-2;
  double h_min = 1e-3;
  int count = 4;

  /// Geometric sweep, ascending in h.
  std::vector<double> values() const {
    std::vector<double> hs(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
      hs[i] = h_min * std::pow(h_max / h_min, count == 1 ? 0.0 : double(i) / (count - 1));
    return hs;
  }
};

/// dx <= min(dx_over_h h, dx_over_sqrt_h sqrt(h)), capped in points per axis.
struct GridPolicy {
  double dx_over_h = 0.25;
  double dx_over_sqrt_h = 0.125;
  int max_points_1d = 1 << 15;
  int max_points_2d_axis = 640;
};

struct ExperimentConfig {
  std::string experiment;
  PotentialSpec potential = potential::Harmonic{};
  int d = 1;
  double E = 1.0;
  double eps = 0.25;
  HSweep h_sweep;
  std::vector<int> levels;  ///< quantum numbers n (1D) or level indices k (2D), where used
  std::vector<double> q{2.0, 4.0, kInf};
  GridPolicy grid;
  std::string out = "out";
  std::uint64_t seed = 1;
};

struct ResultRow {
  double h = kNaN;
  double q = kNaN;
  std::string region;
  double norm = kNaN;
  double schatten = kNaN;
  double predicted_s = kNaN;
  double predicted_t = kNaN;
};

struct Check {
  std::string label;
  bool pass = false;
  double value = kNaN;
  double expected = kNaN;
  double tolerance = kNaN;
  double margin = kNaN;  ///< <= 0 passes
  std::string detail;
  bool mandatory = true;
};

struct ExperimentResult {
  std::string name;
  std::vector<ResultRow> rows;
  std::vector<Check> checks;
  Diagnostics diagnostics;

  bool pass() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const Check& c) { return c.pass || !c.mandatory; });
  }
};

inline Check to_check(const Verdict& v, const ScalingFit& fit, bool mandatory = true) {
  Check c;
  c.label = v.label;
  c.pass = v.pass();
  c.value = v.s_hat;
  c.expected = v.s_pred;
  c.tolerance = v.tol_s;
  c.margin = std::max(v.margin_s, v.check_t ? v.margin_t : -kInf);
  char buf[200];
  std::snprintf(buf, sizeof buf, "%s %s fit, t_hat=%.4g%s t_pred=%.4g, n=%d, max_rel_res=%.3g",
                v.mode == CompareMode::TwoSided ? "two-sided" : "one-sided",
                std::string(to_string(fit.mode)).c_str(), v.t_hat, fit.t_frozen ? " (frozen)" : "",
                v.t_pred, fit.n_points, fit.max_rel_residual);
  c.detail = buf;
  c.mandatory = mandatory;
  return c;
}

inline Check bool_check(std::string label, bool pass, double value, double expected,
                        double tolerance, std::string detail = {}) {
  Check c;
  c.label = std::move(label);
  c.pass = pass;
  c.value = value;
  c.expected = expected;
  c.tolerance = tolerance;
  c.margin = std::isnan(expected) || std::isnan(tolerance) ? (pass ? -1.0 : 1.0)
                                                           : std::abs(value - expected) - tolerance;
  c.detail = std::move(detail);
  return c;
}

namespace experiments {

// ---------------------------------------------------------------------------
// Shared helpers

inline std::string q_label(double q) {
  if (std::isinf(q)) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", q);
  return buf;
}

/// Fits `samples`, compares with `pred` and records the check. The fit mode is
/// PowerAndLog when `free_t`, PowerOnly with t frozen at pred.t otherwise.
inline ScalingFit fit_check(ExperimentResult& res, const std::string& label,
                            const std::vector<Sample>& samples, const ExponentTriple& pred,
                            double tol_s, double tol_t, CompareMode mode, bool free_t,
                            bool mandatory = true) {
  ScalingFit fit = free_t ? fit_exponent(samples, FitMode::PowerAndLog, &res.diagnostics)
                          : fit_exponent_frozen_t(samples, pred.t, &res.diagnostics);
  res.checks.push_back(to_check(compare(fit, pred, tol_s, tol_t, mode, label), fit, mandatory));
  return fit;
}

/// Smallest X >= sqrt(E) with (1/h) int_{sqrt E}^{X} sqrt(t^2 - E) dt >= margin:
/// beyond X the oscillator states of energy <= E are below e^{-margin}.
inline double turning_extent(double E, double h, double margin = 35.0) {
  const double r = std::sqrt(E);
  const auto F = [](double x) {
    const double s = std::sqrt(x * x - 1.0);
    return 0.5 * (x * s - std::log(x + s));
  };
  double lo = 1.0, hi = 2.0;
  while (E * F(hi) / h < margin) hi *= 2.0;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (E * F(mid) / h < margin ? lo : hi) = mid;
  }
  return r * hi;
}

/// Symmetric 1D grid on [-X, X] with spacing <= dx and an odd point count (0 on the grid).
inline int odd_point_count(double X, double dx) {
  int intervals = static_cast<int>(std::ceil(2.0 * X / dx));
  intervals += intervals % 2;
  return std::max(intervals + 1, 9);
}

inline GridPtr symmetric_line(double X, double dx) {
  return make_grid(Grid::line(-X, X, odd_point_count(X, dx)));
}

inline GridPtr symmetric_square(double X, double dx) {
  return make_grid(Grid::square(-X, X, odd_point_count(X, dx)));
}

inline double resolution_dx(double h, const GridPolicy& g) {
  return std::min(g.dx_over_h * h, g.dx_over_sqrt_h * std::sqrt(h));
}

/// Grid on [-X, X] obeying the policy; the cap shrinks resolution and is recorded.
inline GridPtr policy_line(double X, double h, const GridPolicy& g, Diagnostics* diag) {
  double dx = resolution_dx(h, g);
  if (2.0 * X / dx + 1.0 > g.max_points_1d) {
    dx = 2.0 * X / (g.max_points_1d - 1);
    warn(diag, "grid cap reached at h = " + std::to_string(h));
  }
  return symmetric_line(X, dx);
}

inline ExponentOptions ext1d() {
  ExponentOptions o;
  o.one_dimensional_extension = true;
  return o;
}

inline std::vector<int> levels_or(const ExperimentConfig& c, std::vector<int> fallback) {
  return c.levels.empty() ? fallback : c.levels;
}

// ---------------------------------------------------------------------------
// exponent-tables

/// Dense grid of q values: uniform in 1/q on [0, 1/2] plus every breakpoint.
inline std::vector<double> dense_q_grid(int d, int points = 200) {
  std::vector<double> qs;
  for (int i = 0; i < points; ++i) {
    const double iq = 0.5 * i / (points - 1);
    qs.push_back(iq == 0.0 ? kInf : 1.0 / iq);
  }
  for (Regime r : kAllRegimes)
    for (double b : breakpoints(r, d, ext1d())) qs.push_back(b);
  std::sort(qs.begin(), qs.end());
  return qs;
}

/// |f(1/q_b - delta) - f(1/q_b + delta)| over all breakpoints, for s and alpha.
inline double continuity_gap(int d) {
  constexpr double delta = 1e-15;
  double worst = 0.0;
  const auto opt = ext1d();
  for (Regime r : kAllRegimes) {
    for (double qb : breakpoints(r, d, opt)) {
      const double iq = 1.0 / qb;
      const auto lft = exponent(r, 1.0 / (iq + delta), d, opt);
      const auto rgt = exponent(r, 1.0 / (iq - delta), d, opt);
      const auto mid = exponent(r, qb, d, opt);
      worst = std::max({worst, std::abs(lft.s - rgt.s), std::abs(lft.s - mid.s),
                        std::abs(lft.alpha - rgt.alpha), std::abs(lft.alpha - mid.alpha)});
    }
  }
  return worst;
}

struct OrderingReport {
  bool s_chain = true;
  bool alpha_chain = true;
  bool equality_sets = true;
  std::string first_failure;
};

inline OrderingReport check_orderings(int d) {
  constexpr double tol = 1e-12;
  OrderingReport rep;
  const auto opt = ext1d();
  const auto fail = [&](bool& flag, const std::string& what, double q) {
    if (flag && rep.first_failure.empty())
      rep.first_failure = what + " at d=" + std::to_string(d) + ", q=" + q_label(q);
    flag = false;
  };
  const double q1 = d >= 2 ? 2.0 * (d + 1) / (d - 1) : kInf;
  const double q2 = d >= 3 ? 2.0 * d / (d - 2) : kInf;
  const double q3 = 2.0 * (d + 3) / (d + 1);
  const auto eq = [](double a, double b) { return (std::isinf(a) && std::isinf(b)) || std::abs(a - b) <= tol; };
  for (double q : dense_q_grid(d)) {
    const auto el = exponent(Regime::Elliptic, q, d, opt);
    const auto so = exponent(Regime::Sogge, q, d, opt);
    const auto tp = exponent(Regime::TurningPoint, q, d, opt);
    const auto ge = exponent(Regime::General, q, d, opt);
    const auto sb = exponent(Regime::Sobolev, q, d, opt);
    if (!(el.s < so.s && so.s <= tp.s + tol && tp.s <= ge.s + tol && ge.s <= sb.s + tol))
      fail(rep.s_chain, "s chain", q);
    if (d >= 2 && !(ge.alpha <= so.alpha * (1 + tol) && eq(so.alpha, tp.alpha) &&
                    so.alpha <= el.alpha * (1 + tol)))
      fail(rep.alpha_chain, "alpha chain", q);
    if (d >= 3) {
      const bool in_tp = q <= q3 + tol || q >= q2 - tol;
      const bool in_gene = std::abs(q - 2.0) <= tol || q >= q2 - tol;
      const bool in_inner = q <= q1 + tol || std::isinf(q);
      const bool in_outer = std::abs(q - 2.0) <= tol || std::isinf(q);
      if (eq(so.s, tp.s) != in_tp) fail(rep.equality_sets, "s_Sogge = s_TP set", q);
      if (eq(so.s, ge.s) != in_gene) fail(rep.equality_sets, "s_Sogge = s_gene set", q);
      if (eq(ge.alpha, so.alpha) != in_inner) fail(rep.equality_sets, "alpha_gene = alpha_Sogge set", q);
      if (eq(so.alpha, el.alpha) != in_outer) fail(rep.equality_sets, "alpha_Sogge = alpha_ellip set", q);
    }
  }
  return rep;
}

inline bool check_t_support(int d, std::string* why) {
  const double q1 = 2.0 * (d + 1) / (d - 1), q2 = 2.0 * d / (d - 2), q3 = 2.0 * (d + 3) / (d + 1);
  for (double q : dense_q_grid(d)) {
    const bool gene_nz = exponent(Regime::General, q, d).t != 0.0;
    const bool tp_nz = exponent(Regime::TurningPoint, q, d).t != 0.0;
    const bool sogge_nz = exponent(Regime::Sogge, q, d).t != 0.0;
    const bool want_gene = q >= q1 && q < q2;
    const bool want_tp = q == q3;
    if (gene_nz != want_gene || tp_nz != want_tp || sogge_nz) {
      if (why) *why = "t support violated at d=" + std::to_string(d) + ", q=" + q_label(q);
      return false;
    }
  }
  return true;
}

inline ExperimentResult exponent_tables(const ExperimentConfig& cfg) {
  ExperimentResult res;
  res.name = "exponent-tables";
  const auto opt = ext1d();
  for (int d = 1; d <= 6; ++d)
    for (Regime r : kAllRegimes)
      for (double q : cfg.q) {
        const auto e = exponent(r, q, d, opt);
        res.rows.push_back({kNaN, q, std::string(to_string(r)) + "/d=" + std::to_string(d), e.s,
                            e.alpha, e.s, e.t});
      }

  double gap = 0.0;
  for (int d = 1; d <= 6; ++d) gap = std::max(gap, continuity_gap(d));
  res.checks.push_back(bool_check("continuity of s and alpha at every breakpoint, d=1..6",
                                  gap <= 1e-12, gap, 0.0, 1e-12));

  OrderingReport all;
  for (int d = 1; d <= 6; ++d) {
    const auto r = check_orderings(d);
    all.s_chain = all.s_chain && r.s_chain;
    all.alpha_chain = all.alpha_chain && r.alpha_chain;
    all.equality_sets = all.equality_sets && r.equality_sets;
    if (all.first_failure.empty()) all.first_failure = r.first_failure;
  }
  res.checks.push_back(bool_check("s ordering ellip < Sogge <= TP <= gene <= Sobolev, d=1..6",
                                  all.s_chain, kNaN, kNaN, kNaN, all.first_failure));
  res.checks.push_back(bool_check("alpha ordering gene <= Sogge = TP <= ellip, d=2..6",
                                  all.alpha_chain, kNaN, kNaN, kNaN, all.first_failure));
  res.checks.push_back(bool_check("equality sets of both chains, d=3..6", all.equality_sets, kNaN,
                                  kNaN, kNaN, all.first_failure));
  bool support = true;
  std::string why;
  for (int d = 3; d <= 6 && support; ++d) support = check_t_support(d, &why);
  res.checks.push_back(bool_check("t support sets, d=3..6", support, kNaN, kNaN, kNaN, why));
  return res;
}

// ---------------------------------------------------------------------------
// hermite-lq

inline ExperimentResult hermite_lq(const ExperimentConfig& cfg) {
  ExperimentResult res;
  res.name = "hermite-lq";
  const auto ns = levels_or(cfg, {50, 100, 200, 400, 800, 1600, 3200});
  std::map<double, std::vector<Sample>> samples;
  for (int n : ns) {
    const double h = cfg.E / (2.0 * n + 1.0);
    const auto grid = symmetric_line(turning_extent(cfg.E, h), cfg.grid.dx_over_h * h);
    const auto phi = hermite(n, h, grid);
    for (double q : cfg.q) {
      const double v = lq_norm(phi.field, q);
      const auto e = exponent(Regime::TurningPoint, q, 1, ext1d());
      samples[q].push_back({h, v});
      res.rows.push_back({h, q, "R", v, 1.0, e.s, e.t});
    }
  }
  std::stable_sort(res.rows.begin(), res.rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return a.h < b.h || (a.h == b.h && a.q < b.q);
  });
  for (const auto& [q, s] : samples) {
    auto e = exponent(Regime::TurningPoint, q, 1, ext1d());
    e.t = 0.0;  // single eigenfunctions carry no log factor away from the q = 4 boundary
    if (std::abs(q - 4.0) < 1e-12 && s.size() >= 6) {
      // Boundary case: the log power is left free and not asserted.
      fit_check(res, "||phi_n||_4 exponent (free log term)", s, e, 0.06, kInf, CompareMode::TwoSided, true);
      fit_check(res, "||phi_n||_4 exponent, t frozen at 0 (informational)", s, e, 0.06, 0.06,
                CompareMode::TwoSided, false, false);
    } else {
      const double tol = std::abs(q - 4.0) < 1e-12 ? 0.06 : 0.03;
      fit_check(res, "||phi_n||_" + q_label(q) + " exponent", s, e, tol, tol, CompareMode::TwoSided, false);
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// airy-profile

inline ExperimentResult airy_profile_experiment(const ExperimentConfig& cfg) {
  ExperimentResult res;
  res.name = "airy-profile";
  {
    const int n = 400;
    const double h = 1.0 / (2.0 * n + 1.0);
    const auto grid = symmetric_line(turning_extent(1.0, h), cfg.grid.dx_over_h * h);
    const auto phi = hermite(n, h, grid);
    const auto prof = airy_profile(h, grid);
    double diff = 0.0, ref = 0.0;
    for (Eigen::Index k = 0; k < grid->size(); ++k) {
      const double x = grid->point(k)[0];
      if (x < 0.5 || x > 1.5) continue;
      diff = std::max(diff, std::abs(prof.values[k] - phi.field.values[k]));
      ref = std::max(ref, std::abs(phi.field.values[k]));
    }
    res.checks.push_back(bool_check("airy_profile vs hermite(400) on [0.5, 1.5], sup-relative",
                                    diff / ref <= 0.05, diff / ref, 0.0, 0.05));
  }
  std::vector<Sample> peak, width, hpeak;
  for (int n : levels_or(cfg, {50, 100, 200, 400, 800, 1600, 3200})) {
    const double h = 1.0 / (2.0 * n + 1.0);
    const auto grid = symmetric_line(turning_extent(1.0, h), cfg.grid.dx_over_h * h);
    const auto prof = airy_profile(h, grid);
    Eigen::Index arg = 0;
    prof.values.cwiseAbs().maxCoeff(&arg);
    const double p = std::abs(prof.values[arg]);
    peak.push_back({h, p});
    width.push_back({h, 1.0 - std::abs(grid->point(arg)[0])});
    hpeak.push_back({h, lq_norm(hermite(n, h, grid).field, kInf)});
    res.rows.push_back({h, kInf, "R", p, 1.0, 1.0 / 6.0, 0.0});
  }
  fit_check(res, "airy_profile peak height exponent", peak, {1.0 / 6.0, 0.0, 1.0}, 0.02, 0.02,
            CompareMode::TwoSided, false);
  fit_check(res, "distance of the peak to the turning point (informational)", width,
            {-2.0 / 3.0, 0.0, 1.0}, 0.05, 0.05, CompareMode::TwoSided, false, false);
  fit_check(res, "hermite peak height exponent (informational)", hpeak, {1.0 / 6.0, 0.0, 1.0}, 0.02,
            0.02, CompareMode::TwoSided, false, false);
  return res;
}

// ---------------------------------------------------------------------------
// gaussian-groundstate

/// Lowest local minimum of a 1D potential (grid scan + golden-section refinement)
/// and its second derivative.
inline std::pair<double, double> minimum_1d(const PotentialSpec& V) {
  const double L = confining_box(V, 1, 1.0);
  const auto v = [&](double x) { return evaluate(V, Point(x, 0.0), 1); };
  const int m = 4001;
  int best = 0;
  for (int i = 1; i < m; ++i)
    if (v(-L + 2.0 * L * i / (m - 1)) < v(-L + 2.0 * L * best / (m - 1))) best = i;
  const double step = 2.0 * L / (m - 1);
  double a = -L + step * (best - 1), b = -L + step * (best + 1);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 200; ++it) {
    const double c = b - g * (b - a), d = a + g * (b - a);
    (v(c) < v(d) ? b : a) = (v(c) < v(d) ? d : c);
  }
  const double x0 = 0.5 * (a + b);
  const double e = 1e-4;
  const double H = (v(x0 + e) - 2.0 * v(x0) + v(x0 - e)) / (e * e);
  return {x0, H};
}

inline ExperimentResult gaussian_groundstate_experiment(const ExperimentConfig& cfg) {
  ExperimentResult res;
  res.name = "gaussian-groundstate";
  if (cfg.d != 1) throw DomainError("gaussian-groundstate runs in d = 1");
  const auto hs = cfg.h_sweep.values();
  std::map<double, std::vector<Sample>> lq;
  std::vector<Sample> resid;
  double worst_oracle = 0.0, worst_l2 = 0.0;

  const Eigen::MatrixXd H2 = Eigen::MatrixXd::Constant(1, 1, 2.0);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);
  auto [xm, Hm] = minimum_1d(cfg.potential);
  // Exact minima of the built-ins avoid finite-difference noise in the Hessian.
  if (std::holds_alternative<potential::DoubleWell>(cfg.potential)) {
    xm = -1.0;
    Hm = 8.0;
  } else if (std::holds_alternative<potential::Harmonic>(cfg.potential)) {
    xm = 0.0;
    Hm = 2.0;
  }
  const Eigen::MatrixXd Hv = Eigen::MatrixXd::Constant(1, 1, Hm);
  const Eigen::VectorXd xv = Eigen::VectorXd::Constant(1, xm);

  for (double h : hs) {
    const double X = 12.0 * std::sqrt(h);
    const auto grid = symmetric_line(X, std::sqrt(h) / 40.0);
    const auto r = gaussian_groundstate(h, zero, H2, grid, nullptr, cfg.q, &res.diagnostics);
    worst_l2 = std::max(worst_l2, std::abs(r.l2 - 1.0));
    for (double q : cfg.q) {
      const double v = r.lq_table.at(q);
      const double oracle = gaussian_lq_closed_form(h, H2, q);
      worst_oracle = std::max(worst_oracle, std::abs(v - oracle) / oracle);
      const auto e = exponent(Regime::General, q, 1);
      lq[q].push_back({h, v});
      res.rows.push_back({h, q, "R", v, 1.0, e.s, e.t});
    }
    const double Y = 12.0 * std::sqrt(h / std::sqrt(Hm / 2.0));
    const auto g2 = make_grid(Grid::line(xm - Y, xm + Y, odd_point_count(Y, std::sqrt(h) / 40.0)));
    const auto rr = gaussian_groundstate(h, xv, Hv, g2, &cfg.potential, cfg.q, &res.diagnostics);
    resid.push_back({h, rr.residual});
    res.rows.push_back({h, 2.0, "residual", rr.residual, 1.0, -1.0, 0.0});
  }
  res.checks.push_back(bool_check("||u_h||_2 = 1", worst_l2 <= 1e-8, worst_l2, 0.0, 1e-8));
  res.checks.push_back(bool_check("closed-form Gaussian L^q vs quadrature, relative", worst_oracle <= 1e-6,
                                  worst_oracle, 0.0, 1e-6));
  for (const auto& [q, s] : lq)
    fit_check(res, "||u_h||_" + q_label(q) + " exponent", s, exponent(Regime::General, q, 1), 0.03,
              0.03, CompareMode::TwoSided, false);
  const auto fit = fit_exponent(resid, FitMode::PowerOnly, &res.diagnostics);
  res.checks.push_back(bool_check("residual ||(P-E)u_h||_2 decays at least like h", -fit.s_hat >= 1.0,
                                  -fit.s_hat, kNaN, kNaN,
                                  "measured power " + std::to_string(-fit.s_hat) + " (O(h^{3/2}) expected)"));
  return res;
}

// ---------------------------------------------------------------------------
// gaussian-beam

inline ExperimentResult gaussian_beam_experiment(const ExperimentConfig& cfg) {
  ExperimentResult res;
  res.name = "gaussian-beam";
  BeamOptions opt;
  opt.E_exc = cfg.E;
  opt.eps = cfg.eps;
  std::map<double, std::vector<Sample>> s;
  for (int n : levels_or(cfg, {50, 100, 200, 400, 800, 1600})) {
    const double h = beam_h(n, cfg.E);
    for (double q : cfg.q) {
      const double v = gaussian_beam_bulk_lq(n, q, opt);
      const auto e = exponent(Regime::Sogge, q, 2);
      s[q].push_back({h, v});
      res.rows.push_back({h, q, "bulk", v, 1.0, e.s, e.t});
    }
  }
  std::stable_sort(res.rows.begin(), res.rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return a.h < b.h || (a.h == b.h && a.q < b.q);
  });
  for (const auto& [q, v] : s)
    fit_check(res, "||u_n||_{L^" + q_label(q) + "(bulk)} exponent", v, exponent(Regime::Sogge, q, 2),
              0.03, 0.03, CompareMode::TwoSided, false);
  return res;
}

// ---------------------------------------------------------------------------
// zonal and bulk-delocalization (2D oscillator levels, separable form)

struct LevelData {
  double h = 0.0;
  std::shared_ptr<const SeparableCluster2D> cluster;
  Region bulk;
};

/// Level k of the 2D oscillator at h = E / (2(k + 1)). Fields are tensor products
/// evaluated by matrix products, so the per-axis cap of the grid policy does not apply.
inline LevelData oscillator_level(int k, const ExperimentConfig& cfg) {
  LevelData L;
  L.h = cfg.E / (2.0 * (k + 1));
  const double X = turning_extent(cfg.E, L.h);
  const auto grid = symmetric_square(X, cfg.grid.dx_over_h * L.h);
  L.cluster = std::make_shared<const SeparableCluster2D>(cfg.E, L.h, grid);
  L.bulk = region_by_potential(sample_potential(potential::Harmonic{}, grid), cfg.E, cfg.eps,
                               RegionKind::Bulk);
  return L;
}

inline ExperimentResult zonal_experiment(const ExperimentConfig& cfg) {
  ExperimentResult res;
  res.name = "zonal";
  std::vector<Sample> l2, ratio;
  double worst_identity = 0.0;
  for (int k : levels_or(cfg, {8, 16, 32, 64, 128, 256})) {
    const auto L = oscillator_level(k, cfg);
    const auto r = zonal_quasimode(*L.cluster, L.bulk, cfg.q, &res.diagnostics);
    const std::vector<double> ones(static_cast<std::size_t>(L.cluster->rank()), 1.0);
    const double rho0 = L.cluster->values_at(r.x0_index).squaredNorm();
    worst_identity = std::max(worst_identity, std::abs(r.l2 * r.l2 - rho0) / rho0);
    const double sup = lq_norm(r.field, kInf);
    l2.push_back({L.h, r.l2});
    ratio.push_back({L.h, sup / r.l2});
    const double rank = static_cast<double>(L.cluster->rank());
    res.rows.push_back({L.h, 2.0, "R^d", r.l2, rank, 0.5, 0.0});
    res.rows.push_back({L.h, kInf, "peak/l2", sup / r.l2, rank, 0.5, 0.0});
    for (const auto& [q, v] : r.lq_table) res.rows.push_back({L.h, q, "bulk", v, rank, kNaN, kNaN});
  }
  std::stable_sort(res.rows.begin(), res.rows.end(), [](const ResultRow& a, const ResultRow& b) { return a.h < b.h; });
  res.checks.push_back(bool_check("||u||_2^2 = rho_Pi(x0)", worst_identity <= 1e-8, worst_identity, 0.0, 1e-8));
  fit_check(res, "||u||_2 exponent", l2, {0.5, 0.0, 1.0}, 0.05, 0.05, CompareMode::TwoSided, false);
  fit_check(res, "||u||_inf / ||u||_2 exponent", ratio, exponent(Regime::Sogge, kInf, 2), 0.05, 0.05,
            CompareMode::TwoSided, false);
  return res;
}

inline ExperimentResult bulk_delocalization(const ExperimentConfig& cfg) {
  ExperimentResult res;
  res.name = "bulk-delocalization";
  std::map<double, std::vector<Sample>> norm, bound;
  for (int k : levels_or(cfg, {8, 16, 32, 64, 128, 256})) {
    const auto L = oscillator_level(k, cfg);
    const auto Pi = DensityMatrix<SeparableCluster2D>::projector(L.cluster);
    const ScalarField rho = density(Pi);
    for (double q : cfg.q) {
      const auto e = exponent(Regime::Sogge, q, 2);
      const double v = lq_norm(rho, q / 2.0, L.bulk, &res.diagnostics);
      const double sch = weighted_schatten_norm(Pi, cfg.E, L.h, e.alpha);
      norm[q].push_back({L.h, v});
      bound[q].push_back({L.h, std::pow(L.h, 2.0 * e.s) * v / sch});
      res.rows.push_back({L.h, q, "bulk", v, sch, 1.0, 0.0});
    }
  }
  std::stable_sort(res.rows.begin(), res.rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return a.h < b.h || (a.h == b.h && a.q < b.q);
  });
  for (const auto& [q, s] : norm)
    fit_check(res, "||rho_Pi||_{L^" + q_label(q / 2.0) + "(bulk)} exponent (q=" + q_label(q) + ")", s,
              {1.0, 0.0, 1.0}, 0.1, 0.1, CompareMode::TwoSided, false);
  for (const auto& [q, s] : bound)
    fit_check(res, "h^{2s_Sogge} ||rho_Pi|| / ||Pi||_alpha bounded (q=" + q_label(q) + ")", s,
              {0.0, 0.0, 1.0}, 0.1, 0.1, CompareMode::OneSided, false);
  return res;
}

// ---------------------------------------------------------------------------
// cluster-upper-bounds and forbidden-decay (1D, solver-based)

struct SolvedCluster {
  double h = 0.0;
  double E_h = 0.0;
  DiscreteOperator P;
  std::shared_ptr<const SpectralCluster> cluster;
};

/// Cluster of the discretized operator around the eigenvalue closest to E0.
inline SolvedCluster solved_cluster_1d(const ExperimentConfig& cfg, double h, Diagnostics* diag) {
  SolvedCluster s;
  s.h = h;
  const double X = confining_box(cfg.potential, 1, cfg.E + 5.0);
  const auto grid = policy_line(X, h, cfg.grid, diag);
  s.P = discretize(cfg.potential, grid, h, diag);
  s.E_h = nearest_eigenvalue_1d(s.P, cfg.E);
  SolverOptions opt;
  opt.seed = cfg.seed;
  auto c = solve_window(s.P, s.E_h, h, opt);
  for (const auto& w : c.diagnostics.warnings) warn(diag, w);
  s.cluster = std::make_shared<const SpectralCluster>(std::move(c));
  return s;
}

inline ExperimentResult cluster_upper_bounds(const ExperimentConfig& cfg) {
  ExperimentResult res;
  res.name = "cluster-upper-bounds";
  if (cfg.d != 1) throw DomainError("cluster-upper-bounds runs the 1D solver (d = 1)");
  struct Key {
    RegionKind kind;
    bool full;
  };
  const std::vector<std::pair<std::string, Key>> regions{
      {"bulk", {RegionKind::Bulk, false}}, {"turning", {RegionKind::Turning, false}}, {"R", {RegionKind::Bulk, true}}};
  std::map<std::pair<std::string, double>, std::vector<Sample>> samples;
  std::map<std::pair<std::string, double>, ExponentTriple> preds;
  for (double h : cfg.h_sweep.values()) {
    const auto s = solved_cluster_1d(cfg, h, &res.diagnostics);
    if (s.cluster->empty()) throw DomainError("empty cluster at h = " + std::to_string(h));
    const auto Pi = DensityMatrixRep::projector(s.cluster);
    const ScalarField rho = density(Pi);
    for (const auto& [name, key] : regions) {
      const Region omega = key.full ? Region::full(rho.grid, "R")
                                    : region_by_potential(s.P.V, s.E_h, cfg.eps, key.kind);
      const Regime regime = key.full ? Regime::General
                            : key.kind == RegionKind::Bulk ? Regime::Sogge
                                                           : Regime::TurningPoint;
      for (double q : cfg.q) {
        const auto e = exponent(regime, q, 1, ext1d());
        const double v = lq_norm(rho, q / 2.0, omega, &res.diagnostics);
        const double sch = weighted_schatten_norm(Pi, s.E_h, h, e.alpha);
        samples[{name, q}].push_back({h, v / sch});
        preds[{name, q}] = {2.0 * e.s, 2.0 * e.t, e.alpha};
        res.rows.push_back({h, q, name, v, sch, e.s, e.t});
      }
    }
  }
  for (const auto& [key, s] : samples)
    fit_check(res, "||rho_Pi||_{q/2}(" + key.first + ") / ||Pi||_alpha <= C h^{-2s} (q=" + q_label(key.second) + ")",
              s, preds[key], 0.1, 0.1, CompareMode::OneSided, false);
  return res;
}

inline ExperimentResult forbidden_decay(const ExperimentConfig& cfg) {
  ExperimentResult res;
  res.name = "forbidden-decay";
  if (cfg.d != 1) throw DomainError("forbidden-decay runs the 1D solver (d = 1)");
  std::vector<double> inv_h, log_y;
  for (double h : cfg.h_sweep.values()) {
    const auto s = solved_cluster_1d(cfg, h, &res.diagnostics);
    const auto Pi = DensityMatrixRep::projector(s.cluster);
    const Region forb = region_by_potential(s.P.V, s.E_h, cfg.eps, RegionKind::Forbidden);
    const double v = density_lq(Pi, 2.0, forb, &res.diagnostics);
    res.rows.push_back({h, 2.0, "forbidden", v, static_cast<double>(s.cluster->rank()), kNaN, kNaN});
    if (v > 0.0) {
      inv_h.push_back(1.0 / h);
      log_y.push_back(std::log(v));
    }
  }
  if (inv_h.size() < 4) throw DomainError("forbidden-decay: too few positive samples");
  Eigen::MatrixXd A(static_cast<Eigen::Index>(inv_h.size()), 2);
  Eigen::VectorXd b(A.rows());
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    A(i, 0) = inv_h[i];
    A(i, 1) = 1.0;
    b[i] = log_y[i];
  }
  const Eigen::Vector2d beta = A.colPivHouseholderQr().solve(b);
  const double c = -beta[0];
  res.checks.push_back(bool_check("log ||rho_Pi||_{L^1(V > E + eps)} slope in 1/h is negative", c > 0.0,
                                  -c, kNaN, kNaN, "decay rate c = " + std::to_string(c)));
  return res;
}

// ---------------------------------------------------------------------------
// weyl-count and pointwise-weyl

inline ExperimentResult weyl_count(const ExperimentConfig& cfg) {
  ExperimentResult res;
  res.name = "weyl-count";
  const bool harmonic = std::holds_alternative<potential::Harmonic>(cfg.potential);
  for (double h : cfg.h_sweep.values()) {
    const double X = confining_box(cfg.potential, 1, cfg.E + 5.0);
    const auto grid = policy_line(X, h, cfg.grid, &res.diagnostics);
    const auto P = discretize(cfg.potential, grid, h, &res.diagnostics);
    const long n1 = static_cast<long>(count_eigenvalues_1d(P, 0.0, cfg.E));
    const auto w1 = weyl_check(n1, cfg.potential, 0.0, cfg.E, h, 1, &res.diagnostics);
    res.rows.push_back({h, kNaN, "1D [0,E]", static_cast<double>(n1), w1.predicted_count, kNaN, kNaN});
    res.checks.push_back(bool_check("1D count ratio at h=" + q_label(h), std::abs(w1.ratio - 1.0) <= 0.05,
                                    w1.ratio, 1.0, 0.05));
    if (harmonic) {
      long exact = 0;
      for (long n = 0; (2.0 * n + 1.0) * h <= cfg.E; ++n) ++exact;
      const auto we = weyl_check(exact, cfg.potential, 0.0, cfg.E, h, 1, &res.diagnostics);
      res.checks.push_back(bool_check("1D exact-spectrum count ratio at h=" + q_label(h),
                                      std::abs(we.ratio - 1.0) <= 0.01, we.ratio, 1.0, 0.01));
      // Second-order differences lower the eigenvalues by O(dx^2/h^2), which can
      // move the level closest to E across the window edge.
      res.checks.push_back(bool_check("1D discrete count within one level of the exact count at h=" + q_label(h),
                                      std::abs(n1 - exact) <= 1, static_cast<double>(n1),
                                      static_cast<double>(exact), 1.0));
      long n2 = 0;
      for (long k = 0; 2.0 * h * (k + 1) <= cfg.E; ++k) n2 += k + 1;
      const auto w2 = weyl_check(n2, cfg.potential, 0.0, cfg.E, h, 2, &res.diagnostics);
      res.rows.push_back({h, kNaN, "2D [0,E]", static_cast<double>(n2), w2.predicted_count, kNaN, kNaN});
      res.checks.push_back(bool_check("2D degeneracy-count ratio at h=" + q_label(h),
                                      std::abs(w2.ratio - 1.0) <= 0.05, w2.ratio, 1.0, 0.05));
    }
  }
  return res;
}

/// rho of 1_{P <= E} at x = 0 for the 1D oscillator, as a sum of Hermite functions.
inline double oscillator_spectral_density_at_origin(double E, double h, long* count = nullptr) {
  double s = 0.0;
  long n = 0;
  for (; (2.0 * n + 1.0) * h <= E; ++n) {
    const double v = hermite_function(static_cast<int>(n), h, 0.0);
    s += v * v;
  }
  if (count) *count = n;
  return s;
}

inline ExperimentResult pointwise_weyl(const ExperimentConfig& cfg) {
  ExperimentResult res;
  res.name = "pointwise-weyl";
  for (int n : levels_or(cfg, {400})) {
    const double h = cfg.E / (2.0 * n + 1.0);
    long count = 0;
    const double rho = oscillator_spectral_density_at_origin(cfg.E, h, &count);
    const double pred = pointwise_weyl_prediction(potential::Harmonic{}, cfg.E, h, Point::Zero(), 1);
    res.rows.push_back({h, kNaN, "x=0", rho, static_cast<double>(count), kNaN, kNaN});
    res.checks.push_back(bool_check("rho_{1(P<=E)}(0) / Weyl prediction at h=" + q_label(h),
                                    std::abs(rho / pred - 1.0) <= 0.1, rho / pred, 1.0, 0.1));
  }
  return res;
}

// ---------------------------------------------------------------------------
// dyadic-constant and kernel-transition

inline ExperimentResult dyadic_constant(const ExperimentConfig& cfg) {
  ExperimentResult res;
  res.name = "dyadic-constant";
  const int d = cfg.d;
  for (double q : cfg.q) {
    std::vector<Sample> s;
    for (double h : cfg.h_sweep.values()) {
      const double v = dyadic_sum_constant(q, d, h, 1.0, 1.0);
      s.push_back({h, v});
      const auto e = exponent(Regime::TurningPoint, q, d);
      res.rows.push_back({h, q, "strips", v, kNaN, e.s, e.t});
    }
    const auto e = exponent(Regime::TurningPoint, q, d);
    const bool log_term = e.t > 0.0;
    fit_check(res, "C_h exponent (q=" + q_label(q) + ", d=" + std::to_string(d) + ")", s, e, 0.05, 0.05,
              CompareMode::TwoSided, log_term);
    if (log_term)
      fit_check(res, "C_h exponent, t frozen (informational, q=" + q_label(q) + ")", s, e, 0.05, 0.05,
                CompareMode::TwoSided, false, false);
  }
  std::stable_sort(res.rows.begin(), res.rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return a.h < b.h || (a.h == b.h && a.q < b.q);
  });
  return res;
}

/// h-range on which the log-corrected kernel cases are fitted: log(1/h) and
/// log log(1/h) are too collinear on 1e-2..1e-5 for a free (s, t) fit.
inline constexpr HSweep kKernelLogSweep{1e-8, 1e-30, 40};

inline ExperimentResult kernel_transition(const ExperimentConfig& cfg) {
  ExperimentResult res;
  res.name = "kernel-transition";
  struct Case {
    double beta;
    bool squared;
    ExponentTriple pred;
  };
  const int d = cfg.d;
  const std::vector<Case> cases{{0.0, false, {d - 1.0, 0.0, 1.0}},
                                {0.5 * (d - 2), false, {0.5 * d, 1.0, 1.0}},
                                {0.5 * (d - 1), true, {0.5 * d, 0.5, 1.0}}};
  for (const auto& c : cases) {
    const bool log_term = c.pred.t > 0.0;
    const std::string label = "K_{h,beta} " + std::string(c.squared ? "L2" : "L1") +
                              " exponent (beta=" + q_label(c.beta) + ", d=" + std::to_string(d) + ")";
    std::vector<Sample> s, narrow;
    for (double h : (log_term ? kKernelLogSweep : cfg.h_sweep).values()) {
      const double v = kernel_integral(h, c.beta, d, c.squared);
      s.push_back({h, v});
      res.rows.push_back({h, kNaN, c.squared ? "L2" : "L1", v, c.beta, c.pred.s, c.pred.t});
    }
    fit_check(res, label, s, c.pred, 0.05, 0.05, CompareMode::TwoSided, log_term);
    if (log_term) {
      for (double h : cfg.h_sweep.values()) narrow.push_back({h, kernel_integral(h, c.beta, d, c.squared)});
      fit_check(res, label + ", t frozen on the default sweep (informational)", narrow, c.pred, 0.05, 0.05,
                CompareMode::TwoSided, false, false);
    }
  }
  std::stable_sort(res.rows.begin(), res.rows.end(), [](const ResultRow& a, const ResultRow& b) { return a.h < b.h; });
  return res;
}

}  // namespace experiments

// ---------------------------------------------------------------------------
// Registry

struct ExperimentEntry {
  std::string_view name;
  std::function<ExperimentResult(const ExperimentConfig&)> run;
  std::function<ExperimentConfig()> defaults;
};

inline const std::vector<ExperimentEntry>& experiment_registry() {
  using namespace experiments;
  static const std::vector<ExperimentEntry> reg = [] {
    std::vector<ExperimentEntry> r;
    const auto base = [](std::string name) {
      ExperimentConfig c;
      c.experiment = std::move(name);
      return c;
    };
    r.push_back({"hermite-lq", hermite_lq, [=] {
                   auto c = base("hermite-lq");
                   c.q = {2.0, 3.0, 4.0, 6.0, 8.0, kInf};
                   c.grid.dx_over_h = 1.0 / 6.0;
                   return c;
                 }});
    r.push_back({"airy-profile", airy_profile_experiment, [=] {
                   auto c = base("airy-profile");
                   c.grid.dx_over_h = 1.0 / 6.0;
                   return c;
                 }});
    r.push_back({"gaussian-groundstate", gaussian_groundstate_experiment, [=] {
                   auto c = base("gaussian-groundstate");
                   c.potential = potential::DoubleWell{};
                   c.h_sweep = {std::ldexp(1.0, -4), std::ldexp(1.0, -12), 9};
                   return c;
                 }});
    r.push_back({"gaussian-beam", gaussian_beam_experiment, [=] {
                   auto c = base("gaussian-beam");
                   c.d = 2;
                   c.q = {2.0, 4.0, 6.0};
                   return c;
                 }});
    r.push_back({"zonal", zonal_experiment, [=] {
                   auto c = base("zonal");
                   c.d = 2;
                   c.grid.dx_over_h = 0.5;
                   return c;
                 }});
    r.push_back({"bulk-delocalization", bulk_delocalization, [=] {
                   auto c = base("bulk-delocalization");
                   c.d = 2;
                   c.grid.dx_over_h = 0.5;
                   return c;
                 }});
    r.push_back({"weyl-count", weyl_count, [=] {
                   auto c = base("weyl-count");
                   c.h_sweep = {1e-2, 1e-3, 4};
                   return c;
                 }});
    r.push_back({"pointwise-weyl", pointwise_weyl, [=] { return base("pointwise-weyl"); }});
    r.push_back({"forbidden-decay", forbidden_decay, [=] {
                   auto c = base("forbidden-decay");
                   c.potential = potential::DoubleWell{};
                   c.E = 0.5;
                   c.h_sweep = {std::ldexp(1.0, -5), std::ldexp(1.0, -9), 9};
                   return c;
                 }});
    r.push_back({"cluster-upper-bounds", cluster_upper_bounds, [=] {
                   auto c = base("cluster-upper-bounds");
                   c.potential = potential::DoubleWell{};
                   c.E = 0.5;
                   c.q = {2.0, 6.0, kInf};
                   c.h_sweep = {std::ldexp(1.0, -5), std::ldexp(1.0, -9), 5};
                   return c;
                 }});
    r.push_back({"dyadic-constant", dyadic_constant, [=] {
                   auto c = base("dyadic-constant");
                   c.d = 3;
                   c.q = {2.0, 3.0, 6.0};
                   c.h_sweep = {1e-2, 1e-5, 40};
                   return c;
                 }});
    r.push_back({"kernel-transition", kernel_transition, [=] {
                   auto c = base("kernel-transition");
                   c.d = 3;
                   c.h_sweep = {1e-2, 1e-5, 40};
                   return c;
                 }});
    r.push_back({"exponent-tables", exponent_tables, [=] {
                   auto c = base("exponent-tables");
                   c.q = {2.0, 3.0, 4.0, 6.0, 10.0, kInf};
                   return c;
                 }});
    return r;
  }();
  return reg;
}

inline const ExperimentEntry* find_experiment(std::string_view name) {
  for (const auto& e : experiment_registry())
    if (e.name == name) return &e;
  return nullptr;
}

inline ExperimentConfig default_config(std::string_view name) {
  const auto* e = find_experiment(name);
  if (!e) throw DomainError("unknown experiment '" + std::string(name) + "'");
  return e->defaults();
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  const auto* e = find_experiment(cfg.experiment);
  if (!e) throw DomainError("unknown experiment '" + cfg.experiment + "'");
  return e->run(cfg);
}

// ---------------------------------------------------------------------------
// Output tables

inline void write_results_csv(std::ostream& os, const ExperimentResult& r) {
  os << "h,q,region,norm,schatten,predicted_s,predicted_t\n";
  char buf[320];
  for (const auto& row : r.rows) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%s,%.12g,%.12g,%.12g,%.12g\n", row.h, row.q,
                  row.region.c_str(), row.norm, row.schatten, row.predicted_s, row.predicted_t);
    os << buf;
  }
}

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

inline void write_verdicts_csv(std::ostream& os, const ExperimentResult& r) {
  os << "check,pass,mandatory,value,expected,tolerance,margin,detail\n";
  char buf[160];
  for (const auto& c : r.checks) {
    std::snprintf(buf, sizeof buf, ",%s,%s,%.12g,%.12g,%.12g,%.12g,", c.pass ? "pass" : "fail",
                  c.mandatory ? "yes" : "no", c.value, c.expected, c.tolerance, c.margin);
    os << csv_quote(c.label) << buf << csv_quote(c.detail) << "\n";
  }
}

}  // namespace semiclass
