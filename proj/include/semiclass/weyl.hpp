#pragma once

// Integrated and pointwise Weyl laws: phase-space volumes |p^{-1}([a, b])| for
// p(x, xi) = |xi|^2 + V(x), predicted eigenvalue counts, and comparisons.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "semiclass/error.hpp"
#include "semiclass/grid.hpp"
#include "semiclass/potential.hpp"
#include "semiclass/quadrature.hpp"

namespace semiclass {

/// Volume of the unit ball in R^d.
inline double unit_ball_volume(int d) {
  return std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

namespace detail {

/// c_d [(b - v)_+^{d/2} - (a - v)_+^{d/2}]: xi-volume of the shell over a point with V = v.
inline double fibre_volume(double v, double a, double b, int d) {
  const double cd = unit_ball_volume(d);
  const auto part = [d](double e) { return e > 0.0 ? std::pow(e, 0.5 * d) : 0.0; };
  return cd * (part(b - v) - part(a - v));
}

/// Sign changes of g on [lo, hi] located by a uniform scan and refined by bisection.
template <class G>
std::vector<double> scan_roots(G&& g, double lo, double hi, int samples) {
  std::vector<double> roots;
  double x0 = lo, g0 = g(lo);
  for (int i = 1; i <= samples; ++i) {
    const double x1 = lo + (hi - lo) * i / samples;
    const double g1 = g(x1);
    if ((g0 < 0.0) != (g1 < 0.0)) {
      double l = x0, r = x1, gl = g0;
      for (int it = 0; it < 200 && r - l > 1e-15 * std::max(1.0, std::abs(l)); ++it) {
        const double m = 0.5 * (l + r);
        const double gm = g(m);
        if ((gm < 0.0) == (gl < 0.0)) {
          l = m;
          gl = gm;
        } else {
          r = m;
        }
      }
      roots.push_back(0.5 * (l + r));
    }
    x0 = x1;
    g0 = g1;
  }
  return roots;
}

/// Minimum of g on [lo, hi]: best of a uniform scan, refined by golden section
/// on the two neighbouring cells.
template <class G>
double scan_minimum(G&& g, double lo, double hi, int samples) {
  const double dx = (hi - lo) / samples;
  int best = 0;
  double gbest = g(lo);
  for (int i = 1; i <= samples; ++i) {
    const double gi = g(lo + dx * i);
    if (gi < gbest) {
      gbest = gi;
      best = i;
    }
  }
  double l = lo + dx * std::max(best - 1, 0), r = lo + dx * std::min(best + 1, samples);
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 80; ++it) {
    const double c = r - phi * (r - l), e = l + phi * (r - l);
    if (g(c) < g(e))
      r = e;
    else
      l = c;
  }
  return std::min(gbest, g(0.5 * (l + r)));
}

/// Sorts breakpoints and merges those closer than tol; slivers contribute nothing
/// measurable and trip the endpoint asserts of Boost's tanh-sinh.
inline void merge_breaks(std::vector<double>& breaks, double tol) {
  std::sort(breaks.begin(), breaks.end());
  std::vector<double> out{breaks.front()};
  for (std::size_t i = 1; i + 1 < breaks.size(); ++i)
    if (breaks[i] - out.back() > tol) out.push_back(breaks[i]);
  if (breaks.back() - out.back() <= tol && out.size() > 1) out.pop_back();
  out.push_back(breaks.back());
  breaks = std::move(out);
}

template <class V1>
double line_shell_integral(V1&& v, double a, double b, double lo, double hi, int d_fibre,
                           double rel_tol, bool singular_ends, double abs_tol = 0.0) {
  std::vector<double> breaks{lo};
  for (double level : {a, b}) {
    auto r = scan_roots([&](double x) { return v(x) - level; }, lo, hi, 512);
    breaks.insert(breaks.end(), r.begin(), r.end());
  }
  breaks.push_back(hi);
  merge_breaks(breaks, 1e-12 * (hi - lo));
  const auto f = [&](double x) { return fibre_volume(v(x), a, b, d_fibre); };
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double mid = 0.5 * (breaks[i] + breaks[i + 1]);
    if (v(mid) >= b) continue;  // outside {V <= b}
    total += singular_ends ? quad::integrate_endpoint_singular(f, breaks[i], breaks[i + 1], rel_tol).value
                           : quad::integrate(f, breaks[i], breaks[i + 1], rel_tol, abs_tol).value;
  }
  return total;
}

}  // namespace detail

/// Monte Carlo estimate of |p^{-1}([a, b])| on the box [-L, L]^d (xi integrated exactly);
/// the standard error is returned through `std_error`.
inline double phase_space_volume_mc(const PotentialSpec& V, double a, double b, int d,
                                    std::uint64_t seed = 12345, long samples = 2'000'000,
                                    double* std_error = nullptr) {
  const double L = confining_box(V, d, b);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-L, L);
  double mean = 0.0, m2 = 0.0;
  for (long i = 1; i <= samples; ++i) {
    Point x = Point::Zero();
    for (int k = 0; k < d; ++k) x[k] = U(rng);
    const double f = detail::fibre_volume(evaluate(V, x, d), a, b, d);
    const double delta = f - mean;
    mean += delta / i;
    m2 += delta * (f - mean);
  }
  const double box = std::pow(2.0 * L, d);
  if (std_error) *std_error = box * std::sqrt(m2 / (samples - 1.0) / samples);
  return box * mean;
}

/// |p^{-1}([a, b])| = int c_d [(b - V)_+^{d/2} - (a - V)_+^{d/2}] dx by adaptive
/// quadrature split at the level sets V = a, b (nested in d = 2). Falls back to
/// the seeded Monte Carlo estimate if the nested quadrature fails.
inline double phase_space_volume(const PotentialSpec& V, double a, double b, int d,
                                 Diagnostics* diag = nullptr, double rel_tol = 1e-9) {
  if (d < 1 || d > 2) throw DomainError("phase_space_volume supports d = 1, 2");
  if (b < a) throw DomainError("phase_space_volume needs b >= a");
  validate(V, d);
  if (b == a) return 0.0;
  const double L = confining_box(V, d, b) * 1.01;
  if (d == 1) {
    const auto v = [&](double x) { return evaluate(V, Point(x, 0.0), 1); };
    return detail::line_shell_integral(v, a, b, -L, L, 1, rel_tol, true);
  }
  const auto line = [&](double x1) {
    return [&V, x1](double x2) { return evaluate(V, Point(x1, x2), 2); };
  };
  // Near the edge of the support the inner integrand is pure cancellation, so it
  // gets an absolute floor relative to the largest fibre over the box.
  const double floor = 0.1 * rel_tol * std::numbers::pi * (b - a) * 2.0 * L;
  const auto inner = [&](double x1) {
    return detail::line_shell_integral(line(x1), a, b, -L, L, 2, rel_tol * 0.1, false, floor);
  };
  // The x1-integrand has algebraic kinks where min_{x2} V(x1, .) crosses a or b;
  // the outer integral is split there and each panel done by tanh-sinh.
  const auto line_min = [&](double x1) { return detail::scan_minimum(line(x1), -L, L, 512); };
  std::vector<double> breaks{-L};
  for (double level : {a, b}) {
    auto r = detail::scan_roots([&](double x1) { return line_min(x1) - level; }, -L, L, 256);
    breaks.insert(breaks.end(), r.begin(), r.end());
  }
  breaks.push_back(L);
  detail::merge_breaks(breaks, 1e-12 * L);
  try {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
      if (line_min(0.5 * (breaks[i] + breaks[i + 1])) >= b) continue;
      total += quad::integrate_endpoint_singular(inner, breaks[i], breaks[i + 1], rel_tol).value;
    }
    return total;
  } catch (const ConvergenceError& e) {
    warn(diag, std::string("phase_space_volume: nested quadrature failed (") + e.what() +
                   "); using Monte Carlo");
    return phase_space_volume_mc(V, a, b, d);
  }
}

/// Phase volume using the trapezoid rule on sampled potential values.
inline double grid_phase_volume(const ScalarField& V, double a, double b) {
  const Grid& g = *V.grid;
  std::vector<double> terms(static_cast<std::size_t>(V.values.size()));
  for (Eigen::Index k = 0; k < V.values.size(); ++k)
    terms[k] = g.weight(k) * detail::fibre_volume(V.values[k], a, b, g.dim());
  return pairwise_sum(terms);
}

inline double weyl_predicted_count(double phase_volume, double h, int d) {
  return phase_volume / std::pow(2.0 * std::numbers::pi * h, d);
}

struct WeylEstimate {
  double a = 0.0;
  double b = 0.0;
  double phase_volume = 0.0;
  double predicted_count = 0.0;
  long actual_count = 0;
  double ratio = std::numeric_limits<double>::quiet_NaN();  ///< actual / predicted
  bool complete = true;                                     ///< spectrum known on all of [a, b]
};

/// Compares a known count of eigenvalues in [a, b] against (2 pi h)^{-d} |p^{-1}([a, b])|.
inline WeylEstimate weyl_check(long actual_count, const PotentialSpec& V, double a, double b,
                               double h, int d, Diagnostics* diag = nullptr) {
  WeylEstimate w;
  w.a = a;
  w.b = b;
  w.actual_count = actual_count;
  if (!(b > a)) {
    warn(diag, "weyl_check: empty interval, ratio undefined");
    return w;
  }
  w.phase_volume = phase_space_volume(V, a, b, d, diag);
  w.predicted_count = weyl_predicted_count(w.phase_volume, h, d);
  if (w.predicted_count > 0.0 && actual_count > 0)
    w.ratio = static_cast<double>(actual_count) / w.predicted_count;
  else
    warn(diag, "weyl_check: zero count, ratio undefined");
  return w;
}

/// Same, counting the eigenvalues of a spectrum that falls in [a, b].
inline WeylEstimate weyl_check(std::span<const double> eigenvalues, const PotentialSpec& V,
                               double a, double b, double h, int d, bool complete = true,
                               Diagnostics* diag = nullptr) {
  const long n = std::count_if(eigenvalues.begin(), eigenvalues.end(),
                               [&](double l) { return l >= a && l <= b; });
  auto w = weyl_check(n, V, a, b, h, d, diag);
  w.complete = complete;
  if (!complete) warn(diag, "weyl_check: spectrum flagged incomplete on the interval");
  return w;
}

/// |B(0,1)| (2 pi h)^{-d} (E - V(x))_+^{d/2}
inline double pointwise_weyl_prediction(const PotentialSpec& V, double E, double h,
                                        const Point& x, int d) {
  if (!(h > 0.0)) throw DomainError("pointwise_weyl_prediction needs h > 0");
  const double e = E - evaluate(V, x, d);
  if (e <= 0.0) return 0.0;
  return unit_ball_volume(d) * std::pow(e, 0.5 * d) / std::pow(2.0 * std::numbers::pi * h, d);
}

}  // namespace semiclass
