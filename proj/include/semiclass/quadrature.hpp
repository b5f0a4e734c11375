#pragma once

// Adaptive 1D quadrature on top of Boost's Gauss-Kronrod and tanh-sinh rules.

#include <cmath>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "semiclass/error.hpp"

namespace semiclass::quad {

struct Integral {
  double value = 0.0;
  double abs_error = 0.0;
};

/// Globally adaptive G7K15 on [a, b]: the panel with the largest error estimate is
/// bisected until the summed error is below max(abs_tol, rel_tol |I|). Throws
/// ConvergenceError carrying the achieved relative error otherwise.
template <class F>
Integral integrate(F&& f, double a, double b, double rel_tol = 1e-10, double abs_tol = 0.0,
                   int max_panels = 4000) {
  if (a == b) return {};
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  struct Panel {
    double lo, hi, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
  };
  const auto eval = [&](double lo, double hi) {
    double err = 0.0;
    const double v = GK::integrate(f, lo, hi, 0, 0.0, &err);
    return Panel{lo, hi, v, err};
  };
  std::priority_queue<Panel> queue;
  queue.push(eval(a, b));
  double value = queue.top().value, error = queue.top().error;
  int panels = 1;
  const auto done = [&] { return error <= std::max(abs_tol, rel_tol * std::abs(value)); };
  while (!done() && panels < max_panels) {
    const Panel p = queue.top();
    const double mid = 0.5 * (p.lo + p.hi);
    if (!(mid > p.lo && mid < p.hi)) break;  // panel at machine resolution
    queue.pop();
    const Panel l = eval(p.lo, mid), r = eval(mid, p.hi);
    value += l.value + r.value - p.value;
    error += l.error + r.error - p.error;
    queue.push(l);
    queue.push(r);
    ++panels;
  }
  // Re-sum to shed the drift of the running updates.
  value = error = 0.0;
  for (; !queue.empty(); queue.pop()) {
    value += queue.top().value;
    error += queue.top().error;
  }
  if (!std::isfinite(value) || !done()) {
    const double scale = std::max(std::abs(value), 1e-300);
    throw ConvergenceError("adaptive quadrature on [" + std::to_string(a) + ", " +
                               std::to_string(b) + "] did not converge",
                           panels, error / scale);
  }
  return {value, error};
}

/// Sum of adaptive integrals over consecutive panels [p_i, p_{i+1}].
template <class F>
Integral integrate_panels(F&& f, std::span<const double> breaks,
                          double rel_tol = 1e-10, double abs_tol = 0.0) {
  Integral total;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    auto piece = integrate(f, breaks[i], breaks[i + 1], rel_tol, abs_tol);
    total.value += piece.value;
    total.abs_error += piece.abs_error;
  }
  return total;
}

/// Integral of f over [0, +inf) split into geometric panels [0, 1], [1, r], [r, r^2], ...
/// up to `upper`. Used for integrands with a long algebraic tail.
template <class F>
Integral integrate_geometric(F&& f, double upper, double rel_tol = 1e-10,
                             double ratio = 8.0) {
  std::vector<double> breaks{0.0};
  double b = 1.0;
  while (b < upper) {
    breaks.push_back(b);
    b *= ratio;
  }
  breaks.push_back(upper);
  return integrate_panels(f, breaks, rel_tol);
}

/// Tanh-sinh on [a, b]; suited to integrable endpoint singularities such as
/// sqrt(E - V) at turning points.
template <class F>
Integral integrate_endpoint_singular(F&& f, double a, double b, double rel_tol = 1e-10) {
  if (a == b) return {};
  static thread_local boost::math::quadrature::tanh_sinh<double> rule;
  // Integrate on [-1, 1], where the abscissae Boost forms never round onto an
  // endpoint; on a general [a, b] its z < -0.5 branch can land exactly on a.
  const double c = 0.5 * (a + b), r = 0.5 * (b - a);
  const auto g = [&](double t) { return r * f(c + r * t); };
  double err = 0.0, l1 = 0.0;
  const double v = rule.integrate(g, -1.0, 1.0, rel_tol, &err, &l1);
  const double scale = std::max(std::abs(v), 1e-300);
  if (!std::isfinite(v) || err > 10.0 * rel_tol * std::max(scale, l1))
    throw ConvergenceError("tanh-sinh quadrature did not converge", 0, err / scale);
  return {v, err};
}

}  // namespace semiclass::quad
