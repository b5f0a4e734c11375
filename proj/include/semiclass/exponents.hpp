#pragma once

// Closed-form concentration exponents (s, t, alpha) for L^q estimates of
// spectral clusters, their transition points, and the two scalar diagnostics
// built on them (dyadic strip summation and the transition kernel integral).
//
// Everything is evaluated in the variable 1/q so that q = +inf is an ordinary
// value (1/q = 0).

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "semiclass/error.hpp"
#include "semiclass/quadrature.hpp"

namespace semiclass {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Regime { Elliptic, General, Sogge, TurningPoint, Sobolev };

inline constexpr std::array<Regime, 5> kAllRegimes{
    Regime::Elliptic, Regime::General, Regime::Sogge, Regime::TurningPoint,
    Regime::Sobolev};

inline std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::Elliptic: return "ellip";
    case Regime::General: return "gene";
    case Regime::Sogge: return "Sogge";
    case Regime::TurningPoint: return "TP";
    case Regime::Sobolev: return "Sobolev";
  }
  return "?";
}

inline Regime regime_from_string(std::string_view s) {
  for (auto r : kAllRegimes)
    if (to_string(r) == s) return r;
  throw DomainError("unknown regime '" + std::string(s) + "'");
}

/// Concentration data: ||rho||_{q/2} <~ log(1/h)^{2t} h^{-2s} ||gamma||_alpha.
struct ExponentTriple {
  double s = 0.0;
  double t = 0.0;
  double alpha = 1.0;  ///< may be +inf
};

struct ExponentOptions {
  /// d = 2, General: logarithm-free sup bound, giving t(q,2) = 2/q for q >= 6.
  bool smith_zworski = false;
  /// Allow Sogge/TurningPoint at d = 1 by evaluating their formulas with the
  /// transition points that become infinite or negative removed. The result is
  /// the one-dimensional Hermite picture: s_TP(q,1) = max(0, 1/6 - 2/(3q)).
  bool one_dimensional_extension = false;
};

namespace detail {

inline constexpr double kBreakTol = 1e-12;

// q as 1/q; +inf -> 0.
inline double inv(double q) { return 1.0 / q; }

// 2 <= q <= qb, with the boundary assigned to the left branch.
inline bool left_of(double inv_q, double qb) {
  return inv_q >= inv(qb) - kBreakTol;
}

inline bool at(double inv_q, double qb) {
  return std::abs(inv_q - inv(qb)) <= kBreakTol;
}

inline double q_sogge(int d) { return 2.0 * (d + 1) / (d - 1); }      // d >= 2
inline double q_sobolev(int d) { return d > 2 ? 2.0 * d / (d - 2) : kInf; }
inline double q_tp(int d) { return 2.0 * (d + 3) / (d + 1); }

// 2q/(q+2), q/2, ... written in 1/q.
inline double two_q_over_q_plus_2(double iq) { return 2.0 / (1.0 + 2.0 * iq); }
inline double linear_in_q(double coef, double iq) {
  return iq == 0.0 ? kInf : coef / iq;
}

inline void check_q_d(double q, int d) {
  if (std::isnan(q) || q < 2.0)
    throw DomainError("Lebesgue exponent q must lie in [2, inf], got " + std::to_string(q));
  if (d < 1) throw DomainError("dimension d must be >= 1, got " + std::to_string(d));
}

inline double s_sogge(double iq, int d) {
  const double x = 0.5 - iq;
  if (d == 1) return 0.0;
  return left_of(iq, q_sogge(d)) ? 0.5 * (d - 1) * x : d * x - 0.5;
}

inline double alpha_sogge(double iq, int d) {
  if (d == 1 || left_of(iq, q_sogge(d))) return two_q_over_q_plus_2(iq);
  return linear_in_q((d - 1.0) / (2.0 * d), iq);
}

}  // namespace detail

/// Exponent triple of a regime in dimension d at Lebesgue exponent q in [2, inf].
inline ExponentTriple exponent(Regime regime, double q, int d,
                               const ExponentOptions& opt = {}) {
  using namespace detail;
  check_q_d(q, d);
  const double iq = inv(q);
  const double x = 0.5 - iq;

  switch (regime) {
    case Regime::Sobolev:
      return {d * x, 0.0, 1.0};

    case Regime::Elliptic:
      return {d * x - 1.0, 0.0, linear_in_q(0.5, iq)};

    case Regime::General: {
      if (d == 1) return {0.5 * x, 0.0, linear_in_q(0.5, iq)};
      if (d == 2) {
        ExponentTriple e{x, 0.0, 0.0};
        if (left_of(iq, 6.0) && !at(iq, 6.0)) {
          e.alpha = two_q_over_q_plus_2(iq);
        } else {
          e.t = opt.smith_zworski ? 2.0 * iq : x;
          e.alpha = at(iq, 6.0) ? 1.5 : linear_in_q(0.25, iq);
        }
        return e;
      }
      const double q1 = q_sogge(d), q2 = q_sobolev(d);
      ExponentTriple e;
      e.s = left_of(iq, q2) ? 0.5 * d * x : d * x - 0.5;
      if (left_of(iq, q1)) {
        e.t = at(iq, q1) ? d * iq - 0.5 * (d - 2) : 0.0;
        e.alpha = two_q_over_q_plus_2(iq);
      } else if (left_of(iq, q2)) {
        e.t = at(iq, q2) ? 0.0 : d * iq - 0.5 * (d - 2);
        e.alpha = 2.0 / (d * (1.0 - 2.0 * iq));
      } else {
        e.alpha = linear_in_q((d - 2.0) / (2.0 * d), iq);
      }
      return e;
    }

    case Regime::Sogge:
      if (d == 1 && !opt.one_dimensional_extension)
        throw DomainError("Sogge exponents require d >= 2");
      return {s_sogge(iq, d), 0.0, alpha_sogge(iq, d)};

    case Regime::TurningPoint: {
      if (d == 1 && !opt.one_dimensional_extension)
        throw DomainError("turning-point exponents require d >= 2");
      const double q3 = q_tp(d);
      const double q2 = d >= 3 ? q_sobolev(d) : kInf;
      ExponentTriple e;
      if (left_of(iq, q3))
        e.s = 0.5 * (d - 1) * x;
      else if (left_of(iq, q2))
        e.s = (2.0 * d / 3.0) * x - 1.0 / 6.0;
      else
        e.s = d * x - 0.5;
      e.t = at(iq, q3) ? (d + 1.0) / (2.0 * (d + 3.0)) : 0.0;
      e.alpha = alpha_sogge(iq, d);
      return e;
    }
  }
  throw DomainError("unknown regime");
}

/// Transition exponents q in (2, inf) where the piecewise formulas change branch.
inline std::vector<double> breakpoints(Regime regime, int d,
                                       const ExponentOptions& opt = {}) {
  using namespace detail;
  check_q_d(2.0, d);
  std::vector<double> out;
  switch (regime) {
    case Regime::Elliptic:
    case Regime::Sobolev:
      break;
    case Regime::General:
      if (d == 2) out = {6.0};
      if (d >= 3) out = {q_sogge(d), q_sobolev(d)};
      break;
    case Regime::Sogge:
      if (d == 1 && !opt.one_dimensional_extension)
        throw DomainError("Sogge exponents require d >= 2");
      if (d >= 2) out = {q_sogge(d)};
      break;
    case Regime::TurningPoint:
      if (d == 1 && !opt.one_dimensional_extension)
        throw DomainError("turning-point exponents require d >= 2");
      out = {q_tp(d)};
      if (d >= 3) out.push_back(q_sobolev(d));
      break;
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(),
                        [](double a, double b) { return std::abs(a - b) < 1e-12; }),
            out.end());
  std::erase_if(out, [](double q) { return !(q > 2.0 && std::isfinite(q)); });
  return out;
}

/// mu(q,d) = d(1/2 - 1/q) - (3/2) s_Sogge(q,d): the strip-width exponent of the
/// rescaled Sogge bound on a box of size eps near a turning point.
inline double mu(double q, int d) {
  detail::check_q_d(q, d);
  if (d < 2) throw DomainError("mu(q,d) requires d >= 2");
  const double iq = detail::inv(q);
  return d * (0.5 - iq) - 1.5 * detail::s_sogge(iq, d);
}

/// Indices k of the dyadic strips A_{2^k h^{2/3}} covering
/// {M h^{2/3} <= x_1 <= delta/2}: k runs from floor(log2 M) to
/// K(h) = ceil(log2(delta h^{-2/3} / 2)).
struct StripRange {
  int k_first = 0;
  int k_last = -1;
  int count() const { return k_last - k_first + 1; }
};

inline StripRange dyadic_strip_range(double h, double M, double delta) {
  if (!(h > 0.0) || !(M >= 1.0) || !(delta > 0.0))
    throw DomainError("dyadic strips need h > 0, M >= 1, delta > 0");
  const double scale = std::cbrt(h * h);
  if (M * scale >= delta / 2.0)
    throw ConstraintError("empty dyadic strip range: M h^(2/3) >= delta/2");
  StripRange r;
  r.k_first = static_cast<int>(std::floor(std::log2(M)));
  r.k_last = static_cast<int>(std::ceil(std::log2(delta / (2.0 * scale))));
  if (r.k_last < r.k_first) throw ConstraintError("empty dyadic strip range");
  return r;
}

/// C_h = (sum_k C_{h, 2^k h^{2/3}}^q)^{1/q} with C_{h,eps} = h^{-s_Sogge} eps^{1/4 - mu};
/// the l^inf limit (max over strips) when q = inf.
inline double dyadic_sum_constant(double q, int d, double h, double M, double delta) {
  detail::check_q_d(q, d);
  const auto range = dyadic_strip_range(h, M, delta);
  const double s = exponent(Regime::Sogge, q, d).s;
  const double m = mu(q, d);
  const double log_scale = (2.0 / 3.0) * std::log(h);

  std::vector<double> logs;
  for (int k = range.k_first; k <= range.k_last; ++k) {
    const double log_eps = k * std::log(2.0) + log_scale;
    logs.push_back(-s * std::log(h) + (0.25 - m) * log_eps);
  }
  const double top = *std::max_element(logs.begin(), logs.end());
  if (std::isinf(q)) return std::exp(top);
  double acc = 0.0;
  for (double l : logs) acc += std::exp(q * (l - top));
  return std::exp(top + std::log(acc) / q);
}

/// int_{-1}^{1} K_{h,beta}(t) dt (squared = false) or (int K^2)^{1/2} (squared = true),
/// with K_{h,beta}(t) = h^{-d/2} |t|^beta (h + |t|)^{-d/2}.
///
/// After t = h u the integral becomes h^{...} int_0^{1/h} u^b (1+u)^{-c} du, which is
/// integrated on geometric panels so that any h > 0 is resolved.
inline double kernel_integral(double h, double beta, int d, bool squared,
                              double rel_tol = 1e-9) {
  if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("kernel_integral needs h > 0");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw DomainError("kernel_integral needs beta >= 0");
  if (d < 1) throw DomainError("kernel_integral needs d >= 1");

  const double b = squared ? 2.0 * beta : beta;
  const double c = squared ? double(d) : 0.5 * d;
  const double pre = squared ? -double(d) : -0.5 * d;  // power of h in front of |t|^b(h+|t|)^-c
  auto integrand = [b, c](double u) {
    return u == 0.0 ? (b == 0.0 ? 1.0 : 0.0) : std::exp(b * std::log(u) - c * std::log1p(u));
  };
  const auto I = quad::integrate_geometric(integrand, 1.0 / h, rel_tol * 1e-2);
  if (I.abs_error > rel_tol * I.value)
    throw ConvergenceError("kernel_integral quadrature", 0, I.abs_error / I.value);
  // int_{-1}^{1} = 2 int_0^1, and dt = h du, t^b = h^b u^b, (h+t)^-c = h^-c (1+u)^-c.
  const double log_val = std::log(2.0) + std::log(I.value) + (pre + b + 1.0 - c) * std::log(h);
  return squared ? std::exp(0.5 * log_val) : std::exp(log_val);
}

}  // namespace semiclass
