#pragma once

// Hermite functions of the semiclassical oscillator -h^2 d^2/dx^2 + x^2, the Airy
// function Ai, the Liouville-Green phase zeta(x) for the turning point x = 1, and
// the uniform Airy profile of the eigenfunction at energy 1.

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "semiclass/error.hpp"
#include "semiclass/grid.hpp"

namespace semiclass {

inline constexpr int kMaxHermiteDegree = 1'000'000;

namespace detail {

inline constexpr double kRescaleAbove = 1e150;
inline constexpr double kRescaleBy = 1e-150;
inline const double kLogRescale = std::log(kRescaleBy);

/// Coefficients of the normalized three-term recurrence
/// psi_{k+1} = a_k t psi_k - b_k psi_{k-1},  a_k = sqrt(2/(k+1)), b_k = sqrt(k/(k+1)).
struct HermiteCoefficients {
  std::vector<double> a, b;
  explicit HermiteCoefficients(int n) : a(n), b(n) {
    for (int k = 0; k < n; ++k) {
      a[k] = std::sqrt(2.0 / (k + 1));
      b[k] = std::sqrt(double(k) / (k + 1));
    }
  }
};

inline void check_degree(int n) {
  if (n < 0 || n > kMaxHermiteDegree)
    throw DomainError("Hermite degree must lie in [0, 1e6], got " + std::to_string(n));
}

/// psi_n(t) with psi_0 = pi^{-1/4} e^{-t^2/2}, run in (mantissa, log-scale) form so
/// that the Gaussian factor never underflows during the recurrence.
inline double hermite_psi(const HermiteCoefficients& c, int n, double t) {
  double prev = 0.0;
  double cur = std::pow(std::numbers::pi, -0.25);
  double log_scale = -0.5 * t * t;
  for (int k = 0; k < n; ++k) {
    const double next = c.a[k] * t * cur - c.b[k] * prev;
    prev = cur;
    cur = next;
    if (std::abs(cur) > kRescaleAbove) {
      cur *= kRescaleBy;
      prev *= kRescaleBy;
      log_scale -= kLogRescale;
    }
  }
  if (cur == 0.0) return 0.0;
  const double log_abs = std::log(std::abs(cur)) + log_scale;
  if (log_abs > 700.0)
    throw DomainError("Hermite function overflow at t = " + std::to_string(t));
  return std::copysign(std::exp(log_abs), cur);  // underflows to 0 deep in the forbidden region
}

}  // namespace detail

/// Normalized Hermite function psi_n(t) of -d^2/dt^2 + t^2 (eigenvalue 2n+1).
inline double hermite_psi(int n, double t) {
  detail::check_degree(n);
  if (!std::isfinite(t)) throw DomainError("Hermite function at non-finite argument");
  return detail::hermite_psi(detail::HermiteCoefficients(n), n, t);
}

/// phi_n(x) = h^{-1/4} psi_n(x / sqrt(h)), eigenfunction of -h^2 d^2/dx^2 + x^2 for (2n+1)h.
inline double hermite_function(int n, double h, double x) {
  if (!(h > 0.0)) throw DomainError("hermite_function needs h > 0");
  return std::pow(h, -0.25) * hermite_psi(n, x / std::sqrt(h));
}

struct HermiteEval {
  int n = 0;
  double h = 0.0;
  ScalarField field;

  double eigenvalue() const { return (2.0 * n + 1.0) * h; }
};

/// phi_n sampled on a 1D grid.
inline HermiteEval hermite(int n, double h, const GridPtr& grid) {
  detail::check_degree(n);
  if (!(h > 0.0)) throw DomainError("hermite needs h > 0");
  if (grid->dim() != 1) throw DomainError("hermite samples on 1D grids; use products in 2D");
  const detail::HermiteCoefficients c(n);
  const double pre = std::pow(h, -0.25), inv_sqrt_h = 1.0 / std::sqrt(h);
  Eigen::VectorXd v(grid->size());
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    const double x = grid->point(k)[0];
    v[k] = pre * detail::hermite_psi(c, n, x * inv_sqrt_h);
    if (!std::isfinite(v[k]))
      throw DomainError("Hermite function not finite at x = " + std::to_string(x));
  }
  return {n, h, ScalarField(grid, std::move(v))};
}

/// Rows k = 0..n_max of phi_k(x_j) for the given abscissae (one recurrence per x).
inline Eigen::MatrixXd hermite_table(int n_max, double h, std::span<const double> xs) {
  detail::check_degree(n_max);
  if (!(h > 0.0)) throw DomainError("hermite_table needs h > 0");
  const detail::HermiteCoefficients c(n_max);
  const double pre = std::pow(h, -0.25), inv_sqrt_h = 1.0 / std::sqrt(h);
  Eigen::MatrixXd table(n_max + 1, static_cast<Eigen::Index>(xs.size()));
  for (std::size_t j = 0; j < xs.size(); ++j) {
    const double t = xs[j] * inv_sqrt_h;
    double log_scale = -0.5 * t * t + std::log(pre);
    double factor = std::exp(log_scale);
    double prev = 0.0, cur = std::pow(std::numbers::pi, -0.25);
    table(0, j) = cur * factor;
    for (int k = 0; k < n_max; ++k) {
      const double next = c.a[k] * t * cur - c.b[k] * prev;
      prev = cur;
      cur = next;
      if (std::abs(cur) > detail::kRescaleAbove) {
        cur *= detail::kRescaleBy;
        prev *= detail::kRescaleBy;
        log_scale -= detail::kLogRescale;
        factor = std::exp(log_scale);
      }
      table(k + 1, j) = cur * factor;
    }
  }
  return table;
}

// ---------------------------------------------------------------------------
// Airy function

namespace detail {

inline constexpr double kAirySeam = 6.0;

// Ai(0) = 3^{-2/3}/Gamma(2/3), -Ai'(0) = 3^{-1/3}/Gamma(1/3)
inline constexpr long double kAi0 = 0.355028053887817239260063186004183176L;
inline constexpr long double kAiP0 = 0.258819403792806798405183560189203963L;

inline double airy_series(double x) {
  using R = long double;
  const R xl = x, x3 = xl * xl * xl;
  R f = 1.0L, g = xl;
  R tf = 1.0L, tg = xl;
  for (int k = 1; k < 200; ++k) {
    tf *= x3 / (R(3 * k - 1) * R(3 * k));
    tg *= x3 / (R(3 * k) * R(3 * k + 1));
    f += tf;
    g += tg;
    if (std::abs(tf) + std::abs(tg) < 1e-22L * (std::abs(f) + std::abs(g))) break;
  }
  return static_cast<double>(kAi0 * f - kAiP0 * g);
}

/// u_k of the Airy asymptotic series: u_0 = 1,
/// u_k = (6k-5)(6k-3)(6k-1) / ((2k-1) 216 k) u_{k-1}.
inline const std::array<double, 64>& airy_u() {
  static const std::array<double, 64> u = [] {
    std::array<double, 64> out{};
    out[0] = 1.0;
    for (int k = 1; k < 64; ++k)
      out[k] = out[k - 1] * (6.0 * k - 5) * (6.0 * k - 3) * (6.0 * k - 1) /
               ((2.0 * k - 1) * 216.0 * k);
    return out;
  }();
  return u;
}

// Sum of (-1)^j u_k z^{-k} over k = first + j step, truncated just
// before the terms start to grow (optimal truncation), and never before 6 terms.
inline double airy_asymptotic_sum(double z, int first, int step) {
  const auto& u = airy_u();
  double sum = 0.0, last = std::numeric_limits<double>::infinity();
  int used = 0;
  for (int k = first; k < 64; k += step, ++used) {
    const double term = u[k] * std::pow(z, -k);
    if (used >= 6 && (term > last || term < 1e-17 * std::abs(sum))) break;
    sum += (used % 2 == 0 ? 1.0 : -1.0) * term;
    last = term;
  }
  return sum;
}

}  // namespace detail

/// Ai(x): Maclaurin series (in extended precision) for |x| <= 6, asymptotic
/// expansions beyond.
inline double airy(double x) {
  if (!std::isfinite(x) || std::abs(x) > 1e4)
    throw DomainError("airy: argument out of the supported range |x| <= 1e4");
  if (std::abs(x) <= detail::kAirySeam) return detail::airy_series(x);
  const double pi = std::numbers::pi;
  if (x > 0.0) {
    const double z = 2.0 / 3.0 * x * std::sqrt(x);
    const double s = detail::airy_asymptotic_sum(z, 0, 1);
    return std::exp(-z) / (2.0 * std::sqrt(pi) * std::pow(x, 0.25)) * s;
  }
  const double y = -x;
  const double z = 2.0 / 3.0 * y * std::sqrt(y);
  const double P = detail::airy_asymptotic_sum(z, 0, 2);
  const double Q = detail::airy_asymptotic_sum(z, 1, 2);
  const double th = z + pi / 4.0;
  return (std::sin(th) * P - std::cos(th) * Q) / (std::sqrt(pi) * std::pow(y, 0.25));
}

// ---------------------------------------------------------------------------
// Liouville-Green phase and the uniform turning-point profile

/// zeta(x) for the turning point at x = 1 of t^2 - 1 (x >= 0; the caller mirrors
/// negative x). Uses sqrt|t^2 - 1| on both sides; zeta < 0 on [0, 1), zeta(1) = 0.
inline double lg_phase_zeta(double x) {
  if (!(x >= 0.0)) throw DomainError("lg_phase_zeta is defined for x >= 0 (mirror negative x)");
  if (x == 1.0) return 0.0;
  if (x > 1.0) {
    const double r = std::sqrt(x * x - 1.0);
    const double integral = 0.5 * (x * r - std::log(x + r));
    return std::cbrt(std::pow(1.5 * integral, 2.0));
  }
  const double r = std::sqrt(1.0 - x * x);
  const double integral = 0.5 * (std::acos(x) - x * r);
  return -std::cbrt(std::pow(1.5 * integral, 2.0));
}

/// (zeta(x) / (x^2 - 1))^{1/4}, continuous through x = 1 where it equals 2^{-1/6}.
inline double lg_amplitude(double x) {
  const double s = x - 1.0;
  if (std::abs(s) < 1e-3) {
    // zeta = 2^{1/3} s (1 + s/10 - 2 s^2/175 + O(s^3)), x^2 - 1 = s (2 + s)
    const double ratio =
        std::pow(2.0, -2.0 / 3.0) * (1.0 + s / 10.0 - 2.0 * s * s / 175.0) / (1.0 + 0.5 * s);
    return std::pow(ratio, 0.25);
  }
  return std::pow(lg_phase_zeta(x) / (x * x - 1.0), 0.25);
}

/// Unnormalized profile h^{-1/6} (zeta/(x^2-1))^{1/4} Ai(h^{-2/3} zeta(|x|)).
inline double airy_profile_value(double h, double x) {
  const double ax = std::abs(x);
  const double arg = std::pow(h, -2.0 / 3.0) * lg_phase_zeta(ax);
  if (arg > 1e4) return 0.0;
  return std::pow(h, -1.0 / 6.0) * lg_amplitude(ax) * airy(std::max(arg, -1e4));
}

/// Leading-order turning-point profile of the energy-1 eigenfunction, even in x,
/// scaled to unit trapezoid L2 norm on the grid.
inline ScalarField airy_profile(double h, const GridPtr& grid) {
  if (!(h > 0.0)) throw DomainError("airy_profile needs h > 0");
  if (grid->dim() != 1) throw DomainError("airy_profile lives on 1D grids");
  auto f = ScalarField::sample(grid, [h](const Point& p) { return airy_profile_value(h, p[0]); });
  const double n2 = lq_norm(f, 2.0);
  if (!(n2 > 0.0)) throw DomainError("airy_profile vanishes on this grid");
  f.values /= n2;
  return f;
}

}  // namespace semiclass
