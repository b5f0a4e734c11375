#pragma once

// Power-law fits y(h) ~ C h^{-s} log(1/h)^t by least squares in log variables,
// and verdicts against predicted exponents.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "semiclass/error.hpp"
#include "semiclass/exponents.hpp"

namespace semiclass {

enum class FitMode { PowerOnly, PowerAndLog };

inline std::string_view to_string(FitMode m) {
  return m == FitMode::PowerOnly ? "power" : "power+log";
}

struct Sample {
  double h = 0.0;
  double y = 0.0;
};

struct ScalingFit {
  double s_hat = 0.0;
  double t_hat = 0.0;  ///< 0 for PowerOnly; the frozen value for fit_exponent_frozen_t
  double intercept = 0.0;
  double max_rel_residual = 0.0;
  int n_points = 0;
  FitMode mode = FitMode::PowerOnly;
  bool t_frozen = false;
};

/// OLS on log y = s log(1/h) [+ t log log(1/h)] + c.
inline ScalingFit fit_exponent(std::span<const Sample> samples, FitMode mode,
                               Diagnostics* diag = nullptr) {
  const int n = static_cast<int>(samples.size());
  const int need = mode == FitMode::PowerOnly ? 4 : 6;
  if (n < need)
    throw ConstraintError("fit_exponent: " + std::to_string(need) + " samples required, got " +
                          std::to_string(n));
  double hmin = kInf, hmax = 0.0;
  for (const auto& s : samples) {
    if (!(s.h > 0.0) || !(s.y > 0.0) || !std::isfinite(s.y))
      throw DomainError("fit_exponent needs h > 0 and finite y > 0");
    if (mode == FitMode::PowerAndLog && !(std::log(1.0 / s.h) > 1.0))
      throw DomainError("PowerAndLog fit needs log(1/h) > 1 for every sample");
    hmin = std::min(hmin, s.h);
    hmax = std::max(hmax, s.h);
  }
  if (hmax / hmin < 100.0) warn(diag, "fit_exponent: h spans less than two decades");

  const int p = mode == FitMode::PowerOnly ? 2 : 3;
  Eigen::MatrixXd X(n, p);
  Eigen::VectorXd Y(n);
  for (int i = 0; i < n; ++i) {
    const double L = std::log(1.0 / samples[i].h);
    X(i, 0) = L;
    X(i, 1) = 1.0;
    if (p == 3) X(i, 2) = std::log(L);
    Y[i] = std::log(samples[i].y);
  }
  // Column scaling keeps the conditioning test meaningful across h ranges.
  const Eigen::VectorXd cs = X.colwise().norm().transpose();
  const Eigen::MatrixXd Xs = X * cs.cwiseInverse().asDiagonal();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Xs, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv[p - 1] < 1e-10 * sv[0])
    throw ConstraintError("fit_exponent: degenerate design matrix (collinear regressors)");
  const Eigen::VectorXd beta = svd.solve(Y).cwiseQuotient(cs);

  ScalingFit f;
  f.mode = mode;
  f.n_points = n;
  f.s_hat = beta[0];
  f.intercept = beta[1];
  f.t_hat = p == 3 ? beta[2] : 0.0;
  const Eigen::VectorXd r = Y - X * beta;
  for (int i = 0; i < n; ++i) f.max_rel_residual = std::max(f.max_rel_residual, std::abs(std::expm1(r[i])));
  return f;
}

/// PowerOnly fit of y / log(1/h)^t: the log power is frozen at `t`.
inline ScalingFit fit_exponent_frozen_t(std::span<const Sample> samples, double t,
                                        Diagnostics* diag = nullptr) {
  std::vector<Sample> scaled(samples.begin(), samples.end());
  for (auto& s : scaled) {
    if (t != 0.0) {
      const double L = std::log(1.0 / s.h);
      if (!(L > 0.0)) throw DomainError("frozen-t fit needs h < 1");
      s.y /= std::pow(L, t);
    }
  }
  ScalingFit f = fit_exponent(scaled, FitMode::PowerOnly, diag);
  f.t_hat = t;
  f.t_frozen = true;
  return f;
}

enum class CompareMode { TwoSided, OneSided };

struct Verdict {
  std::string label;
  CompareMode mode = CompareMode::TwoSided;
  double s_hat = 0.0, s_pred = 0.0, tol_s = 0.0;
  double t_hat = 0.0, t_pred = 0.0, tol_t = 0.0;
  bool check_t = false;
  double margin_s = 0.0;  ///< <= 0 passes: |s_hat - s| - tol (two-sided) or s_hat - (s + tol)
  double margin_t = 0.0;
  bool pass_s = false;
  bool pass_t = true;

  bool pass() const { return pass_s && pass_t; }
};

/// Two-sided: |s_hat - s| <= tol_s (and |t_hat - t| <= tol_t when t was fitted).
/// One-sided (upper bounds): s_hat <= s + tol_s.
inline Verdict compare(const ScalingFit& fit, const ExponentTriple& predicted, double tol_s,
                       double tol_t, CompareMode mode = CompareMode::TwoSided,
                       std::string label = {}) {
  if (!(tol_s > 0.0) || !(tol_t > 0.0)) throw DomainError("compare: tolerances must be > 0");
  Verdict v;
  v.label = std::move(label);
  v.mode = mode;
  v.s_hat = fit.s_hat;
  v.s_pred = predicted.s;
  v.tol_s = tol_s;
  v.t_hat = fit.t_hat;
  v.t_pred = predicted.t;
  v.tol_t = tol_t;
  v.check_t = fit.mode == FitMode::PowerAndLog && !fit.t_frozen;
  if (mode == CompareMode::TwoSided) {
    v.margin_s = std::abs(fit.s_hat - predicted.s) - tol_s;
    v.margin_t = v.check_t ? std::abs(fit.t_hat - predicted.t) - tol_t : -tol_t;
  } else {
    v.margin_s = fit.s_hat - (predicted.s + tol_s);
    v.margin_t = v.check_t ? fit.t_hat - (predicted.t + tol_t) : -tol_t;
  }
  v.pass_s = v.margin_s <= 0.0;
  v.pass_t = v.margin_t <= 0.0;
  return v;
}

}  // namespace semiclass
