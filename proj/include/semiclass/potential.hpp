#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "semiclass/error.hpp"
#include "semiclass/grid.hpp"

namespace semiclass {

namespace potential {

/// |x|^2
struct Harmonic {};

/// (1/2) <x - x0, H (x - x0)>, so that the Hessian is H.
struct Quadratic {
  Eigen::MatrixXd H;
  Eigen::VectorXd x0;
};

/// |x|^4
struct Quartic {};

/// (x_1^2 - 1)^2 + |x'|^2
struct DoubleWell {};

/// sum_i sum_k c_k x_i^k, the same one-dimensional polynomial on every axis.
struct Polynomial {
  std::vector<double> coefficients;  ///< c_0, c_1, ...
};

}  // namespace potential

using PotentialSpec = std::variant<potential::Harmonic, potential::Quadratic,
                                   potential::Quartic, potential::DoubleWell,
                                   potential::Polynomial>;

inline std::string potential_name(const PotentialSpec& v) {
  struct {
    std::string operator()(const potential::Harmonic&) const { return "harmonic"; }
    std::string operator()(const potential::Quadratic&) const { return "quadratic"; }
    std::string operator()(const potential::Quartic&) const { return "quartic"; }
    std::string operator()(const potential::DoubleWell&) const { return "double_well"; }
    std::string operator()(const potential::Polynomial&) const { return "polynomial"; }
  } name;
  return std::visit(name, v);
}

/// Rejects Quadratic specs whose H is not symmetric positive definite and
/// Polynomial specs that are not confining.
inline void validate(const PotentialSpec& v, int d) {
  if (const auto* q = std::get_if<potential::Quadratic>(&v)) {
    if (q->H.rows() != d || q->H.cols() != d || q->x0.size() != d)
      throw DomainError("quadratic potential: H must be d x d and x0 of length d");
    if ((q->H - q->H.transpose()).norm() > 1e-12 * (1.0 + q->H.norm()))
      throw DomainError("quadratic potential: H is not symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(q->H);
    if (llt.info() != Eigen::Success)
      throw DomainError("quadratic potential: H is not positive definite");
  }
  if (const auto* p = std::get_if<potential::Polynomial>(&v)) {
    const auto& c = p->coefficients;
    if (c.size() < 3 || (c.size() - 1) % 2 != 0 || !(c.back() > 0.0))
      throw DomainError("polynomial potential must have even degree >= 2 and a positive leading coefficient");
  }
}

inline double evaluate(const PotentialSpec& v, const Point& x, int d) {
  const double r2 = d == 1 ? x[0] * x[0] : x.squaredNorm();
  struct Eval {
    const Point& x;
    int d;
    double r2;
    double operator()(const potential::Harmonic&) const { return r2; }
    double operator()(const potential::Quartic&) const { return r2 * r2; }
    double operator()(const potential::DoubleWell&) const {
      const double a = x[0] * x[0] - 1.0;
      return a * a + (d == 2 ? x[1] * x[1] : 0.0);
    }
    double operator()(const potential::Quadratic& q) const {
      Eigen::VectorXd y(d);
      for (int i = 0; i < d; ++i) y[i] = x[i] - q.x0[i];
      return 0.5 * y.dot(q.H * y);
    }
    double operator()(const potential::Polynomial& p) const {
      double s = 0.0;
      for (int i = 0; i < d; ++i) {
        double acc = 0.0;
        for (auto it = p.coefficients.rbegin(); it != p.coefficients.rend(); ++it)
          acc = acc * x[i] + *it;
        s += acc;
      }
      return s;
    }
  };
  return std::visit(Eval{x, d, r2}, v);
}

inline ScalarField sample_potential(const PotentialSpec& v, const GridPtr& grid) {
  validate(v, grid->dim());
  const int d = grid->dim();
  return ScalarField::sample(grid, [&](const Point& x) { return evaluate(v, x, d); });
}

/// Half-width L of a centred box [-L, L]^d outside of which V >= level: the
/// boundary of every larger box on the search lattice 0.25 * 1.05^k stays above
/// the level, so non-convex wells with a barrier above `level` are enclosed.
inline double confining_box(const PotentialSpec& v, int d, double level) {
  validate(v, d);
  const auto boundary_min = [&](double L) {
    double m = std::numeric_limits<double>::infinity();
    const int n = d == 1 ? 1 : 33;
    for (int a = 0; a < d; ++a)
      for (double sgn : {-1.0, 1.0})
        for (int s = 0; s < n; ++s) {
          Point p = Point::Zero();
          p[a] = sgn * L;
          if (d == 2) p[1 - a] = -L + 2.0 * L * s / (n - 1);
          m = std::min(m, evaluate(v, p, d));
        }
    return m;
  };
  // walk out until the boundary is well above the level, then back in to the
  // outermost box whose boundary dips below it
  const double far = std::max(level, 0.0) * 4.0 + 1.0;
  std::vector<double> lattice{0.25};
  while (boundary_min(lattice.back()) < far) {
    if (lattice.size() > 400) throw DomainError("potential does not appear to be confining");
    lattice.push_back(lattice.back() * 1.05);
  }
  for (std::size_t k = lattice.size(); k-- > 0;)
    if (boundary_min(lattice[k]) < level) return lattice[std::min(k + 1, lattice.size() - 1)];
  return lattice.front();
}

}  // namespace semiclass
