#pragma once

// Density matrices gamma = sum_j lambda_j |u_j><u_j| diagonal in a cluster's
// eigenbasis: densities rho_gamma, Schatten norms and L^{q/2} norms of rho_gamma.

#include <cmath>
#include <cstdio>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "semiclass/eigensolve.hpp"
#include "semiclass/error.hpp"
#include "semiclass/grid.hpp"

namespace semiclass {

inline const std::vector<double>& cluster_eigenvalues(const SpectralCluster& c) {
  return c.eigenvalues;
}
inline std::vector<double> cluster_eigenvalues(const SeparableCluster2D& c) {
  return c.eigenvalues();
}

/// Nonnegative weights over the eigenpairs of `Cluster` (SpectralCluster or
/// SeparableCluster2D). Pi_h itself is the all-ones weight vector.
template <class Cluster>
struct DensityMatrix {
  std::shared_ptr<const Cluster> cluster;
  std::vector<double> weights;

  DensityMatrix(std::shared_ptr<const Cluster> c, std::vector<double> w)
      : cluster(std::move(c)), weights(std::move(w)) {
    if (!cluster) throw DomainError("density matrix without cluster");
    if (static_cast<Eigen::Index>(weights.size()) != cluster->rank())
      throw DomainError("density matrix: one weight per eigenpair required");
    for (double x : weights)
      if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("density matrix weights must be finite and >= 0");
  }

  static DensityMatrix projector(std::shared_ptr<const Cluster> c) {
    const auto r = static_cast<std::size_t>(c->rank());
    return DensityMatrix(std::move(c), std::vector<double>(r, 1.0));
  }

  Eigen::Index rank() const { return cluster->rank(); }
};

using DensityMatrixRep = DensityMatrix<SpectralCluster>;

/// rho_gamma = sum_j lambda_j |u_j|^2
template <class Cluster>
ScalarField density(const DensityMatrix<Cluster>& g) {
  return g.cluster->density(g.weights);
}

/// l^alpha norm of the weights (max for alpha = inf), scaled to avoid overflow.
inline double schatten_norm(std::span<const double> weights, double alpha) {
  if (!(alpha >= 1.0)) throw DomainError("Schatten exponent must be >= 1");
  double m = 0.0;
  for (double x : weights) m = std::max(m, std::abs(x));
  if (m == 0.0 || std::isinf(alpha)) return m;
  std::vector<double> terms;
  terms.reserve(weights.size());
  for (double x : weights) terms.push_back(std::pow(std::abs(x) / m, alpha));
  return m * std::pow(pairwise_sum(terms), 1.0 / alpha);
}

template <class Cluster>
double schatten_norm(const DensityMatrix<Cluster>& g, double alpha) {
  return schatten_norm(g.weights, alpha);
}

/// ||(1 + (P - E)^2/h^2)^{1/2} gamma (1 + (P - E)^2/h^2)^{1/2}||_alpha; gamma commutes
/// with P, so this is the l^alpha norm of lambda_j (1 + (mu_j - E)^2 / h^2).
template <class Cluster>
double weighted_schatten_norm(const DensityMatrix<Cluster>& g, double E, double h, double alpha) {
  if (!(h > 0.0)) throw DomainError("weighted_schatten_norm needs h > 0");
  const auto& mu = cluster_eigenvalues(*g.cluster);
  std::vector<double> w(g.weights.size());
  for (std::size_t j = 0; j < w.size(); ++j) {
    const double r = (mu[j] - E) / h;
    w[j] = g.weights[j] * (1.0 + r * r);
  }
  return schatten_norm(w, alpha);
}

/// ||rho_gamma||_{L^{q/2}(region)}
template <class Cluster>
double density_lq(const DensityMatrix<Cluster>& g, double q, const Region& region,
                  Diagnostics* diag = nullptr) {
  if (!(q >= 2.0)) throw DomainError("density_lq needs q >= 2");
  return lq_norm(density(g), q / 2.0, region, diag);
}

struct NormRow {
  double q = 2.0;
  std::string region;
  double value = 0.0;
};

/// CSV with columns q, region, value (q = inf printed as "inf").
inline void write_norm_table_csv(std::ostream& os, std::span<const NormRow> rows) {
  os << "q,region,value\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.12g,%s,%.12g\n", r.q, r.region.c_str(), r.value);
    os << buf;
  }
}

}  // namespace semiclass
