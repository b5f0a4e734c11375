#include <cmath>
#include <memory>
#include <random>
#include <sstream>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "semiclass/density.hpp"
#include "semiclass/experiments.hpp"

using namespace semiclass;

namespace {

Eigen::MatrixXd random_orthogonal(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N;
  Eigen::MatrixXd A(n, n);
  for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = N(rng);
  return Eigen::HouseholderQR<Eigen::MatrixXd>(A).householderQ();
}

std::shared_ptr<const SpectralCluster> level_2d(int k) {
  const double h = 1.0 / (2 * (k + 1));
  const auto g = experiments::symmetric_square(1.7, h / 4);
  return std::make_shared<const SpectralCluster>(analytic_cluster(2, 1.0, h, g));
}

std::shared_ptr<const SpectralCluster> solved_1d(double h, double E, double w) {
  const auto g = experiments::symmetric_line(2.0, h / 8);
  return std::make_shared<const SpectralCluster>(solve_window(discretize(potential::Harmonic{}, g, h), E, w));
}

std::vector<double> random_weights(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 2.0);
  std::vector<double> w(n);
  for (auto& x : w) x = U(rng);
  return w;
}

}  // namespace

TEST(Density, ZeroWeightsGiveZeroField) {
  const auto c = solved_1d(0.02, 1.0, 0.1);
  const DensityMatrixRep g(c, std::vector<double>(c->rank(), 0.0));
  EXPECT_EQ(density(g).values.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Density, RankOneIntegratesToOne) {
  const auto c = solved_1d(0.03, 1.0, 0.03);
  ASSERT_EQ(c->rank(), 1);
  const auto g = DensityMatrixRep::projector(c);
  EXPECT_NEAR(lq_norm(density(g), 1.0), 1.0, 1e-8);
  EXPECT_NEAR(density_lq(g, kInf, Region::full(c->grid)), std::pow(lq_norm(c->eigenvector(0), kInf), 2), 1e-12);
}

TEST(Density, TraceConsistency) {
  const auto c = solved_1d(0.01, 1.0, 0.2);
  const auto w = random_weights(static_cast<std::size_t>(c->rank()), 3);
  const DensityMatrixRep g(c, w);
  double trace = 0.0;
  for (double x : w) trace += x;
  EXPECT_NEAR(density_lq(g, 2.0, Region::full(c->grid)), trace, 1e-8 * trace);
  EXPECT_GE(density(g).values.minCoeff(), 0.0);
}

TEST(Density, RejectsInvalidWeights) {
  const auto c = solved_1d(0.03, 1.0, 0.03);
  EXPECT_THROW(DensityMatrixRep(c, {-1.0}), DomainError);
  EXPECT_THROW(DensityMatrixRep(c, {1.0, 1.0}), DomainError);
  const auto g = DensityMatrixRep::projector(c);
  EXPECT_THROW(density_lq(g, 1.5, Region::full(c->grid)), DomainError);
}

TEST(Density, RadialSymmetryOfFullLevel) {
  const auto c = level_2d(12);
  const auto rho = density(DensityMatrixRep::projector(c));
  const int n = c->grid->axis(0).n;
  const double sup = rho.values.maxCoeff();
  double dev = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      dev = std::max(dev, std::abs(rho.values[c->grid->index(i, j)] - rho.values[c->grid->index(n - 1 - j, i)]));
  EXPECT_LE(dev, 1e-6 * sup);
}

TEST(Schatten, Examples) {
  EXPECT_NEAR(schatten_norm(std::vector<double>{3.0, 4.0}, 2.0), 5.0, 1e-14);
  const std::vector<double> ones(9, 1.0);
  for (double a : {1.0, 2.0, 3.0, 7.5}) EXPECT_NEAR(schatten_norm(ones, a), std::pow(9.0, 1.0 / a), 1e-13);
  EXPECT_EQ(schatten_norm(ones, kInf), 1.0);
  EXPECT_EQ(schatten_norm(std::vector<double>{0.0, 0.0}, 2.0), 0.0);
  EXPECT_THROW(schatten_norm(ones, 0.5), DomainError);
  EXPECT_NEAR(schatten_norm(std::vector<double>{1e300, 1e300}, 2.0), std::sqrt(2.0) * 1e300, 1e286);
}

TEST(Schatten, ProjectorTraceIsRank) {
  const auto c = level_2d(10);
  EXPECT_NEAR(schatten_norm(DensityMatrixRep::projector(c), 1.0), 11.0, 1e-14);
}

TEST(WeightedSchatten, Examples) {
  const auto c = level_2d(6);
  const auto g = DensityMatrixRep::projector(c);
  for (double a : {1.0, 2.0, kInf})
    EXPECT_NEAR(weighted_schatten_norm(g, 1.0, c->h, a), schatten_norm(g, a), 1e-12);

  SpectralCluster one = *solved_1d(0.03, 1.0, 0.03);
  one.eigenvalues[0] = one.E + one.h;
  const DensityMatrixRep g1(std::make_shared<const SpectralCluster>(one), {1.0});
  EXPECT_NEAR(weighted_schatten_norm(g1, one.E, one.h, 1.0), 2.0, 1e-14);
}

TEST(WeightedSchatten, SandwichLemma) {
  const auto c = solved_1d(0.01, 1.0, 0.3);
  const double E = 1.0, h = c->h;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto w = random_weights(static_cast<std::size_t>(c->rank()), seed);
    const DensityMatrixRep g(c, w);
    std::vector<double> middle(w.size());
    for (std::size_t j = 0; j < w.size(); ++j) {
      const double r = (c->eigenvalues[j] - E) / h;
      middle[j] = w[j] * r * r;
    }
    for (double a : {1.0, 1.5, 2.0, 4.0, kInf}) {
      const double s = schatten_norm(g, a);
      const double mid = s + schatten_norm(middle, a);
      EXPECT_LE(s, mid);
      EXPECT_LE(mid, 2.0 * weighted_schatten_norm(g, E, h, a) * (1 + 1e-14));
    }
  }
}

TEST(DensityInvariants, BasisIndependence) {
  const auto c = level_2d(16);
  const auto g = DensityMatrixRep::projector(c);
  SpectralCluster mixed = *c;
  mixed.vectors = c->vectors * random_orthogonal(c->rank(), 99);
  const auto gm = DensityMatrixRep::projector(std::make_shared<const SpectralCluster>(mixed));
  const auto V = sample_potential(potential::Harmonic{}, c->grid);
  const auto bulk = region_by_potential(V, 1.0, 0.25, RegionKind::Bulk);
  for (double q : {2.0, 4.0, 6.0, kInf}) {
    const double a = density_lq(g, q, bulk), b = density_lq(gm, q, bulk);
    EXPECT_NEAR(a / b, 1.0, 1e-8) << q;
  }
  EXPECT_LE((density(g).values - density(gm).values).cwiseAbs().maxCoeff(), 1e-8 * density(g).values.maxCoeff());
  EXPECT_EQ(schatten_norm(g, 2.0), schatten_norm(gm, 2.0));
}

TEST(DensityInvariants, TriangleComparison) {
  const auto c = solved_1d(0.01, 1.0, 0.15);
  const Region all = Region::full(c->grid);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto w = random_weights(static_cast<std::size_t>(c->rank()), seed);
    const DensityMatrixRep g(c, w);
    for (double q : {2.0, 3.0, 6.0, kInf}) {
      double bound = 0.0;
      for (Eigen::Index j = 0; j < c->rank(); ++j) bound += w[j] * std::pow(lq_norm(c->eigenvector(j), q), 2);
      EXPECT_LE(density_lq(g, q, all), bound * (1 + 1e-12));
    }
  }
}

TEST(DensityInvariants, HolderChainOnRegionNormalizedNorms) {
  const auto c = solved_1d(0.01, 1.0, 0.15);
  const auto rho = density(DensityMatrixRep(c, random_weights(static_cast<std::size_t>(c->rank()), 5)));
  const auto V = sample_potential(potential::Harmonic{}, c->grid);
  const auto bulk = region_by_potential(V, 1.0, 0.25, RegionKind::Bulk);
  const auto one = ScalarField::sample(c->grid, [](const Point&) { return 1.0; });
  const double vol = lq_norm(one, 1.0, bulk);
  double prev = 0.0;
  for (double p : {1.0, 1.5, 2.0, 3.0, 5.0, kInf}) {
    const double v = lq_norm(rho, p, bulk) * (std::isinf(p) ? 1.0 : std::pow(vol, -1.0 / p));
    EXPECT_GE(v, prev * (1 - 1e-12));
    prev = v;
  }
}

TEST(Density, NormTableCsv) {
  std::vector<NormRow> rows{{2.0, "bulk", 1.5}, {kInf, "R^d", 3.25}};
  std::ostringstream os;
  write_norm_table_csv(os, rows);
  EXPECT_EQ(os.str(), "q,region,value\n2,bulk,1.5\ninf,R^d,3.25\n");
}
