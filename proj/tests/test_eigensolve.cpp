#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "semiclass/eigensolve.hpp"
#include "semiclass/experiments.hpp"

using namespace semiclass;

namespace {

GridPtr harmonic_line(double h, double X = 2.0) { return experiments::symmetric_line(X, h / 8.0); }

// Dense reference spectrum of the 1D finite-difference operator.
Eigen::VectorXd dense_spectrum(const DiscreteOperator& P) {
  const auto [diag, off] = P.tridiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, off, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace

TEST(SolveWindow, SingleLevelH003) {
  const double h = 0.03;
  const auto P = discretize(potential::Harmonic{}, harmonic_line(h), h);
  const auto c = solve_window(P, 1.0, 0.03);
  ASSERT_EQ(c.rank(), 1);
  EXPECT_NEAR(c.eigenvalues[0], 33 * 0.03, 1e-3);
  EXPECT_LE(c.residuals[0], c.tolerance);
  EXPECT_LE(c.tolerance, 1e-8 * P.norm_estimate() * (1 + 1e-12));
  EXPECT_NEAR(lq_norm(c.eigenvector(0), 2.0), 1.0, 1e-12);
}

TEST(SolveWindow, EigenvalueOnWindowEdgeIsIncluded) {
  const double h = 0.01;
  const auto P = discretize(potential::Harmonic{}, harmonic_line(h), h);
  const double lam = nearest_eigenvalue_1d(P, 1.01);
  EXPECT_NEAR(lam, 1.01, 1e-3);
  const auto upper = solve_window(P, lam - 0.01, 0.01);
  const auto lower = solve_window(P, lam + 0.01, 0.01);
  const auto contains = [lam](const SpectralCluster& c) {
    for (double l : c.eigenvalues)
      if (std::abs(l - lam) < 1e-12) return true;
    return false;
  };
  EXPECT_TRUE(contains(upper));
  EXPECT_TRUE(contains(lower));
  // The window [0.99, 1.01] holds the level at 1.01 (discretization lowers it)
  const auto c = solve_window(P, 1.0, 0.01);
  EXPECT_GE(c.rank(), 1);
  EXPECT_LE(c.rank(), 2);
}

TEST(SolveWindow, EmptyWindowIsNotAnError) {
  const double h = 0.004;
  const auto P = discretize(potential::Harmonic{}, harmonic_line(h, 1.2), h);
  SpectralCluster c;
  // levels (2n+1) 0.004 near here: 0.500, 0.508; 0.5 itself is a level
  EXPECT_NO_THROW(c = solve_window(P, 0.504, 0.001));
  EXPECT_TRUE(c.empty());
  EXPECT_EQ(c.vectors.cols(), 0);
  EXPECT_EQ(solve_window(P, 0.5, 0.001).rank(), 1);
  EXPECT_THROW(solve_window(P, 0.5, 0.0), DomainError);
}

TEST(SolveWindow, MatchesDenseOracleAtN2048) {
  const double h = 0.05;
  const auto g = make_grid(Grid::line(-2.5, 2.5, 2048));
  const auto P = discretize(potential::Harmonic{}, g, h);
  const Eigen::VectorXd ref = dense_spectrum(P);
  for (auto [E, w] : {std::pair{1.0, 0.3}, std::pair{0.5, 0.05}, std::pair{2.0, 0.7}}) {
    const auto c = solve_window(P, E, w);
    std::vector<double> expected;
    for (double l : ref)
      if (l >= E - w && l <= E + w) expected.push_back(l);
    ASSERT_EQ(static_cast<std::size_t>(c.rank()), expected.size()) << "E=" << E;
    for (std::size_t j = 0; j < expected.size(); ++j) EXPECT_NEAR(c.eigenvalues[j], expected[j], 1e-10);
    // and the exact spectrum (2n+1)h: same count, values within the discretization error
    long exact = 0;
    for (int n = 0; n < 1000; ++n) exact += std::abs((2 * n + 1) * h - E) <= w;
    EXPECT_EQ(c.rank(), exact);
    for (double l : c.eigenvalues) {
      const double n = std::round((l / h - 1) / 2);
      EXPECT_NEAR(l, (2 * n + 1) * h, 1e-3);
    }
    EXPECT_LT((c.gram() - Eigen::MatrixXd::Identity(c.rank(), c.rank())).cwiseAbs().maxCoeff(), 1e-10);
    for (double r : c.residuals) EXPECT_LE(r, c.tolerance);
  }
}

TEST(SolveWindow, SturmCountsMatchDenseOracle) {
  const double h = 0.02;
  const auto g = make_grid(Grid::line(-2.0, 2.0, 1201));
  const auto P = discretize(potential::DoubleWell{}, g, h);
  const Eigen::VectorXd ref = dense_spectrum(P);
  for (auto [a, b] : {std::pair{0.0, 0.3}, std::pair{0.5, 1.5}, std::pair{0.99, 1.0}}) {
    const long expected = (ref.array() >= a && ref.array() <= b).count();
    EXPECT_EQ(count_eigenvalues_1d(P, a, b), expected);
  }
  Eigen::Index i = 0;
  (ref.array() - 0.5).abs().minCoeff(&i);
  EXPECT_NEAR(nearest_eigenvalue_1d(P, 0.5), ref[i], 1e-12);
}

TEST(SolveWindow, WeylRatioIsLoggedAndReasonable) {
  const double h = 0.01;
  const auto P = discretize(potential::Harmonic{}, harmonic_line(h), h);
  const auto c = solve_window(P, 1.0, 0.2);
  bool found = false;
  for (const auto& n : c.diagnostics.notes) {
    double ratio = 0.0;
    const auto pos = n.find("ratio ");
    if (n.rfind("weyl:", 0) == 0 && pos != std::string::npos) {
      ratio = std::stod(n.substr(pos + 6));
      EXPECT_LT(std::abs(ratio - 1.0), 0.5) << n;
      found = true;
    }
  }
  EXPECT_TRUE(found);
}

TEST(SolveWindow, TwoDimensionalMatchesProductEigenvectors) {
  // The 2D operator is the Kronecker sum of two copies of the 1D operator, so its
  // eigenvectors in the window are spanned by products of 1D eigenvectors.
  const double h = 0.1;
  const auto g1 = make_grid(Grid::line(-2.5, 2.5, 105));
  const auto g2 = make_grid(Grid::square(-2.5, 2.5, 105));
  const auto P1 = discretize(potential::Harmonic{}, g1, h);
  const auto P2 = discretize(potential::Harmonic{}, g2, h);
  const double E = 1.0, w = h;
  const auto c2 = solve_window(P2, E, w);
  const auto c1 = solve_window(P1, 0.6, 0.6);

  std::vector<std::pair<int, int>> pairs;
  for (int a = 0; a < c1.rank(); ++a)
    for (int b = 0; b < c1.rank(); ++b) {
      const double l = c1.eigenvalues[a] + c1.eigenvalues[b];
      if (l >= E - w && l <= E + w) pairs.emplace_back(a, b);
    }
  ASSERT_EQ(static_cast<std::size_t>(c2.rank()), pairs.size());
  EXPECT_EQ(c2.rank(), 5);

  Eigen::MatrixXd W(g2->size(), static_cast<Eigen::Index>(pairs.size()));
  for (std::size_t s = 0; s < pairs.size(); ++s)
    for (Eigen::Index k = 0; k < g2->size(); ++k) {
      const auto [i, j] = g2->multi_index(k);
      W(k, static_cast<Eigen::Index>(s)) = c1.vectors(i, pairs[s].first) * c1.vectors(j, pairs[s].second);
    }
  const Eigen::MatrixXd Q1 = Eigen::HouseholderQR<Eigen::MatrixXd>(c2.vectors).householderQ() *
                             Eigen::MatrixXd::Identity(g2->size(), c2.rank());
  const Eigen::MatrixXd Q2 = Eigen::HouseholderQR<Eigen::MatrixXd>(W).householderQ() *
                             Eigen::MatrixXd::Identity(g2->size(), W.cols());
  const Eigen::VectorXd cosines = Eigen::JacobiSVD<Eigen::MatrixXd>(Q1.transpose() * Q2).singularValues();
  const double max_angle = std::acos(std::min(1.0, cosines.minCoeff()));
  EXPECT_LE(max_angle, 1e-4);
  EXPECT_LT((c2.gram() - Eigen::MatrixXd::Identity(c2.rank(), c2.rank())).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(AnalyticCluster, OneDimensionalSingleState) {
  const int n = 100;
  const double h = 1.0 / (2 * n + 1);
  const auto g = experiments::symmetric_line(1.6, h / 6);
  const auto c = analytic_cluster(1, 1.0, h, g);
  ASSERT_EQ(c.rank(), 1);
  EXPECT_NEAR(c.eigenvalues[0], 1.0, 1e-14);
  EXPECT_NEAR(c.gram()(0, 0), 1.0, 1e-10);
}

TEST(AnalyticCluster, TwoDimensionalFullLevel) {
  const int k = 20;
  const double h = 1.0 / (2 * (k + 1));
  const auto g = experiments::symmetric_square(1.7, h / 4);
  const auto c = analytic_cluster(2, 1.0, h, g);
  ASSERT_EQ(c.rank(), k + 1);
  for (double l : c.eigenvalues) EXPECT_NEAR(l, 1.0, 1e-14);
  EXPECT_LT((c.gram() - Eigen::MatrixXd::Identity(k + 1, k + 1)).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_TRUE(c.diagnostics.warnings.empty());

  const SeparableCluster2D s(1.0, h, g);
  ASSERT_EQ(s.rank(), k + 1);
  EXPECT_LT((s.gram() - c.gram()).cwiseAbs().maxCoeff(), 1e-12);
  const std::vector<double> ones(k + 1, 1.0);
  EXPECT_LT((s.density(ones).values - c.density(ones).values).cwiseAbs().maxCoeff(),
            1e-10 * c.density(ones).values.maxCoeff());
  const Eigen::Index mid = g->index(g->axis(0).n / 3, g->axis(1).n / 2);
  EXPECT_LT((s.kernel_row(mid).values - c.kernel_row(mid).values).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(AnalyticCluster, RankGrowsLikeInverseH) {
  for (int k : {8, 16, 32, 64}) {
    const double h = 1.0 / (2 * (k + 1));
    EXPECT_EQ(static_cast<int>(oscillator_states(2, 1.0, h, h).size()), k + 1);
  }
}

TEST(AnalyticCluster, NoLevelInWindow) {
  const auto g = experiments::symmetric_line(2.0, 0.001);
  // levels (2n+1) 0.004: 0.500, 0.508
  EXPECT_THROW(analytic_cluster(1, 0.504, 0.004, g, 0.001), DomainError);
  EXPECT_EQ(analytic_cluster(1, 0.5, 0.004, g, 0.001).rank(), 1);
  EXPECT_THROW(analytic_cluster(2, 1.0, 0.1, g), GridMismatch);
}

TEST(AnalyticCluster, AgreesWithSolverUpToDiscretization) {
  const int n = 20;
  const double h = 1.0 / (2 * n + 1);
  const auto g = experiments::symmetric_line(2.0, h / 40);
  const auto exact = analytic_cluster(1, 1.0, h, g);
  const auto P = discretize(potential::Harmonic{}, g, h);
  const auto c = solve_window(P, 1.0, h);
  ASSERT_EQ(c.rank(), 1);
  const double overlap = std::abs(inner(c.eigenvector(0), exact.eigenvector(0)));
  // angle = O((dx/h)^2) from the second-order discretization
  EXPECT_LE(std::acos(std::min(1.0, overlap)), 1e-3);
}

TEST(Serialization, EigenvaluesCsvAndBinary) {
  const double h = 0.03;
  const auto P = discretize(potential::Harmonic{}, harmonic_line(h), h);
  const auto c = solve_window(P, 1.0, 0.1);
  std::ostringstream os;
  write_eigenvalues_csv(os, c);
  const auto text = os.str();
  EXPECT_EQ(text.rfind("index,eigenvalue,residual\n", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), c.rank() + 1);

  const auto path = (std::filesystem::temp_directory_path() / "semiclass_vectors.bin").string();
  write_eigenvectors_binary(path, c);
  std::ifstream in(path, std::ios::binary);
  std::string header;
  std::getline(in, header);
  EXPECT_NE(header.find("\"rows\":" + std::to_string(c.vectors.rows())), std::string::npos);
  Eigen::MatrixXd back(c.vectors.rows(), c.vectors.cols());
  in.read(reinterpret_cast<char*>(back.data()), static_cast<std::streamsize>(sizeof(double) * back.size()));
  EXPECT_TRUE(in.good());
  EXPECT_EQ(back, c.vectors);
  std::filesystem::remove(path);
}
