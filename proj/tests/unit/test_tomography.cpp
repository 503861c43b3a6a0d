#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "../support/fixtures.hpp"
#include "quadtomo/errors.hpp"
#include "quadtomo/forward_model.hpp"
#include "quadtomo/tomography.hpp"

using namespace quadtomo;
using namespace quadtomo::testing;

namespace {

MeasurementSet exactData(const CovarianceMatrix& v, const ModeBasis& basis, const ImagingModel& imaging,
                         const std::vector<double>& times, double sigma = 0.01) {
  MeasurementSet m = MeasurementSet::empty(imaging, times);
  const auto phi = predictCorrelations(v, basis, imaging, times);
  for (std::size_t i = 0; i < times.size(); ++i) {
    m.phi[i] = phi[i];
    m.stdError[i].setConstant(sigma);
    m.sampleCounts[i] = 1000;
  }
  return m;
}

// Three-mode problem whose unconstrained minimizer violates the uncertainty relation.
DesignSystem activeProblem(Rng& rng, CovarianceMatrix* lsTarget = nullptr) {
  const ModeBasis basis = scanOneModel().quenchBasis.truncated(3);
  const ImagingModel imaging;
  CovarianceMatrix v = randomFeasibleCovariance(rng, 3, 0.0);
  Eigen::MatrixXd m = v.matrix();
  m.topLeftCorner(3, 3) *= 0.3;  // squeeze phase below the Heisenberg bound
  const CovarianceMatrix target(m);
  if (lsTarget) *lsTarget = target;
  const MeasurementSet data = exactData(target, basis, imaging, {0.0, 2.0, 5.0, 9.0});
  return assembleDesignSystem(data, basis, imaging, {0, 1, 2, 3});
}

double frobeniusInner(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return (a.array() * b.array()).sum(); }

}  // namespace

TEST(ConeProjection, FeasibleInputUnchanged) {
  Rng rng(1);
  const CovarianceMatrix v = randomFeasibleCovariance(rng, 4, 0.1);
  EXPECT_EQ(projectHeisenbergCone(v.matrix()).matrix(), v.matrix());
}

// Variational inequality of the Euclidean projection onto a closed convex set:
// <X - P(X), Y - P(X)> <= 0 for every feasible Y.
TEST(ConeProjection, VariationalInequalityAndIdempotence) {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 1 + trial % 4;
    Eigen::MatrixXd x = gaussianMatrix(rng, 2 * m, 2 * m, 1.0);
    x = (0.5 * (x + x.transpose())).eval();
    const CovarianceMatrix p = projectHeisenbergCone(x);
    EXPECT_GE(p.feasibilityMargin(), -1e-9);
    for (int k = 0; k < 20; ++k) {
      const CovarianceMatrix y = randomFeasibleCovariance(rng, m);
      const double scale = (x - p.matrix()).norm() * (y.matrix() - p.matrix()).norm();
      EXPECT_LE(frobeniusInner(x - p.matrix(), y.matrix() - p.matrix()), 1e-7 * (1.0 + scale));
    }
    const CovarianceMatrix again = projectHeisenbergCone(p.matrix());
    EXPECT_LT(maxAbs(again.matrix() - p.matrix()), 1e-8);
  }
}

// One mode: the boundary of the cone is a b - c^2 = 1/4, parametrized by (a, c).
TEST(ConeProjection, SingleModeBruteForce) {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const double a0 = uniform(rng, -0.5, 1.0), b0 = uniform(rng, -0.5, 1.0), c0 = uniform(rng, -0.8, 0.8);
    Eigen::Matrix2d x;
    x << a0, c0, c0, b0;
    if (heisenbergMargin(x) >= 0.0) continue;
    auto dist = [&](double a, double c) {
      const double b = (0.25 + c * c) / a;
      return (a - a0) * (a - a0) + (b - b0) * (b - b0) + 2.0 * (c - c0) * (c - c0);
    };
    double bestA = 1.0, bestC = 0.0, best = dist(1.0, 0.0);
    for (double a = 0.01; a < 4.0; a += 0.005)
      for (double c = -2.0; c < 2.0; c += 0.005)
        if (const double d = dist(a, c); d < best) best = d, bestA = a, bestC = c;
    for (double h = 0.005; h > 1e-10; h *= 0.5) {
      bool moved = true;
      while (moved) {
        moved = false;
        for (auto [da, dc] : {std::pair{h, 0.0}, {-h, 0.0}, {0.0, h}, {0.0, -h}}) {
          if (bestA + da <= 0.0) continue;
          if (const double d = dist(bestA + da, bestC + dc); d < best) {
            best = d, bestA += da, bestC += dc, moved = true;
          }
        }
      }
    }
    const CovarianceMatrix p = projectHeisenbergCone(x);
    EXPECT_NEAR(p.matrix()(0, 0), bestA, 1e-4);
    EXPECT_NEAR(p.matrix()(0, 1), bestC, 1e-4);
    EXPECT_NEAR(p.matrix()(1, 1), (0.25 + bestC * bestC) / bestA, 1e-4);
  }
}

TEST(ConeProjection, RejectsBadShapes) {
  EXPECT_THROW(projectHeisenbergCone(Eigen::MatrixXd::Zero(3, 3)), DimensionError);
  Eigen::MatrixXd asym = Eigen::MatrixXd::Identity(2, 2);
  asym(0, 1) = 1.0;
  EXPECT_THROW(projectHeisenbergCone(asym), DimensionError);
}

TEST(Solver, NoiselessFullRankRecovery) {
  Rng rng(4);
  const ModeBasis& basis = scanOneModel().quenchBasis;
  const ImagingModel imaging;
  const CovarianceMatrix v = randomFeasibleCovariance(rng, 10, 0.2);
  const std::vector<double> times{1.0, 3.5, 6.0, 8.5, 11.0, 13.5};
  const DesignSystem sys = assembleDesignSystem(exactData(v, basis, imaging, times), basis, imaging, {0, 1, 2, 3, 4, 5});
  const ReconstructionResult r = solveConstrainedLeastSquares(sys);
  EXPECT_TRUE(r.converged);
  EXPECT_FALSE(r.rankDeficient);
  EXPECT_LT((r.v.matrix() - v.matrix()).norm(), 1e-6 * v.matrix().norm());
  EXPECT_LT(r.theta, 1e-6 * (sys.w.asDiagonal() * sys.b).norm());
  const ResidualSummary s = residualDiagnostics(r, sys);
  EXPECT_LT(s.max, 1e-4);
  EXPECT_EQ(r.inputWindow, times);
}

TEST(Solver, ActiveConstraintIsFeasibleAndStationary) {
  Rng rng(5);
  for (int trial = 0; trial < 3; ++trial) {
    const DesignSystem sys = activeProblem(rng);
    SolverSettings settings;
    settings.primalTolerance = settings.dualTolerance = 1e-10;
    settings.maxIterations = 200000;
    const ReconstructionResult r = solveConstrainedLeastSquares(sys, settings);
    ASSERT_TRUE(r.converged);
    EXPECT_GE(r.feasibilityMargin, -1e-9);
    EXPECT_LT(r.feasibilityMargin, 1e-3);  // the constraint binds
    // Stationarity spot check along feasible directions (the feasible set is convex).
    const double theta = r.theta;
    for (int k = 0; k < 50; ++k) {
      const CovarianceMatrix y = randomFeasibleCovariance(rng, 3);
      Eigen::MatrixXd dir = y.matrix() - r.v.matrix();
      dir /= dir.norm();
      const double perturbed = weightedResidualNorm(sys, r.v.matrix() + 1e-4 * dir);
      EXPECT_GE(perturbed, theta - 1e-10 * (1.0 + theta));
    }
  }
}

TEST(Solver, MeritNonIncreasingBetweenPenaltyChanges) {
  Rng rng(6);
  const DesignSystem sys = activeProblem(rng);
  SolverSettings settings;
  settings.primalTolerance = settings.dualTolerance = 1e-10;
  settings.maxIterations = 200000;
  const ReconstructionResult r = solveConstrainedLeastSquares(sys, settings);
  ASSERT_GT(r.meritHistory.size(), 2u);
  std::size_t change = 0;
  for (std::size_t i = 1; i < r.meritHistory.size(); ++i) {
    const int it = static_cast<int>(i) + 1;
    while (change < r.penaltyChanges.size() && r.penaltyChanges[change] < it - 1) ++change;
    // Iterations right after a rebalance compare merits at different penalties.
    if (change < r.penaltyChanges.size() && r.penaltyChanges[change] == it - 1) continue;
    EXPECT_LE(r.meritHistory[i], r.meritHistory[i - 1] + 1e-12 * (1.0 + r.meritHistory[i - 1])) << "iteration " << it;
  }
}

TEST(Solver, UniqueAcrossInitializations) {
  Rng rng(7);
  const DesignSystem sys = activeProblem(rng);
  SolverSettings settings;
  settings.primalTolerance = settings.dualTolerance = 1e-11;
  settings.maxIterations = 400000;
  const Eigen::MatrixXd start1 = 0.5 * Eigen::MatrixXd::Identity(6, 6);
  const Eigen::MatrixXd start2 = randomFeasibleCovariance(rng, 3, 2.0).matrix() * 5.0;
  const ReconstructionResult a = solveConstrainedLeastSquares(sys, settings, &start1);
  const ReconstructionResult b = solveConstrainedLeastSquares(sys, settings, &start2);
  const ReconstructionResult c = solveConstrainedLeastSquares(sys, settings);
  EXPECT_LT((a.v.matrix() - b.v.matrix()).norm(), 1e-6);
  EXPECT_LT((a.v.matrix() - c.v.matrix()).norm(), 1e-6);
}

TEST(Solver, ConeMarginIsRespected) {
  Rng rng(8);
  const DesignSystem sys = activeProblem(rng);
  SolverSettings settings;
  settings.coneMargin = 0.05;
  const ReconstructionResult r = solveConstrainedLeastSquares(sys, settings);
  EXPECT_GE(r.feasibilityMargin, 0.05 - 1e-9);
}

TEST(Solver, ReportsRankDeficiency) {
  Rng rng(9);
  const ModeBasis& basis = scanOneModel().quenchBasis;
  const ImagingModel imaging;
  const CovarianceMatrix v = randomFeasibleCovariance(rng, 10, 0.2);
  const DesignSystem sys = assembleDesignSystem(exactData(v, basis, imaging, {0.0}), basis, imaging, {0});
  const ReconstructionResult r = solveConstrainedLeastSquares(sys);
  EXPECT_TRUE(r.rankDeficient);
  EXPECT_FALSE(r.suppressedUnknowns.empty());
  EXPECT_FALSE(r.suppressedModes.empty());
  ASSERT_FALSE(r.diagnostics.empty());
  EXPECT_NE(r.diagnostics.warnings.front().find("do not determine"), std::string::npos);
  EXPECT_GE(r.feasibilityMargin, -1e-9);
}

TEST(Solver, SettingsValidation) {
  SolverSettings s;
  s.penaltyParameter = 0.0;
  EXPECT_THROW(s.validate(), ConfigError);
  s = SolverSettings{};
  s.coneMargin = -1.0;
  EXPECT_THROW(s.validate(), ConfigError);
  DesignSystem empty;
  empty.modes = 1;
  EXPECT_THROW(solveConstrainedLeastSquares(empty), DimensionError);
}

TEST(Solver, IterationBudgetReportsNonConvergence) {
  Rng rng(10);
  const DesignSystem sys = activeProblem(rng);
  SolverSettings settings;
  settings.maxIterations = 3;
  settings.primalTolerance = settings.dualTolerance = 1e-14;
  const ReconstructionResult r = solveConstrainedLeastSquares(sys, settings);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, 3);
  EXPECT_GE(r.feasibilityMargin, -1e-9);
  EXPECT_FALSE(r.diagnostics.empty());
}
