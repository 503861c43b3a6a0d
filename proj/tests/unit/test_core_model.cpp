#include <algorithm>
#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "../support/fixtures.hpp"
#include "quadtomo/core_model.hpp"
#include "quadtomo/errors.hpp"
#include "quadtomo/units.hpp"

using namespace quadtomo;
using namespace quadtomo::testing;

namespace {

GpProfile randomProfile(Rng& rng, int n) {
  PhysicalParams p = PhysicalParams::defaults();
  GpProfile profile = GpProfile::homogeneous(p.boxHalfLengthUm, n, p.atomNumber);
  const double a1 = uniform(rng, 0.0, 0.4), a2 = uniform(rng, 0.0, 0.2), k2 = uniform(rng, 1.0, 5.0);
  for (int l = 0; l < n; ++l) {
    const double x = profile.gridPoints(l) / p.boxHalfLengthUm;
    profile.density(l) *= 1.0 + a1 * std::cos(1.5 * x) + a2 * std::sin(k2 * x);
  }
  profile.density *= p.atomNumber / profile.integratedAtoms();
  return profile;
}

double minEigenvalue(const Eigen::MatrixXd& m) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

}  // namespace

TEST(Units, BoltzmannOverHbarMatchesCodata) {
  const double exact = units::kBoltzmannJPerK / units::kHbarJs * 1e-3 * 1e-9;
  EXPECT_NEAR(units::kBoltzmannOverHbar, exact, 1e-11 * exact);  // stored to 12 digits
  EXPECT_NEAR(units::hzToRadPerMs(1000.0), 2.0 * units::kPi, 1e-15);
  EXPECT_NEAR(units::radPerMsToHz(units::hzToRadPerMs(3.5)), 3.5, 1e-13);
  // Rb-87: hbar/m = 0.73074 um^2/ms.
  EXPECT_NEAR(units::hbarOverMass(units::kRubidium87MassU), 0.73074, 1e-5);
}

TEST(PhysicalParams, DefaultsDescribeScanOne) {
  const PhysicalParams p = PhysicalParams::defaults();
  EXPECT_DOUBLE_EQ(2.0 * p.boxHalfLengthUm, 49.0);
  EXPECT_DOUBLE_EQ(p.atomNumber, 3147.5);
  EXPECT_NO_THROW(p.validate());
  PhysicalParams bad = p;
  bad.atomNumber = -1.0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = p;
  bad.scatteringLengthUm = std::nan("");
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(GpProfile, CellCentredGrid) {
  const Eigen::VectorXd z = GpProfile::makeGrid(2.0, 4);
  EXPECT_DOUBLE_EQ(z(0), -1.5);
  EXPECT_DOUBLE_EQ(z(3), 1.5);
  const GpProfile h = GpProfile::homogeneous(24.5, 400, 3147.5);
  EXPECT_NO_THROW(h.validate());
  EXPECT_NEAR(h.integratedAtoms(), 3147.5, 1e-9);
  GpProfile shifted = h;
  shifted.gridPoints.array() += 0.1;
  EXPECT_THROW(shifted.validate(), ConfigError);
  EXPECT_THROW(GpProfile::makeGrid(1.0, 1), ConfigError);
}

TEST(Interaction, StrengthIsDerivativeOfChemicalPotential) {
  const PhysicalParams p = PhysicalParams::defaults();
  for (double n : {1.0, 10.0, 64.0, 150.0, 400.0}) {
    const double h = 1e-4 * n;
    const double numeric = (localChemicalPotential(n + h, p) - localChemicalPotential(n - h, p)) / (2.0 * h);
    EXPECT_NEAR(interactionStrengthAt(n, p), numeric, 1e-7 * numeric) << "n = " << n;
    EXPECT_GT(interactionStrengthAt(n, p), 0.0);
  }
  // Weak-interaction limit g -> 2 hbar w_perp a.
  EXPECT_NEAR(interactionStrengthAt(0.0, p), 2.0 * p.radialTrapFreq * p.scatteringLengthUm, 1e-15);
}

TEST(Interaction, PermutationEquivariant) {
  Rng rng(11);
  const PhysicalParams p = PhysicalParams::defaults();
  GpProfile profile = randomProfile(rng, 64);
  const Eigen::VectorXd g = interactionStrength(profile, p);
  std::vector<int> perm(64);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  GpProfile shuffled = profile;
  for (int l = 0; l < 64; ++l) shuffled.density(l) = profile.density(perm[l]);
  const Eigen::VectorXd gs = interactionStrength(shuffled, p);
  for (int l = 0; l < 64; ++l) EXPECT_DOUBLE_EQ(gs(l), g(perm[l]));
}

TEST(Interaction, RejectsMismatchedProfile) {
  PhysicalParams p = PhysicalParams::defaults();
  GpProfile profile = GpProfile::homogeneous(10.0, 20, 100.0);
  EXPECT_THROW(interactionStrength(profile, p), ConfigError);
}

TEST(Hamiltonian, InvariantsOnRandomProfiles) {
  Rng rng(2024);
  const PhysicalParams p = PhysicalParams::defaults();
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 40 + static_cast<int>(uniform(rng, 0, 120));
    const GpProfile profile = randomProfile(rng, n);
    const double j = trial % 2 == 0 ? 0.0 : units::hzToRadPerMs(uniform(rng, 0.5, 10.0));
    const bool gradient = trial % 3 != 0;
    const QuadraticHamiltonian h = discretizeHamiltonian(profile, p, j, gradient);
    EXPECT_LT(maxAbs(h.hPhi - h.hPhi.transpose()), 1e-12);
    EXPECT_LT(maxAbs(h.hRho - h.hRho.transpose()), 1e-12);
    const double minPhi = minEigenvalue(h.hPhi);
    EXPECT_GE(minPhi, -1e-10);
    EXPECT_GE(minEigenvalue(h.hRho), -1e-10);
    if (j == 0.0) {
      EXPECT_LT(std::abs(minPhi), 1e-10 * h.hPhi.norm());
    } else {
      EXPECT_GE(minPhi, 2.0 * j * h.deltaZ * profile.density.minCoeff() - 1e-10);
    }
  }
}

TEST(Hamiltonian, RejectsBadInput) {
  const PhysicalParams p = PhysicalParams::defaults();
  GpProfile profile = GpProfile::homogeneous(p.boxHalfLengthUm, 20, p.atomNumber);
  EXPECT_THROW(discretizeHamiltonian(profile, p, -1.0), ConfigError);
  profile.density(5) = 0.0;
  EXPECT_THROW(discretizeHamiltonian(profile, p, 0.0, true), SingularityError);
  EXPECT_NO_THROW(discretizeHamiltonian(profile, p, 0.0, false));
}

TEST(GpSolver, FlatBoxGivesUniformDensity) {
  PhysicalParams p = PhysicalParams::defaults();
  const TrapShape flat = [](double) { return 0.0; };
  const GpSolution s = solveGpGroundState(p, flat, 120);
  const double n0 = p.atomNumber / (2.0 * p.boxHalfLengthUm);
  EXPECT_LT((s.profile.density.array() / n0 - 1.0).abs().maxCoeff(), 1e-6);
  EXPECT_NEAR(s.chemicalPotential, localChemicalPotential(n0, p), 1e-6 * s.chemicalPotential);
  EXPECT_NO_THROW(s.profile.validate());
}

TEST(GpSolver, ThomasFermiInTheBulk) {
  PhysicalParams p = PhysicalParams::defaults();
  p.boxHalfLengthUm = 40.0;
  p.longitudinalTrapFreq = units::hzToRadPerMs(12.0);
  const TrapShape trap = harmonicTrap(p);
  const GpSolution s = solveGpGroundState(p, trap, 400);
  EXPECT_NEAR(s.profile.integratedAtoms(), p.atomNumber, 1e-6 * p.atomNumber);
  const double peak = s.profile.density.maxCoeff();
  for (int l = 0; l < s.profile.size(); ++l) {
    if (s.profile.density(l) < 0.5 * peak) continue;
    const double z = s.profile.gridPoints(l);
    const double lhs = localChemicalPotential(s.profile.density(l), p);
    EXPECT_NEAR(lhs, s.chemicalPotential - trap(z), 0.01 * s.chemicalPotential) << "z = " << z;
  }
  // Symmetric trap, symmetric ground state.
  const Eigen::VectorXd d = s.profile.density;
  EXPECT_LT((d - d.reverse()).cwiseAbs().maxCoeff(), 1e-6 * peak);
}

TEST(GpSolver, SmProfileEdgeDensity) {
  const Scenario scenario = Scenario::defaults();
  const GpSolution s = solveGpGroundState(scenario.params, scenario.trapShape(), 400);
  const double peak = s.profile.density.maxCoeff();
  const double edge = std::max(s.profile.density(0), s.profile.density(399));
  EXPECT_GT(edge / peak, 0.02);
  EXPECT_LT(edge / peak, 0.10);
  EXPECT_EQ(s.clippedAmplitudes, 0);
}

TEST(GpSolver, BudgetExhaustionThrows) {
  PhysicalParams p = PhysicalParams::defaults();
  GpSolverSettings settings;
  settings.maxIterations = 2;
  settings.tolerance = 1e-14;
  EXPECT_THROW(solveGpGroundState(p, harmonicTrap(p), 200, settings), NumericalError);
}

TEST(Traps, BoxWallShape) {
  const TrapShape box = boxTrap(10.0, 2.0, 8.0);
  EXPECT_DOUBLE_EQ(box(0.0), 0.0);
  EXPECT_DOUBLE_EQ(box(9.99), 0.0);
  EXPECT_DOUBLE_EQ(box(12.0), 8.0);
  EXPECT_DOUBLE_EQ(box(-11.0), 2.0);
}
