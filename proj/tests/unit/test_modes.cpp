#include <cmath>

#include <gtest/gtest.h>

#include "../support/fixtures.hpp"
#include "quadtomo/errors.hpp"
#include "quadtomo/modes.hpp"
#include "quadtomo/units.hpp"

using namespace quadtomo;
using namespace quadtomo::testing;

namespace {

double soundSpeed(const PhysicalParams& p) {
  const double n0 = p.atomNumber / (2.0 * p.boxHalfLengthUm);
  return std::sqrt(interactionStrengthAt(n0, p) * n0 * p.hbarOverMass());
}

}  // namespace

// Homogeneous gas without the gradient term: omega_k = (2c/dz) sin(k pi / 2N) exactly.
TEST(Modes, HomogeneousDiscreteDispersion) {
  const int n = 200;
  const PhysicalParams p = PhysicalParams::defaults();
  const QuadraticHamiltonian h = homogeneousHamiltonian(n, 0.0, false);
  const ModeBasis basis = symplecticDiagonalize(h, 20);
  ASSERT_EQ(basis.zeroModeCount, 1);
  const double c = soundSpeed(p);
  for (int k = 1; k <= 20; ++k) {
    const double expected = 2.0 * c / h.deltaZ * std::sin(k * units::kPi / (2.0 * n));
    EXPECT_NEAR(basis.frequencies(k - 1), expected, 1e-9 * expected) << "k = " << k;
  }
  // Continuum limit c k pi / L.
  EXPECT_NEAR(basis.frequencies(0), c * units::kPi / (2.0 * p.boxHalfLengthUm), 1e-4 * basis.frequencies(0));
}

// Uniform pinning shifts omega^2 by 4 g n J and lifts the zero mode.
TEST(Modes, HomogeneousPinnedGap) {
  const int n = 120;
  const PhysicalParams p = PhysicalParams::defaults();
  const QuadraticHamiltonian h0 = homogeneousHamiltonian(n, 0.0, false);
  const QuadraticHamiltonian hj = homogeneousHamiltonian(n, 3.5, false);
  const ModeBasis b0 = symplecticDiagonalize(h0, 10);
  const ModeBasis bj = symplecticDiagonalize(hj, 10);
  EXPECT_EQ(bj.zeroModeCount, 0);
  const double n0 = p.atomNumber / (2.0 * p.boxHalfLengthUm);
  const double shift = 4.0 * interactionStrengthAt(n0, p) * n0 * hj.tunnelCoupling;
  EXPECT_NEAR(bj.frequencies(0), std::sqrt(shift), 1e-9 * std::sqrt(shift));
  for (int k = 0; k < 9; ++k) {
    const double expected = std::sqrt(b0.frequencies(k) * b0.frequencies(k) + shift);
    EXPECT_NEAR(bj.frequencies(k + 1), expected, 1e-9 * expected);
  }
}

TEST(Modes, FullTransformIsSymplecticOnSmProfile) {
  const ModeBasis& basis = scanOneModel().quenchBasis;
  const Eigen::MatrixXd s = basis.fullTransform();
  const int n = basis.gridSize();
  const Eigen::MatrixXd omega = symplecticForm(n);
  EXPECT_LT(maxAbs(s * omega * s.transpose() - omega), 1e-8);
  EXPECT_EQ(basis.zeroModeCount, 1);
  EXPECT_EQ(basis.cutoff, 10);
  for (int k = 1; k < basis.frequencies.size(); ++k) EXPECT_GT(basis.frequencies(k), basis.frequencies(k - 1));
}

TEST(Modes, PairingNormalization) {
  const ModeBasis& basis = scanOneModel().quenchBasis;
  const Eigen::MatrixXd pairing =
      basis.deltaZ * basis.phiWavefunctions * basis.rhoWavefunctions.transpose();
  EXPECT_LT(maxAbs(pairing - Eigen::MatrixXd::Identity(basis.cutoff, basis.cutoff)), 1e-8);
}

TEST(Modes, SignConvention) {
  const ModeBasis& basis = scanOneModel().quenchBasis;
  for (int k = 0; k < basis.cutoff; ++k) EXPECT_GE(basis.phiWavefunctions(k, 0), 0.0);
}

TEST(Modes, SpectrumInvariantUnderReversal) {
  const ScenarioModel& m = scanOneModel();
  // Symmetrize the profile exactly, then compare with the reversed grid.
  GpProfile profile = m.gp.profile;
  profile.density = 0.5 * (profile.density + profile.density.reverse()).eval();
  const PhysicalParams p = Scenario::defaults().params;
  const QuadraticHamiltonian a = discretizeHamiltonian(profile, p, 0.0, true);
  QuadraticHamiltonian b = a;
  b.hPhi = a.hPhi.colwise().reverse().rowwise().reverse();
  b.hRho = a.hRho.colwise().reverse().rowwise().reverse();
  const ModeBasis ba = symplecticDiagonalize(a, 10);
  const ModeBasis bb = symplecticDiagonalize(b, 10);
  for (int k = 0; k < 10; ++k)
    EXPECT_NEAR(ba.frequencies(k), bb.frequencies(k), 1e-10 * ba.frequencies(k));
}

TEST(Modes, DegenerateOrderingIsReproducible) {
  const QuadraticHamiltonian h = homogeneousHamiltonian(60, 0.0, true);
  const ModeBasis a = symplecticDiagonalize(h, 8);
  const ModeBasis b = symplecticDiagonalize(h, 8);
  EXPECT_EQ(maxAbs(a.phiWavefunctions - b.phiWavefunctions), 0.0);
}

TEST(Modes, RejectsBadCutoff) {
  const QuadraticHamiltonian h = homogeneousHamiltonian(30, 0.0, true);
  EXPECT_THROW(symplecticDiagonalize(h, 30), ConfigError);
  EXPECT_THROW(symplecticDiagonalize(h, 0), ConfigError);
  EXPECT_NO_THROW(symplecticDiagonalize(h, 29));
}

TEST(Modes, IndefiniteHamiltonianThrows) {
  QuadraticHamiltonian h = homogeneousHamiltonian(30, 1.0, true);
  h.hPhi(3, 3) -= 1e3;
  EXPECT_THROW(symplecticDiagonalize(h, 5), InstabilityError);
}

TEST(Modes, TruncationKeepsLeadingModes) {
  const ModeBasis& basis = scanOneModel().quenchBasis;
  const ModeBasis t = basis.truncated(4);
  EXPECT_EQ(t.cutoff, 4);
  EXPECT_EQ(maxAbs(t.phiWavefunctions - basis.phiWavefunctions.topRows(4)), 0.0);
  EXPECT_THROW(basis.truncated(11), std::exception);
}

TEST(Evolution, RotationIsSymplecticAndGroupLaw) {
  Rng rng(5);
  const Eigen::VectorXd w = scanOneModel().quenchBasis.frequencies;
  const Eigen::MatrixXd omega = symplecticForm(static_cast<int>(w.size()));
  for (int trial = 0; trial < 50; ++trial) {
    const double t1 = uniform(rng, -40.0, 40.0), t2 = uniform(rng, -40.0, 40.0);
    const Eigen::MatrixXd g1 = rotationMatrix(w, t1);
    const Eigen::MatrixXd g2 = rotationMatrix(w, t2);
    EXPECT_LT(maxAbs(g1 * omega * g1.transpose() - omega), 1e-12);
    EXPECT_LT(maxAbs(g1 * g2 - rotationMatrix(w, t1 + t2)), 1e-12);
  }
  EXPECT_EQ(maxAbs(rotationMatrix(w, 0.0) - Eigen::MatrixXd::Identity(20, 20)), 0.0);
}

TEST(Evolution, OccupationsAndMarginConserved) {
  Rng rng(6);
  const ModeBasis& basis = scanOneModel().quenchBasis;
  for (int trial = 0; trial < 20; ++trial) {
    const CovarianceMatrix v = randomFeasibleCovariance(rng, basis.cutoff);
    const double t = uniform(rng, -60.0, 60.0);
    const CovarianceMatrix vt = evolveCovariance(v, basis, t);
    EXPECT_LT((modeOccupations(vt) - modeOccupations(v)).cwiseAbs().maxCoeff(), 1e-12 * (1.0 + modeOccupations(v).maxCoeff()));
    EXPECT_NEAR(vt.feasibilityMargin(), v.feasibilityMargin(), 1e-10 * (1.0 + v.matrix().norm()));
    const CovarianceMatrix back = evolveCovariance(vt, basis, -t);
    EXPECT_LT(maxAbs(back.matrix() - v.matrix()), 1e-12 * (1.0 + maxAbs(v.matrix())));
  }
}

TEST(Covariance, VacuumAndMargin) {
  const CovarianceMatrix vac = CovarianceMatrix::vacuum(3);
  EXPECT_NEAR(vac.feasibilityMargin(), 0.0, 1e-14);
  EXPECT_TRUE(vac.heisenbergFeasible());
  EXPECT_LT(modeOccupations(vac).cwiseAbs().maxCoeff(), 1e-15);
  const CovarianceMatrix squeezed = CovarianceMatrix::fromBlocks(
      Eigen::MatrixXd::Constant(1, 1, 0.25), Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Constant(1, 1, 1.0));
  EXPECT_NEAR(squeezed.feasibilityMargin(), 0.0, 1e-14);
  const CovarianceMatrix violating = CovarianceMatrix::fromBlocks(
      Eigen::MatrixXd::Constant(1, 1, 0.2), Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Constant(1, 1, 1.0));
  EXPECT_FALSE(violating.heisenbergFeasible());
  // Eigenvalues of [[a, i/2], [-i/2, b]] in closed form.
  const double a = 0.2, b = 1.0;
  const double expected = 0.5 * (a + b) - std::sqrt(0.25 * (a - b) * (a - b) + 0.25);
  EXPECT_NEAR(violating.feasibilityMargin(), expected, 1e-14);
}

TEST(Covariance, BlocksAndLeadingModes) {
  Rng rng(8);
  const CovarianceMatrix v = randomFeasibleCovariance(rng, 4);
  const CovarianceMatrix r = CovarianceMatrix::fromBlocks(v.phiPhi(), v.phiRho(), v.rhoRho());
  EXPECT_LT(maxAbs(r.matrix() - v.matrix()), 1e-15);
  const CovarianceMatrix l = v.leadingModes(2);
  EXPECT_EQ(l.phiPhi(), v.phiPhi().topLeftCorner(2, 2));
  EXPECT_EQ(l.phiRho(), v.phiRho().topLeftCorner(2, 2));
  EXPECT_THROW(v.leadingModes(5), DimensionError);
  EXPECT_THROW(CovarianceMatrix::fromBlocks(Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(2, 3),
                                            Eigen::MatrixXd::Zero(2, 2)),
               DimensionError);
}

TEST(RealSpace, CompletenessRoundTrip) {
  Rng rng(9);
  const QuadraticHamiltonian h = homogeneousHamiltonian(40, 2.0, true);
  const ModeBasis basis = symplecticDiagonalize(h, 40);
  const CovarianceMatrix v = randomFeasibleCovariance(rng, 40);
  const Eigen::MatrixXd gamma = modeToRealSpace(v, basis);
  EXPECT_LT(maxAbs(realSpaceToModes(gamma, basis) - v.phiPhi()), 1e-8 * maxAbs(v.phiPhi()));
}

TEST(RealSpace, CompletenessWithZeroMode) {
  Rng rng(10);
  const QuadraticHamiltonian h = homogeneousHamiltonian(32, 0.0, true);
  const ModeBasis basis = symplecticDiagonalize(h, 31);
  const CovarianceMatrix v = randomFeasibleCovariance(rng, 31);
  const Eigen::MatrixXd gamma = modeToRealSpace(v, basis);
  EXPECT_LT(maxAbs(realSpaceToModes(gamma, basis) - v.phiPhi()), 1e-8 * maxAbs(v.phiPhi()));
}

TEST(RealSpace, OversizedCovarianceWarns) {
  const ModeBasis basis = scanOneModel().quenchBasis.truncated(3);
  Diagnostics d;
  const Eigen::MatrixXd gamma = modeToRealSpace(CovarianceMatrix::vacuum(5), basis, &d);
  EXPECT_EQ(d.warnings.size(), 1u);
  EXPECT_EQ(gamma.rows(), basis.gridSize());
}
