#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "../support/fixtures.hpp"
#include "quadtomo/errors.hpp"
#include "quadtomo/forward_model.hpp"
#include "quadtomo/imaging.hpp"
#include "quadtomo/measurement.hpp"

using namespace quadtomo;
using namespace quadtomo::testing;

namespace {

ReferencedCouplings smCouplings(bool convolved) {
  const ScenarioModel& m = scanOneModel();
  const ImagingModel imaging;
  return referencedCouplings(pixelWavefunctions(m.quenchBasis, imaging, convolved), imaging);
}

MeasurementSet filledMeasurements(const ImagingModel& imaging, const std::vector<double>& times,
                                  const std::vector<Eigen::MatrixXd>& phi) {
  MeasurementSet m = MeasurementSet::empty(imaging, times);
  for (std::size_t i = 0; i < times.size(); ++i) {
    m.phi[i] = phi[i];
    m.stdError[i].setConstant(0.01);
    m.stdError[i].row(imaging.referenceIndex).setZero();
    m.stdError[i].col(imaging.referenceIndex).setZero();
    m.sampleCounts[i] = 100;
  }
  return m;
}

}  // namespace

TEST(Vectorization, RoundTripAndFrobeniusWeights) {
  Rng rng(1);
  for (int m : {1, 2, 5, 10}) {
    EXPECT_EQ(unknownCount(m), 2 * m * m + m);
    const Eigen::MatrixXd v = randomFeasibleCovariance(rng, m).matrix();
    const Eigen::VectorXd x = vectorize(v);
    EXPECT_EQ(x.size(), unknownCount(m));
    EXPECT_EQ(devectorize(x, m), v);
    const Eigen::VectorXd d = frobeniusWeights(m);
    EXPECT_NEAR(x.dot(d.cwiseProduct(x)), v.squaredNorm(), 1e-10 * v.squaredNorm());
  }
  EXPECT_THROW(devectorize(Eigen::VectorXd::Zero(4), 1), DimensionError);
}

TEST(Vectorization, Labels) {
  EXPECT_EQ(unknownLabel(0, 2), "phiphi(1,1)");
  EXPECT_EQ(unknownLabel(2, 2), "phiphi(2,2)");
  EXPECT_EQ(unknownLabel(4, 2), "phirho(1,2)");
  EXPECT_EQ(unknownLabel(9, 2), "rhorho(2,2)");
  EXPECT_EQ(unknownModes(5, 2), (std::pair<int, int>{1, 0}));
}

TEST(Imaging, OperatorRowsAreNormalizedKernels) {
  const Eigen::VectorXd grid = GpProfile::makeGrid(24.5, 400);
  const ImagingModel imaging;
  const Eigen::MatrixXd k = pixelOperator(imaging, grid, true);
  ASSERT_EQ(k.rows(), 19);
  for (int a = 0; a < 19; ++a) {
    EXPECT_NEAR(k.row(a).sum(), 1.0, 1e-12);
    EXPECT_GE(k.row(a).minCoeff(), 0.0);
    // Centroid sits on the pixel unless the grid edge clips the kernel, which pulls it inward.
    const double z = imaging.pixelPosition(a);
    if (std::abs(z) + 6.0 * imaging.convolutionSigma < 24.5)
      EXPECT_NEAR(k.row(a).dot(grid), z, 1e-6);
    else
      EXPECT_LE(std::abs(k.row(a).dot(grid)), std::abs(z) + 1e-9);
  }
  const Eigen::MatrixXd sharp = pixelOperator(imaging, grid, false);
  for (int a = 0; a < 19; ++a) EXPECT_EQ((sharp.row(a).array() != 0.0).count(), 1);
}

TEST(Imaging, ValidationAndLookup) {
  ImagingModel imaging;
  EXPECT_NO_THROW(imaging.validate(24.5));
  EXPECT_THROW(imaging.validate(10.0), ConfigError);
  EXPECT_EQ(imaging.pixelIndexOf(0.0), 9);
  EXPECT_EQ(imaging.pixelIndexOf(1.95), 10);
  EXPECT_EQ(imaging.pixelIndexOf(1.0), -1);
  imaging.referenceIndex = 19;
  EXPECT_THROW(imaging.validate(24.5), ConfigError);
}

TEST(ForwardModel, CosSinExpansionMatchesEvolutionRoute) {
  Rng rng(2);
  const ScenarioModel& m = scanOneModel();
  for (bool convolved : {false, true}) {
    const ReferencedCouplings c = smCouplings(convolved);
    for (int trial = 0; trial < 10; ++trial) {
      const CovarianceMatrix v = randomFeasibleCovariance(rng, 10);
      const double t = uniform(rng, -30.0, 30.0);
      const Eigen::MatrixXd a = predictCorrelationsAt(v, c, m.quenchBasis.frequencies, t);
      const Eigen::MatrixXd b = predictByEvolution(v, c, m.quenchBasis.frequencies, t);
      EXPECT_LT(maxAbs(a - b), 1e-10 * (1.0 + maxAbs(a)));
    }
  }
}

TEST(ForwardModel, Linearity) {
  Rng rng(3);
  const ScenarioModel& m = scanOneModel();
  const ImagingModel imaging;
  const std::vector<double> times{0.0, 3.0, 17.5};
  const CovarianceMatrix v1 = randomFeasibleCovariance(rng, 10), v2 = randomFeasibleCovariance(rng, 10);
  const double alpha = 0.7, beta = -1.3;
  const CovarianceMatrix mix(alpha * v1.matrix() + beta * v2.matrix());
  const auto p1 = predictCorrelations(v1, m.quenchBasis, imaging, times);
  const auto p2 = predictCorrelations(v2, m.quenchBasis, imaging, times);
  const auto pm = predictCorrelations(mix, m.quenchBasis, imaging, times);
  for (std::size_t i = 0; i < times.size(); ++i) {
    const Eigen::MatrixXd lin = alpha * p1[i] + beta * p2[i];
    EXPECT_LT(maxAbs(pm[i] - lin), 1e-12 * (1.0 + maxAbs(lin)));
  }
}

TEST(ForwardModel, TimeShiftConsistency) {
  Rng rng(4);
  const ScenarioModel& m = scanOneModel();
  const ImagingModel imaging;
  for (int trial = 0; trial < 10; ++trial) {
    const CovarianceMatrix v = randomFeasibleCovariance(rng, 10);
    const double t = uniform(rng, 0.0, 40.0);
    const Eigen::MatrixXd direct = predictCorrelations(v, m.quenchBasis, imaging, {t}).front();
    const Eigen::MatrixXd shifted =
        predictCorrelations(evolveCovariance(v, m.quenchBasis, t), m.quenchBasis, imaging, {0.0}).front();
    EXPECT_LT(maxAbs(direct - shifted), 1e-10 * (1.0 + maxAbs(direct)));
  }
}

TEST(ForwardModel, ReferenceRowsVanish) {
  Rng rng(5);
  const ScenarioModel& m = scanOneModel();
  const ImagingModel imaging;
  const auto p = predictCorrelations(randomFeasibleCovariance(rng, 10), m.quenchBasis, imaging, {2.0}, true);
  EXPECT_EQ(p.front().row(imaging.referenceIndex).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(p.front().col(imaging.referenceIndex).cwiseAbs().maxCoeff(), 0.0);
}

// Referencing after convolution equals convolving the referenced field: both are differences of f~.
TEST(ForwardModel, ConvolutionCommutesWithReferencing) {
  const ScenarioModel& m = scanOneModel();
  const ImagingModel imaging;
  const Eigen::MatrixXd k = pixelOperator(imaging, m.quenchBasis.gridPoints, true);
  const Eigen::MatrixXd f = m.quenchBasis.phiWavefunctions;  // M x N
  // Referenced field per mode on the grid, then blurred.
  Eigen::MatrixXd viaGrid = k * f.transpose();
  const Eigen::RowVectorXd ref = viaGrid.row(imaging.referenceIndex);
  viaGrid.rowwise() -= ref;
  const ReferencedCouplings c = smCouplings(true);
  EXPECT_LT(maxAbs(viaGrid - c.u), 1e-12);
}

TEST(DesignSystem, RowsReproducePredictions) {
  Rng rng(6);
  const ScenarioModel& m = scanOneModel();
  const ImagingModel imaging;
  const std::vector<double> times{1.0, 3.5, 6.0};
  const CovarianceMatrix v = randomFeasibleCovariance(rng, 10);
  const auto phi = predictCorrelations(v, m.quenchBasis, imaging, times);
  MeasurementSet ms = filledMeasurements(imaging, times, phi);
  const DesignSystem sys = assembleDesignSystem(ms, m.quenchBasis, imaging, {0, 1, 2});
  // Unordered pairs without the reference: 18 * 19 / 2 per time.
  EXPECT_EQ(sys.rowCount(), 3 * 171);
  const Eigen::VectorXd pred = sys.a * vectorize(v.matrix());
  EXPECT_LT((pred - sys.b).cwiseAbs().maxCoeff(), 1e-10 * (1.0 + sys.b.cwiseAbs().maxCoeff()));
  EXPECT_NEAR(sys.w(0), 100.0, 1e-12);
  for (const DesignRow& r : sys.rows) {
    EXPECT_NE(r.a, imaging.referenceIndex);
    EXPECT_NE(r.b, imaging.referenceIndex);
    EXPECT_LE(r.a, r.b);
  }
}

TEST(DesignSystem, BuilderSubsetsMatchFreshAssembly) {
  Rng rng(7);
  const ScenarioModel& m = scanOneModel();
  const ImagingModel imaging;
  const std::vector<double> times{1.0, 3.5, 6.0, 8.5};
  const auto phi = predictCorrelations(randomFeasibleCovariance(rng, 10), m.quenchBasis, imaging, times);
  const MeasurementSet ms = filledMeasurements(imaging, times, phi);
  const DesignSystemBuilder builder(m.quenchBasis, imaging, times);
  const DesignSystem a = builder.assemble(ms, {1, 3});
  const DesignSystem b = assembleDesignSystem(ms, m.quenchBasis, imaging, {1, 3});
  EXPECT_EQ(a.a, b.a);
  EXPECT_EQ(a.b, b.b);
  EXPECT_EQ(a.w, b.w);
}

TEST(DesignSystem, ExcludedEntriesAndWeights) {
  const ScenarioModel& m = scanOneModel();
  const ImagingModel imaging;
  const std::vector<double> times{1.0};
  MeasurementSet ms = filledMeasurements(imaging, times, {Eigen::MatrixXd::Zero(19, 19)});
  ms.included[0](2, 4) = ms.included[0](4, 2) = false;
  EXPECT_EQ(assembleDesignSystem(ms, m.quenchBasis, imaging, {0}).rowCount(), 170);
  ms.stdError[0](3, 5) = ms.stdError[0](5, 3) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(assembleDesignSystem(ms, m.quenchBasis, imaging, {0}), WeightingError);
  EXPECT_THROW(assembleDesignSystem(ms, m.quenchBasis, imaging, {1}), RangeError);
  const DesignSystemBuilder builder(m.quenchBasis, imaging, {2.0});
  EXPECT_THROW(builder.assemble(ms, {0}), RangeError);
}

TEST(MeasurementCsv, ExactRoundTrip) {
  Rng rng(8);
  const ScenarioModel& m = scanOneModel();
  const ImagingModel imaging;
  const std::vector<double> times{1.0, 3.5};
  auto phi = predictCorrelations(randomFeasibleCovariance(rng, 10), m.quenchBasis, imaging, times, true);
  MeasurementSet ms = filledMeasurements(imaging, times, phi);
  ms.stdError[1](0, 1) = ms.stdError[1](1, 0) = 1.0 / 3.0;
  const std::string text = formatMeasurementCsv(ms, "# manifest: abc");
  EXPECT_EQ(text.rfind("# manifest: abc\n", 0), 0u);
  const MeasurementSet back = parseMeasurementCsv(text, imaging);
  ASSERT_EQ(back.timeCount(), 2);
  for (int i = 0; i < 2; ++i) {
    EXPECT_EQ(back.phi[i], ms.phi[i]);
    for (int a = 0; a < 19; ++a)
      for (int b = 0; b < 19; ++b) {
        if (a == imaging.referenceIndex || b == imaging.referenceIndex) {
          EXPECT_FALSE(back.included[i](a, b));
        } else {
          EXPECT_EQ(back.stdError[i](a, b), ms.stdError[i](a, b));
          EXPECT_TRUE(back.included[i](a, b));
        }
      }
    EXPECT_EQ(back.sampleCounts[i], 100);
  }
  EXPECT_EQ(formatMeasurementCsv(back, "# manifest: abc"), text);
}

TEST(MeasurementCsv, FlaggedAndMalformedRows) {
  const ImagingModel imaging;
  const std::string header = "t_ms,za_um,zb_um,phi,phi_std,n_sample\n";
  const MeasurementSet flagged = parseMeasurementCsv(header + "1,-17.55,-15.6,0,0,100\n1,-17.55,-17.55,0.5,0.01,100\n", imaging);
  EXPECT_FALSE(flagged.included[0](0, 1));
  EXPECT_TRUE(flagged.included[0](0, 0));
  EXPECT_THROW(parseMeasurementCsv(header + "1,-17.55,abc,0,0,100\n", imaging), ParseError);
  EXPECT_THROW(parseMeasurementCsv(header + "1,-17.0,-15.6,0.1,0.1,100\n", imaging), ParseError);
  EXPECT_THROW(parseMeasurementCsv("t,za\n", imaging), ParseError);
  EXPECT_THROW(readMeasurementCsv("/nonexistent/measurements.csv", imaging), IoError);
}

TEST(MeasurementSet, ValidateAndSubset) {
  const ImagingModel imaging;
  MeasurementSet ms = MeasurementSet::empty(imaging, {1.0, 2.0, 3.0});
  EXPECT_NO_THROW(ms.validate());
  EXPECT_EQ(ms.timeIndex(2.0), 1);
  EXPECT_EQ(ms.timeIndex(2.5), -1);
  const MeasurementSet sub = ms.subset({2, 0});
  EXPECT_EQ(sub.times, (std::vector<double>{3.0, 1.0}));
  ms.phi[0](0, 1) = 1.0;
  EXPECT_THROW(ms.validate(), DimensionError);
}
