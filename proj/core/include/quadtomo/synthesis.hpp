#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "quadtomo/imaging.hpp"
#include "quadtomo/measurement.hpp"
#include "quadtomo/modes.hpp"

namespace quadtomo {

enum class Statistics { ClassicalField, QuantumCoth };

Statistics parseStatistics(const std::string& name);  // "classical" or "quantum"
std::string statisticsName(Statistics s);

struct ThermalSpec {
  double temperature = 40.0;    // nK
  double tunnelCoupling = 0.0;  // J, rad/ms
  Statistics statistics = Statistics::ClassicalField;

  void validate() const;
};

// Per-mode <phi_k^2> = <rho_k^2> of a thermal state with the given frequencies.
Eigen::VectorXd thermalMoments(const Eigen::VectorXd& frequencies, const ThermalSpec& spec);

// Thermal covariance over the retained modes of `basis`, in that basis. Classical statistics need
// a basis without zero modes (J > 0).
CovarianceMatrix thermalCovariance(const ModeBasis& basis, const ThermalSpec& spec);

// Linear map between two complete mode bases on the same grid, through real space:
// phi_to = mapPhi * phi_from, rho_to = mapRho * rho_from. Both N x N.
struct BasisChange {
  Eigen::MatrixXd mapPhi;
  Eigen::MatrixXd mapRho;
};

BasisChange basisChange(const ModeBasis& from, const ModeBasis& to);

// State diagonal in `from` (all N modes, moments phi/rho) expressed in every mode of `to`,
// zero modes included (2N x 2N, quadrature order: all phi, then all rho).
Eigen::MatrixXd fullCovarianceInBasis(const Eigen::VectorXd& phiMoments, const Eigen::VectorXd& rhoMoments,
                                      const ModeBasis& from, const ModeBasis& to);

// Retained-mode block (skipping zero modes) of a full 2N x 2N covariance in `basis`.
CovarianceMatrix retainedBlock(const Eigen::MatrixXd& full, const ModeBasis& basis);

// Ground truth of the synthetic experiment: thermal state of the preparation Hamiltonian
// evolving under the quench Hamiltonian, tracked in every quench mode.
class QuenchTruth {
 public:
  QuenchTruth(const ModeBasis& preparation, const ModeBasis& quench, const ThermalSpec& spec);

  const Eigen::MatrixXd& fullCovariance() const { return full_; }
  // Initial covariance restricted to the quench basis cutoff.
  CovarianceMatrix initialCovariance() const { return retainedBlock(full_, quench_); }
  // Phase correlation matrix on the grid at time t, all modes included.
  Eigen::MatrixXd realSpacePhase(double t) const;
  // Referenced pixel correlations at t (exact, all modes) for a pixel operator of size N_p x N.
  Eigen::MatrixXd referencedPixelCorrelations(double t, const ImagingModel& imaging, bool convolved = true) const;

  const ModeBasis& quenchBasis() const { return quench_; }

 private:
  ModeBasis quench_;
  Eigen::MatrixXd full_;
};

// Referenced Phi(z_a, z_b) from a grid covariance: K Gamma K^T followed by referencing.
Eigen::MatrixXd referencedPixelCovariance(const Eigen::MatrixXd& gamma, const Eigen::MatrixXd& pixelOp,
                                          int referenceIndex);

struct PhaseProfileSamples {
  std::vector<double> times;
  std::vector<Eigen::MatrixXd> profiles;  // per time: n_sample x N_p, reference column zero
  std::uint64_t seed = 0;
  std::string generatingSpec;
  int referenceIndex = 0;

  int sampleCount() const { return profiles.empty() ? 0 : static_cast<int>(profiles.front().rows()); }
};

// Draws Gaussian grid profiles with covariance Gamma (eigen square root, floor 0), blurs and samples
// them at the pixels and subtracts the reference pixel. The factorization is done once.
class PhaseProfileSampler {
 public:
  PhaseProfileSampler(const Eigen::MatrixXd& gamma, const Eigen::VectorXd& grid, const ImagingModel& imaging);

  // n x N_p matrix of referenced pixel phases from the Philox stream (seed, stream).
  Eigen::MatrixXd sample(int n, std::uint64_t seed, std::uint64_t stream) const;

  // Covariance the samples are drawn from (post blur, post referencing).
  Eigen::MatrixXd pixelCovariance() const;

 private:
  Eigen::MatrixXd map_;  // N_p x rank, referenced
  int reference_ = 0;
};

// One profile set per time, stream derived from (repeat, time index).
PhaseProfileSamples samplePhaseProfiles(const std::vector<Eigen::MatrixXd>& gammas, const std::vector<double>& times,
                                        const Eigen::VectorXd& grid, const ImagingModel& imaging, int nSample,
                                        std::uint64_t seed, std::uint64_t repeat = 0);

// Product estimator and its standard error of the mean; zero-variance entries are flagged excluded.
MeasurementSet estimateCorrelations(const PhaseProfileSamples& samples, const ImagingModel& imaging);

// Measurement set from exact referenced correlations, weighted by the Gaussian standard error
// sqrt((Phi_aa Phi_bb + Phi_ab^2) / n) of an n-shot product estimator. Zero-error entries are flagged.
MeasurementSet exactMeasurements(const ImagingModel& imaging, const std::vector<double>& times,
                                 const std::vector<Eigen::MatrixXd>& phi, int nSample);

// Estimator restricted to the shots listed in `rows` (with repetition), per time.
MeasurementSet estimateCorrelations(const PhaseProfileSamples& samples, const ImagingModel& imaging,
                                    const std::vector<std::vector<int>>& rows);

}  // namespace quadtomo
