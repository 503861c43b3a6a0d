#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "quadtomo/diagnostics.hpp"
#include "quadtomo/forward_model.hpp"
#include "quadtomo/measurement.hpp"
#include "quadtomo/modes.hpp"
#include "quadtomo/synthesis.hpp"
#include "quadtomo/tomography.hpp"

namespace quadtomo {

// Everything needed to turn a window of measurements into a covariance.
struct ReconstructionSetup {
  ModeBasis basis;
  ImagingModel imaging;
  SolverSettings solver;
  bool convolvedModes = false;
};

// Solves the constrained problem on the given time indices. Times enter relative to
// `timeOrigin`, so the returned V is the state at that time.
ReconstructionResult reconstructWindow(const MeasurementSet& measurements, const std::vector<int>& timeIndices,
                                       const ReconstructionSetup& setup, double timeOrigin = 0.0);

// Pixel pairs (a < b, or a == b for zero separation) whose separation lies within half a pixel
// of zbar. Falls back to the nearest available separation with a warning.
std::vector<std::pair<int, int>> pairsAtSeparation(const ImagingModel& imaging, double zbar,
                                                   Diagnostics* diagnostics = nullptr,
                                                   double* usedSeparation = nullptr);

// C averaged over pairs from a referenced pixel covariance: exp(-(Phi_aa + Phi_bb - 2 Phi_ab) / 2).
double cosineFromCovariance(const Eigen::MatrixXd& phi, const std::vector<std::pair<int, int>>& pairs);

// Empirical mean of cos(phi_a - phi_b) over shots (rows) and pairs.
double cosineFromSamples(const Eigen::MatrixXd& profiles, const std::vector<std::pair<int, int>>& pairs);

// C(zbar, t) of a Gaussian state; rows are times, columns separations.
Eigen::MatrixXd cosineCorrelator(const CovarianceMatrix& v, const ModeBasis& basis, const ImagingModel& imaging,
                                 const std::vector<double>& separations, const std::vector<double>& times,
                                 bool convolvedModes = false, Diagnostics* diagnostics = nullptr);

Eigen::MatrixXd cosineCorrelator(const PhaseProfileSamples& samples, const ImagingModel& imaging,
                                 const std::vector<double>& separations, Diagnostics* diagnostics = nullptr);

struct OccupationEntry {
  Eigen::VectorXd phiMoments;
  Eigen::VectorXd rhoMoments;
  Eigen::VectorXd occupations;
  double energy = 0.0;  // sum_k omega_k n_k, rad/ms
};

OccupationEntry phononOccupations(const CovarianceMatrix& v, const Eigen::VectorXd& frequencies);
OccupationEntry phononOccupations(const ReconstructionResult& result, const ModeBasis& basis);

struct OccupationSeries {
  std::vector<double> windowStartTimes;
  Eigen::MatrixXd occupations;  // windows x modes
  Eigen::MatrixXd phiMoments;
  Eigen::MatrixXd rhoMoments;
  Eigen::VectorXd energy;
  Eigen::MatrixXd lower;  // confidence bounds on occupations, empty unless bootstrapped
  Eigen::MatrixXd upper;
  double level = 0.0;
  std::vector<ReconstructionResult> results;
};

// One reconstruction per window {t_s, ..., t_{s+I-1}}, reported at t_s.
OccupationSeries slidingWindowReconstruction(const MeasurementSet& measurements, int windowLength,
                                             const ReconstructionSetup& setup, unsigned threads = 0);

struct BootstrapSettings {
  int replicas = 500;
  double level = 0.8;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

struct BootstrapResult {
  Eigen::VectorXd estimate;  // pipeline on the original shots
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  Eigen::MatrixXd replicas;  // replicas x outputs
  double level = 0.0;
};

using ScalarPipeline = std::function<Eigen::VectorXd(const MeasurementSet&)>;

// Type-7 (linear interpolation) sample quantile.
double percentile(std::vector<double> values, double q);

// Resamples shots with replacement per time, re-estimates, reruns the pipeline and reports
// percentile intervals at `level`.
BootstrapResult bootstrapConfidence(const PhaseProfileSamples& samples, const ImagingModel& imaging,
                                    const ScalarPipeline& pipeline, const BootstrapSettings& settings);

// Thermal predictions of the preparation Hamiltonian H(T, J) in the quench basis, optionally
// corrected for the blur of the imaging.
class ThermalModel {
 public:
  ThermalModel(const GpProfile& profile, const PhysicalParams& params, bool includeDensityGradient,
               const ModeBasis& quenchBasis, int modes, Statistics statistics, double blurSigma);

  // Diagonal <phi_k^2>, <rho_k^2> for the first `modes` quench modes at (T [nK], J [rad/ms]).
  void predict(double temperature, double tunnelCoupling, Eigen::VectorXd& phi, Eigen::VectorXd& rho) const;

  // Projection matrices for one J; predictions for many T reuse them.
  struct Projection {
    Eigen::MatrixXd phi;  // modes x N
    Eigen::MatrixXd rho;
    Eigen::VectorXd frequencies;  // preparation frequencies, zero modes set to 0
  };
  Projection project(double tunnelCoupling) const;
  void predict(const Projection& proj, double temperature, Eigen::VectorXd& phi, Eigen::VectorXd& rho) const;

  int modes() const { return modes_; }
  Statistics statistics() const { return statistics_; }

 private:
  GpProfile profile_;
  PhysicalParams params_;
  bool gradient_;
  int modes_;
  Statistics statistics_;
  QuadraticHamiltonian base_;
  Eigen::MatrixXd pinning_;  // d H_phi / d J
  RhoSquareRoot root_;
  Eigen::MatrixXd projPhi_;  // sqrt(dz) F^rho C   (modes x N)
  Eigen::MatrixXd projRho_;  // sqrt(dz) F^rho C S^phi S^phi^T
};

struct ThermalFitSettings {
  double minTemperature = 1.0;    // nK
  double maxTemperature = 200.0;
  double minCouplingHz = 0.0;
  double maxCouplingHz = 20.0;
  int temperaturePoints = 200;
  int couplingPoints = 200;
  unsigned threads = 0;
};

struct ThermalFitResult {
  double temperature = 0.0;  // nK
  double couplingHz = 0.0;   // J / 2pi
  double residual = 0.0;
  Eigen::VectorXd temperatureGrid;
  Eigen::VectorXd couplingGridHz;
  Eigen::MatrixXd surface;  // coupling x temperature
  bool identifiable = true;
  Diagnostics diagnostics;
};

// Relative squared deviation of observed diagonal moments from the model, summed over modes and
// both quadratures.
double thermalObjective(const ThermalModel& model, const Eigen::VectorXd& observedPhi, const Eigen::VectorXd& observedRho,
                        double temperature, double tunnelCoupling);

ThermalFitResult fitThermalParameters(const CovarianceMatrix& v, const ThermalModel& model,
                                      const ThermalFitSettings& settings = {});

// C(zbar, t) of V_opt propagated forward or backward over `times`.
Eigen::MatrixXd predictRecurrence(const ReconstructionResult& result, const ModeBasis& basis,
                                  const ImagingModel& imaging, const std::vector<double>& separations,
                                  const std::vector<double>& times, bool convolvedModes = false,
                                  Diagnostics* diagnostics = nullptr);

}  // namespace quadtomo
