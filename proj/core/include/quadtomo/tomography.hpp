#pragma once

#include <vector>

#include <Eigen/Dense>

#include "quadtomo/diagnostics.hpp"
#include "quadtomo/forward_model.hpp"
#include "quadtomo/modes.hpp"

namespace quadtomo {

struct SolverSettings {
  int maxIterations = 20000;
  double primalTolerance = 1e-8;
  double dualTolerance = 1e-8;
  double penaltyParameter = 1.0;  // rho_admm
  double coneMargin = 0.0;        // V + i Omega / 2 >= coneMargin

  void validate() const;
};

struct ReconstructionResult {
  CovarianceMatrix v;
  double theta = 0.0;  // ||W (A vec(V) - b)||_2
  int iterations = 0;
  double feasibilityMargin = 0.0;
  std::vector<double> inputWindow;  // ms
  bool converged = false;
  bool rankDeficient = false;
  std::vector<int> suppressedUnknowns;  // indices into vec(V)
  std::vector<int> suppressedModes;     // 0-based
  std::vector<double> primalHistory;
  std::vector<double> dualHistory;
  // He-Yuan fixed-point residual rho ||Z+ - Z||^2 + rho ||U+ - U||^2; non-increasing while rho is fixed.
  std::vector<double> meritHistory;
  std::vector<int> penaltyChanges;  // iterations at which rho was rebalanced
  Diagnostics diagnostics;
};

struct ConeProjectionSettings {
  double margin = 0.0;
  double tolerance = 1e-10;
  int maxIterations = 200000;
};

// Frobenius-nearest real symmetric V' with V' + (i/2) Omega >= margin (Dykstra between the Hermitian
// PSD cone and the affine set Im = Omega/2). Feasible input is returned unchanged.
CovarianceMatrix projectHeisenbergCone(const Eigen::MatrixXd& v, const ConeProjectionSettings& settings = {});

// ||W (A vec(V) - b)||_2.
double weightedResidualNorm(const DesignSystem& system, const Eigen::MatrixXd& v);

// ADMM on  min ||W (A v - b)||^2  s.t.  Mat(v) + i Omega / 2 = Z,  Z >= 0.
// `initial` (2M x 2M) replaces the default ridge warm start.
ReconstructionResult solveConstrainedLeastSquares(const DesignSystem& system, const SolverSettings& settings = {},
                                                  const Eigen::MatrixXd* initial = nullptr);

struct ResidualSummary {
  Eigen::VectorXd residuals;  // |Phi_data - Phi_rec| / sigma per row
  double median = 0.0;
  double q90 = 0.0;
  double max = 0.0;
};

ResidualSummary residualDiagnostics(const ReconstructionResult& result, const DesignSystem& system);

}  // namespace quadtomo
