#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "quadtomo/core_model.hpp"
#include "quadtomo/modes.hpp"
#include "quadtomo/scenario.hpp"
#include "quadtomo/units.hpp"

namespace quadtomo::testing {

using Rng = std::mt19937_64;

inline Eigen::MatrixXd gaussianMatrix(Rng& rng, int rows, int cols, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = n(rng);
  return m;
}

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

inline double maxAbs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

// Random symplectic S = shear(B) * diag(A, A^{-T}) built from well-conditioned factors.
inline Eigen::MatrixXd randomSymplectic(Rng& rng, int modes) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(modes, modes) + gaussianMatrix(rng, modes, modes, 0.3);
  Eigen::MatrixXd b = gaussianMatrix(rng, modes, modes, 0.5);
  b = 0.5 * (b + b.transpose()).eval();
  Eigen::MatrixXd scale = Eigen::MatrixXd::Zero(2 * modes, 2 * modes);
  scale.topLeftCorner(modes, modes) = a;
  scale.bottomRightCorner(modes, modes) = a.inverse().transpose();
  Eigen::MatrixXd shear = Eigen::MatrixXd::Identity(2 * modes, 2 * modes);
  shear.topRightCorner(modes, modes) = b;
  return shear * scale;
}

// Gaussian-state covariance S diag(nu, nu) S^T with symplectic eigenvalues nu >= 1/2 + minExcess.
inline CovarianceMatrix randomFeasibleCovariance(Rng& rng, int modes, double minExcess = 0.0) {
  Eigen::VectorXd nu(2 * modes);
  for (int k = 0; k < modes; ++k) nu(k) = nu(k + modes) = 0.5 + minExcess + uniform(rng, 0.0, 3.0);
  const Eigen::MatrixXd s = randomSymplectic(rng, modes);
  return CovarianceMatrix(s * nu.asDiagonal() * s.transpose());
}

inline QuadraticHamiltonian homogeneousHamiltonian(int n, double tunnelHz, bool gradient) {
  PhysicalParams p = PhysicalParams::defaults();
  const GpProfile profile = GpProfile::homogeneous(p.boxHalfLengthUm, n, p.atomNumber);
  return discretizeHamiltonian(profile, p, units::hzToRadPerMs(tunnelHz), gradient);
}

// Scan-1 scenario model, built once per test binary.
inline const ScenarioModel& scanOneModel() {
  static const ScenarioModel model = buildScenarioModel(Scenario::defaults());
  return model;
}

}  // namespace quadtomo::testing
