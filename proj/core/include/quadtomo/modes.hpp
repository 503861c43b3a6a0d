#pragma once

#include <Eigen/Dense>

#include "quadtomo/core_model.hpp"
#include "quadtomo/diagnostics.hpp"

namespace quadtomo {

// Phonon modes of a QuadraticHamiltonian. Mode quadratures r = (phi_1..phi_M, rho_1..rho_M)
// relate to the grid fields through
//   phi(z_l) = sum_k f^phi_k(z_l) phi_k,   rho(z_l) = sum_k f^rho_k(z_l) rho_k,
// and back through the dual pairing phi_k = dz sum_l f^rho_k(z_l) phi(z_l).
struct ModeBasis {
  Eigen::VectorXd frequencies;        // retained nonzero modes, ascending, rad/ms
  Eigen::MatrixXd phiWavefunctions;   // cutoff x N, 1/sqrt(um)
  Eigen::MatrixXd rhoWavefunctions;   // cutoff x N
  int zeroModeCount = 0;
  int cutoff = 0;
  double deltaZ = 0.0;
  Eigen::VectorXd gridPoints;

  // Every mode including zero modes (zero modes first). Columns of fullPhi/fullRho are
  // sqrt(dz) f_k; fullTransform = fullPhi (+) fullRho is symplectic.
  Eigen::VectorXd allFrequencies;
  Eigen::MatrixXd fullPhi;
  Eigen::MatrixXd fullRho;

  int gridSize() const { return static_cast<int>(phiWavefunctions.cols()); }
  Eigen::MatrixXd fullTransform() const;

  // Copy with fewer retained modes.
  ModeBasis truncated(int newCutoff) const;
};

// Symmetric real 2M x 2M matrix of quadrature second moments.
class CovarianceMatrix {
 public:
  static constexpr double kFeasibilityTolerance = 1e-9;

  CovarianceMatrix() = default;
  // Symmetrizes the input.
  explicit CovarianceMatrix(const Eigen::MatrixXd& v);
  static CovarianceMatrix fromBlocks(const Eigen::MatrixXd& phiPhi, const Eigen::MatrixXd& phiRho,
                                     const Eigen::MatrixXd& rhoRho);
  static CovarianceMatrix vacuum(int modes);

  const Eigen::MatrixXd& matrix() const { return v_; }
  int modeCount() const { return static_cast<int>(v_.rows() / 2); }
  Eigen::MatrixXd phiPhi() const { return v_.topLeftCorner(modeCount(), modeCount()); }
  Eigen::MatrixXd phiRho() const { return v_.topRightCorner(modeCount(), modeCount()); }
  Eigen::MatrixXd rhoRho() const { return v_.bottomRightCorner(modeCount(), modeCount()); }

  // Smallest eigenvalue of V + (i/2) Omega.
  double feasibilityMargin() const { return margin_; }
  bool heisenbergFeasible() const { return margin_ >= -kFeasibilityTolerance; }

  // First `modes` modes of every block.
  CovarianceMatrix leadingModes(int modes) const;

 private:
  Eigen::MatrixXd v_;
  double margin_ = 0.0;
};

// Omega = [[0, I], [-I, 0]] of size 2M.
Eigen::MatrixXd symplecticForm(int modes);

// Smallest eigenvalue of the Hermitian matrix V + (i/2) Omega.
double heisenbergMargin(const Eigen::MatrixXd& v);

// H_rho^{1/2} and H_rho^{-1/2}. H_rho does not depend on J, so callers that diagonalize a
// family of Hamiltonians differing only in J can reuse it.
struct RhoSquareRoot {
  Eigen::MatrixXd sqrt;
  Eigen::MatrixXd invSqrt;

  static RhoSquareRoot compute(const Eigen::MatrixXd& hRho);
};

ModeBasis symplecticDiagonalize(const QuadraticHamiltonian& ham, int cutoff,
                                const RhoSquareRoot* cachedRoot = nullptr);

Eigen::MatrixXd rotationMatrix(const ModeBasis& basis, double t);
Eigen::MatrixXd rotationMatrix(const Eigen::VectorXd& frequencies, double t);

CovarianceMatrix evolveCovariance(const CovarianceMatrix& v, const ModeBasis& basis, double t);

// n_k = (<phi_k^2> + <rho_k^2>)/2 - 1/2.
Eigen::VectorXd modeOccupations(const CovarianceMatrix& v);

// Gamma^{phi phi}(z_j, z_k) on the basis grid from the phase block. A covariance with more
// modes than the basis retains is truncated with a warning.
Eigen::MatrixXd modeToRealSpace(const CovarianceMatrix& v, const ModeBasis& basis,
                                Diagnostics* diagnostics = nullptr);

// Inverse of modeToRealSpace on the retained modes: dz^2 F^rho Gamma F^rho^T.
Eigen::MatrixXd realSpaceToModes(const Eigen::MatrixXd& gamma, const ModeBasis& basis);

}  // namespace quadtomo
