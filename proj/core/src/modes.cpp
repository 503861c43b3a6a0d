#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>
#include <numeric>

#include "quadtomo/errors.hpp"
#include "quadtomo/modes.hpp"

namespace quadtomo {

namespace {

constexpr double kZeroModeThreshold = 1e-10;
constexpr double kRhoFloor = 1e-12;
constexpr double kDegenerateTolerance = 1e-9;

int firstSignChange(const Eigen::VectorXd& v) {
  const double scale = v.cwiseAbs().maxCoeff();
  int sign = 0;
  for (int l = 0; l < v.size(); ++l) {
    if (std::abs(v(l)) <= 1e-12 * scale) continue;
    const int s = v(l) > 0 ? 1 : -1;
    if (sign != 0 && s != sign) return l;
    sign = s;
  }
  return static_cast<int>(v.size());
}

}  // namespace

Eigen::MatrixXd ModeBasis::fullTransform() const {
  const Eigen::Index n = fullPhi.rows();
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  s.topLeftCorner(n, n) = fullPhi;
  s.bottomRightCorner(n, n) = fullRho;
  return s;
}

ModeBasis ModeBasis::truncated(int newCutoff) const {
  if (newCutoff < 1 || newCutoff > cutoff) throw ConfigError("truncated cutoff outside [1, current cutoff]");
  ModeBasis b = *this;
  b.cutoff = newCutoff;
  b.frequencies = frequencies.head(newCutoff);
  b.phiWavefunctions = phiWavefunctions.topRows(newCutoff);
  b.rhoWavefunctions = rhoWavefunctions.topRows(newCutoff);
  return b;
}

CovarianceMatrix::CovarianceMatrix(const Eigen::MatrixXd& v) {
  if (v.rows() != v.cols() || v.rows() % 2 != 0 || v.rows() == 0) {
    throw DimensionError("covariance matrix must be square with even, nonzero size");
  }
  v_ = 0.5 * (v + v.transpose());
  margin_ = heisenbergMargin(v_);
}

CovarianceMatrix CovarianceMatrix::fromBlocks(const Eigen::MatrixXd& phiPhi, const Eigen::MatrixXd& phiRho,
                                              const Eigen::MatrixXd& rhoRho) {
  const Eigen::Index m = phiPhi.rows();
  if (phiPhi.cols() != m || phiRho.rows() != m || phiRho.cols() != m || rhoRho.rows() != m ||
      rhoRho.cols() != m) {
    throw DimensionError("covariance blocks must all be M x M");
  }
  Eigen::MatrixXd v(2 * m, 2 * m);
  v << phiPhi, phiRho, phiRho.transpose(), rhoRho;
  return CovarianceMatrix(v);
}

CovarianceMatrix CovarianceMatrix::vacuum(int modes) {
  return CovarianceMatrix(0.5 * Eigen::MatrixXd::Identity(2 * modes, 2 * modes));
}

CovarianceMatrix CovarianceMatrix::leadingModes(int modes) const {
  if (modes < 1 || modes > modeCount()) throw DimensionError("requested more modes than the covariance holds");
  const int m = modeCount();
  Eigen::MatrixXd v(2 * modes, 2 * modes);
  v << v_.block(0, 0, modes, modes), v_.block(0, m, modes, modes), v_.block(m, 0, modes, modes),
      v_.block(m, m, modes, modes);
  return CovarianceMatrix(v);
}

Eigen::MatrixXd symplecticForm(int modes) {
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(2 * modes, 2 * modes);
  omega.topRightCorner(modes, modes).setIdentity();
  omega.bottomLeftCorner(modes, modes) = -Eigen::MatrixXd::Identity(modes, modes);
  return omega;
}

double heisenbergMargin(const Eigen::MatrixXd& v) {
  const int m = static_cast<int>(v.rows() / 2);
  Eigen::MatrixXcd q = v.cast<std::complex<double>>();
  q += std::complex<double>(0.0, 0.5) * symplecticForm(m).cast<std::complex<double>>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(q, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

RhoSquareRoot RhoSquareRoot::compute(const Eigen::MatrixXd& hRho) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hRho);
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition of H_rho failed", 0.0);
  const Eigen::VectorXd& lam = es.eigenvalues();
  const double top = lam.maxCoeff();
  if (!(top > 0.0) || lam.minCoeff() <= 1e-15 * top) {
    throw SingularityError("H_rho is not invertible (smallest eigenvalue " + std::to_string(lam.minCoeff()) + ")");
  }
  const Eigen::VectorXd clipped = lam.cwiseMax(kRhoFloor * top);
  RhoSquareRoot root;
  const Eigen::MatrixXd& u = es.eigenvectors();
  root.sqrt = u * clipped.cwiseSqrt().asDiagonal() * u.transpose();
  root.invSqrt = u * clipped.cwiseSqrt().cwiseInverse().asDiagonal() * u.transpose();
  return root;
}

ModeBasis symplecticDiagonalize(const QuadraticHamiltonian& ham, int cutoff, const RhoSquareRoot* cachedRoot) {
  const int n = ham.size();
  if (n < 2 || ham.hRho.rows() != n) throw DimensionError("Hamiltonian blocks must be N x N with N >= 2");
  RhoSquareRoot local;
  if (cachedRoot == nullptr) {
    local = RhoSquareRoot::compute(ham.hRho);
    cachedRoot = &local;
  } else if (cachedRoot->sqrt.rows() != n) {
    throw DimensionError("cached H_rho root has the wrong size");
  }
  const Eigen::MatrixXd& rootRho = cachedRoot->sqrt;
  const Eigen::MatrixXd& invRootRho = cachedRoot->invSqrt;

  Eigen::MatrixXd hTilde = rootRho * ham.hPhi * rootRho;
  hTilde = 0.5 * (hTilde + hTilde.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hTilde);
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition of the phase block failed", 0.0);
  Eigen::VectorXd sigma = es.eigenvalues();
  Eigen::MatrixXd q = es.eigenvectors();

  const double top = sigma.cwiseAbs().maxCoeff();
  if (!(top > 0.0)) throw InstabilityError("phase block of the Hamiltonian vanishes");
  int zeroModes = 0;
  for (int k = 0; k < n; ++k) {
    if (sigma(k) < -kZeroModeThreshold * top) {
      throw InstabilityError("Hamiltonian is not positive semidefinite (eigenvalue " + std::to_string(sigma(k)) + ")");
    }
    if (std::abs(sigma(k)) < kZeroModeThreshold * top) ++zeroModes;
  }
  if (cutoff < 1 || cutoff > n - zeroModes) {
    throw ConfigError("mode cutoff must lie in [1, " + std::to_string(n - zeroModes) + "]");
  }
  for (int k = 0; k < zeroModes; ++k) sigma(k) = 1.0;

  Eigen::MatrixXd sPhi = rootRho * q;
  Eigen::MatrixXd sRho = invRootRho * q;

  // Pin signs, then order exactly degenerate groups by their first sign change.
  for (int k = 0; k < n; ++k) {
    const double scale = sPhi.col(k).cwiseAbs().maxCoeff();
    int l = 0;
    while (l < n - 1 && std::abs(sPhi(l, k)) <= 1e-12 * scale) ++l;
    if (sPhi(l, k) < 0.0) {
      sPhi.col(k) *= -1.0;
      sRho.col(k) *= -1.0;
    }
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (int start = zeroModes; start < n;) {
    int end = start + 1;
    while (end < n && std::abs(sigma(end) - sigma(start)) <= kDegenerateTolerance * std::abs(sigma(start))) ++end;
    if (end - start > 1) {
      std::stable_sort(order.begin() + start, order.begin() + end,
                       [&](int a, int b) { return firstSignChange(sPhi.col(a)) < firstSignChange(sPhi.col(b)); });
    }
    start = end;
  }

  ModeBasis basis;
  basis.zeroModeCount = zeroModes;
  basis.cutoff = cutoff;
  basis.deltaZ = ham.deltaZ;
  basis.gridPoints = Eigen::VectorXd::LinSpaced(n, -0.5 * ham.deltaZ * (n - 1), 0.5 * ham.deltaZ * (n - 1));
  basis.allFrequencies.resize(n);
  basis.fullPhi.resize(n, n);
  basis.fullRho.resize(n, n);
  for (int k = 0; k < n; ++k) {
    const int src = order[k];
    const double s = k < zeroModes ? 1.0 : sigma(src);
    basis.allFrequencies(k) = k < zeroModes ? 0.0 : std::sqrt(s) / ham.deltaZ;
    basis.fullPhi.col(k) = sPhi.col(src) * std::pow(s, -0.25);
    basis.fullRho.col(k) = sRho.col(src) * std::pow(s, 0.25);
  }
  const double invRootDz = 1.0 / std::sqrt(ham.deltaZ);
  basis.frequencies = basis.allFrequencies.segment(zeroModes, cutoff);
  basis.phiWavefunctions = basis.fullPhi.middleCols(zeroModes, cutoff).transpose() * invRootDz;
  basis.rhoWavefunctions = basis.fullRho.middleCols(zeroModes, cutoff).transpose() * invRootDz;
  return basis;
}

Eigen::MatrixXd rotationMatrix(const Eigen::VectorXd& frequencies, double t) {
  const Eigen::Index m = frequencies.size();
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const double c = std::cos(frequencies(k) * t);
    const double s = std::sin(frequencies(k) * t);
    g(k, k) = c;
    g(k, k + m) = -s;
    g(k + m, k) = s;
    g(k + m, k + m) = c;
  }
  return g;
}

Eigen::MatrixXd rotationMatrix(const ModeBasis& basis, double t) { return rotationMatrix(basis.frequencies, t); }

CovarianceMatrix evolveCovariance(const CovarianceMatrix& v, const ModeBasis& basis, double t) {
  if (v.modeCount() != basis.cutoff) throw DimensionError("covariance size does not match the mode cutoff");
  const Eigen::MatrixXd g = rotationMatrix(basis, t);
  return CovarianceMatrix(g * v.matrix() * g.transpose());
}

Eigen::VectorXd modeOccupations(const CovarianceMatrix& v) {
  const int m = v.modeCount();
  const Eigen::MatrixXd& mat = v.matrix();
  Eigen::VectorXd n(m);
  for (int k = 0; k < m; ++k) n(k) = 0.5 * (mat(k, k) + mat(k + m, k + m)) - 0.5;
  return n;
}

Eigen::MatrixXd modeToRealSpace(const CovarianceMatrix& v, const ModeBasis& basis, Diagnostics* diagnostics) {
  int m = v.modeCount();
  if (m > basis.cutoff) {
    if (diagnostics) {
      diagnostics->warn("covariance holds " + std::to_string(m) + " modes but the basis retains " +
                        std::to_string(basis.cutoff) + "; higher modes dropped");
    }
    m = basis.cutoff;
  }
  const Eigen::MatrixXd f = basis.phiWavefunctions.topRows(m);
  Eigen::MatrixXd gamma = f.transpose() * v.phiPhi().topLeftCorner(m, m) * f;
  return 0.5 * (gamma + gamma.transpose());
}

Eigen::MatrixXd realSpaceToModes(const Eigen::MatrixXd& gamma, const ModeBasis& basis) {
  if (gamma.rows() != basis.gridSize() || gamma.cols() != basis.gridSize()) {
    throw DimensionError("real-space matrix does not match the basis grid");
  }
  const double dz2 = basis.deltaZ * basis.deltaZ;
  return dz2 * basis.rhoWavefunctions * gamma * basis.rhoWavefunctions.transpose();
}

}  // namespace quadtomo
