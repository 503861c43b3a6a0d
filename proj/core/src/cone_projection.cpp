#include <complex>

#include "quadtomo/errors.hpp"
#include "quadtomo/tomography.hpp"

namespace quadtomo {

namespace {

using Complex = std::complex<double>;

Eigen::MatrixXcd clipToCone(const Eigen::MatrixXcd& x, double margin) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(x);
  const Eigen::VectorXd lam = es.eigenvalues().cwiseMax(margin);
  const Eigen::MatrixXcd& u = es.eigenvectors();
  Eigen::MatrixXcd out = u * lam.cast<Complex>().asDiagonal() * u.adjoint();
  return 0.5 * (out + out.adjoint());
}

}  // namespace

CovarianceMatrix projectHeisenbergCone(const Eigen::MatrixXd& v, const ConeProjectionSettings& settings) {
  if (v.rows() != v.cols() || v.rows() % 2 != 0 || v.rows() == 0) {
    throw DimensionError("cone projection needs a square matrix of even size");
  }
  if ((v - v.transpose()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + v.cwiseAbs().maxCoeff())) {
    throw DimensionError("cone projection needs a symmetric matrix");
  }
  const Eigen::MatrixXd sym = 0.5 * (v + v.transpose());
  if (heisenbergMargin(sym) >= settings.margin) return CovarianceMatrix(sym);

  const int m = static_cast<int>(v.rows() / 2);
  const Eigen::MatrixXcd halfOmega = Complex(0.0, 0.5) * symplecticForm(m).cast<Complex>();
  Eigen::MatrixXcd x = sym.cast<Complex>() + halfOmega;
  Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(x.rows(), x.cols());
  Eigen::MatrixXcd y = x;
  double gap = 0.0;
  for (int it = 0; it < settings.maxIterations; ++it) {
    y = clipToCone(x + p, settings.margin);
    p = x + p - y;
    // The affine set is a translate of a subspace, so its Dykstra correction vanishes.
    Eigen::MatrixXcd next = y.real().cast<Complex>() + halfOmega;
    gap = (next - x).norm();
    x = std::move(next);
    if (gap < settings.tolerance) {
      Eigen::MatrixXd out = y.real();
      return CovarianceMatrix(0.5 * (out + out.transpose()));
    }
  }
  throw NumericalError("Heisenberg cone projection did not converge", gap);
}

}  // namespace quadtomo
