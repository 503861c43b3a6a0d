#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "quadtomo/imaging.hpp"
#include "quadtomo/measurement.hpp"
#include "quadtomo/modes.hpp"

namespace quadtomo {

// vec(V) keeps the independent entries only: upper triangle (j <= k) of V^{phi phi}, all of
// V^{phi rho} row-major, upper triangle of V^{rho rho}. Size 2M^2 + M.
int unknownCount(int modes);
Eigen::VectorXd vectorize(const Eigen::MatrixXd& v);
Eigen::MatrixXd devectorize(const Eigen::VectorXd& vec, int modes);
// Weights D with ||devectorize(x)||_F^2 = x^T D x.
Eigen::VectorXd frobeniusWeights(int modes);
// Human-readable name of an unknown, 1-based mode labels, e.g. "rhorho(2,3)".
std::string unknownLabel(int index, int modes);
// Modes an unknown refers to (0-based), for rank-deficiency reports.
std::pair<int, int> unknownModes(int index, int modes);

// Mode wavefunctions at the pixel positions: M x N_p, blurred or sampled at the nearest grid point.
Eigen::MatrixXd pixelWavefunctions(const ModeBasis& basis, const ImagingModel& imaging, bool convolved);

// f~^phi_k(z_a) by trapezoid quadrature of the normalized Gaussian kernel. M x N_p.
Eigen::MatrixXd convolveWavefunctions(const ModeBasis& basis, const ImagingModel& imaging);

// u(a, j) = f_j(z_a) - f_j(z_0); the four-index coefficient is f^{ab}_{jk} = u(a, j) u(b, k).
struct ReferencedCouplings {
  Eigen::MatrixXd u;  // N_p x M

  double operator()(int a, int b, int j, int k) const { return u(a, j) * u(b, k); }
  int modes() const { return static_cast<int>(u.cols()); }
};

ReferencedCouplings referencedCouplings(const Eigen::MatrixXd& pixelWf, const ImagingModel& imaging);

// Explicit cos/sin expansion of Phi(z_a, z_b, t) over the three blocks of V.
Eigen::MatrixXd predictCorrelationsAt(const CovarianceMatrix& v, const ReferencedCouplings& couplings,
                                      const Eigen::VectorXd& frequencies, double t);

// Same quantity by rotating V first and applying the static formula to the phase block.
Eigen::MatrixXd predictByEvolution(const CovarianceMatrix& v, const ReferencedCouplings& couplings,
                                   const Eigen::VectorXd& frequencies, double t);

std::vector<Eigen::MatrixXd> predictCorrelations(const CovarianceMatrix& v, const ModeBasis& basis,
                                                 const ImagingModel& imaging, const std::vector<double>& times,
                                                 bool convolved = false);

struct DesignRow {
  int timeIndex = 0;  // index into DesignSystem::times
  double t = 0.0;
  int a = 0;
  int b = 0;
};

struct DesignSystem {
  Eigen::MatrixXd a;  // rows x unknownCount(modes)
  Eigen::VectorXd b;
  Eigen::VectorXd w;  // diagonal of W, 1 / sigma
  std::vector<DesignRow> rows;
  std::vector<double> times;
  int modes = 0;

  int rowCount() const { return static_cast<int>(rows.size()); }
  std::string describeRow(int r) const;
};

// Precomputes unweighted design rows for every non-reference pixel pair at a fixed set of times,
// so repeated assemblies over resampled data only fill b and W.
class DesignSystemBuilder {
 public:
  DesignSystemBuilder(const ModeBasis& basis, const ImagingModel& imaging, const std::vector<double>& times,
                      bool convolved = false);

  // `timeIndices` index into measurements.times; their times must be among the builder's times.
  DesignSystem assemble(const MeasurementSet& measurements, const std::vector<int>& timeIndices) const;
  DesignSystem assemble(const MeasurementSet& measurements) const;

  Eigen::RowVectorXd row(int a, int b, double t) const;
  const ReferencedCouplings& couplings() const { return couplings_; }
  int modes() const { return couplings_.modes(); }

 private:
  ReferencedCouplings couplings_;
  Eigen::VectorXd frequencies_;
  ImagingModel imaging_;
  std::vector<double> times_;
  std::vector<std::pair<int, int>> pairs_;
  std::vector<Eigen::MatrixXd> blocks_;  // per time: pairs x unknowns
};

DesignSystem assembleDesignSystem(const MeasurementSet& measurements, const ModeBasis& basis,
                                  const ImagingModel& imaging, const std::vector<int>& includedTimes,
                                  bool convolved = false);

}  // namespace quadtomo
