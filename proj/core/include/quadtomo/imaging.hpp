#pragma once

#include <Eigen/Dense>

namespace quadtomo {

// Camera model: N_p pixels of size l centred on z = 0, one of them used as the phase reference.
struct ImagingModel {
  double pixelSize = 1.95;      // um
  int pixelCount = 19;
  int referenceIndex = 9;       // 0-based
  double convolutionSigma = 3.0;  // um, 0 disables the blur

  int centerIndex() const { return pixelCount / 2; }
  double pixelPosition(int a) const { return (a - centerIndex()) * pixelSize; }
  Eigen::VectorXd pixelPositions() const;
  double referencePosition() const { return pixelPosition(referenceIndex); }

  // Throws ConfigError when pixels leave [-R, R], sigma < 0 or the reference is off the camera.
  void validate(double halfLength) const;

  // Pixel index whose position matches z to within a quarter pixel, or -1.
  int pixelIndexOf(double z) const;
};

// Linear map from values on `grid` to Gaussian-averaged values at `targets`:
// row a holds trapezoid-weighted kernel exp(-(z - z_a)^2 / 2 sigma^2) truncated at 6 sigma and
// normalized to unit sum. sigma = 0 picks the nearest grid point (lower index on ties).
Eigen::MatrixXd imagingOperator(const Eigen::VectorXd& targets, const Eigen::VectorXd& grid, double sigma);

// Pixel operator of the camera on the given grid, with or without the blur.
Eigen::MatrixXd pixelOperator(const ImagingModel& imaging, const Eigen::VectorXd& grid, bool convolved = true);

}  // namespace quadtomo
