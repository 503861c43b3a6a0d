#include <cmath>
#include <string>

#include "quadtomo/errors.hpp"
#include "quadtomo/imaging.hpp"

namespace quadtomo {

Eigen::VectorXd ImagingModel::pixelPositions() const {
  Eigen::VectorXd z(pixelCount);
  for (int a = 0; a < pixelCount; ++a) z(a) = pixelPosition(a);
  return z;
}

void ImagingModel::validate(double halfLength) const {
  if (!(pixelSize > 0.0)) throw ConfigError("pixel size must be positive");
  if (pixelCount < 2) throw ConfigError("need at least two pixels");
  if (!(convolutionSigma >= 0.0)) throw ConfigError("convolution sigma must be non-negative");
  if (referenceIndex < 0 || referenceIndex >= pixelCount) {
    throw ConfigError("reference pixel " + std::to_string(referenceIndex + 1) + " is outside the pixel set");
  }
  const double extent = std::max(std::abs(pixelPosition(0)), std::abs(pixelPosition(pixelCount - 1)));
  if (halfLength > 0.0 && extent > halfLength + 1e-12) {
    throw ConfigError("pixels extend to " + std::to_string(extent) + " um, beyond the box half length " +
                      std::to_string(halfLength) + " um");
  }
}

int ImagingModel::pixelIndexOf(double z) const {
  const double x = z / pixelSize + centerIndex();
  const int a = static_cast<int>(std::lround(x));
  if (a < 0 || a >= pixelCount || std::abs(x - a) > 0.25) return -1;
  return a;
}

Eigen::MatrixXd imagingOperator(const Eigen::VectorXd& targets, const Eigen::VectorXd& grid, double sigma) {
  const Eigen::Index n = grid.size();
  const Eigen::Index m = targets.size();
  if (n < 2) throw DimensionError("imaging operator needs a grid with at least two points");
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(m, n);
  for (Eigen::Index a = 0; a < m; ++a) {
    if (sigma <= 0.0) {
      Eigen::Index best = 0;
      double bestDist = std::abs(grid(0) - targets(a));
      for (Eigen::Index l = 1; l < n; ++l) {
        const double d = std::abs(grid(l) - targets(a));
        if (d < bestDist - 1e-12 * (1.0 + std::abs(targets(a)))) {
          best = l;
          bestDist = d;
        }
      }
      k(a, best) = 1.0;
      continue;
    }
    double total = 0.0;
    for (Eigen::Index l = 0; l < n; ++l) {
      const double u = (grid(l) - targets(a)) / sigma;
      if (std::abs(u) > 6.0) continue;
      const double trapezoid = (l == 0 || l == n - 1) ? 0.5 : 1.0;
      k(a, l) = trapezoid * std::exp(-0.5 * u * u);
      total += k(a, l);
    }
    if (!(total > 0.0)) throw ConfigError("imaging kernel does not overlap the grid");
    k.row(a) /= total;
  }
  return k;
}

Eigen::MatrixXd pixelOperator(const ImagingModel& imaging, const Eigen::VectorXd& grid, bool convolved) {
  return imagingOperator(imaging.pixelPositions(), grid, convolved ? imaging.convolutionSigma : 0.0);
}

}  // namespace quadtomo
