#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "quadtomo/imaging.hpp"

namespace quadtomo {

using BoolMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Referenced phase correlations Phi_est(z_a, z_b, t_i) on the camera pixels.
struct MeasurementSet {
  ImagingModel imaging;
  std::vector<double> times;               // ms
  std::vector<Eigen::MatrixXd> phi;        // N_p x N_p per time
  std::vector<Eigen::MatrixXd> stdError;   // N_p x N_p per time; NaN where unknown
  std::vector<BoolMatrix> included;        // false for reference rows and flagged entries
  std::vector<int> sampleCounts;           // per time

  int timeCount() const { return static_cast<int>(times.size()); }
  int pixelCount() const { return imaging.pixelCount; }

  // Empty set with every time prepared: zero phi, NaN errors, only the reference excluded.
  static MeasurementSet empty(const ImagingModel& imaging, const std::vector<double>& times);

  // Checks shapes, symmetry and zero reference rows. Throws DimensionError.
  void validate() const;

  // Index of t within times (1e-9 ms tolerance) or -1.
  int timeIndex(double t) const;

  // Restricted to the given time indices.
  MeasurementSet subset(const std::vector<int>& timeIndices) const;
};

// CSV with header t_ms,za_um,zb_um,phi,phi_std,n_sample and one row per unordered pixel pair
// a <= b (reference rows included, written with zero values). Lines starting with '#' are comments.
// On reading, a row whose phi and phi_std are both exactly zero is treated as flagged;
// pairs absent from the file stay unknown.
void writeMeasurementCsv(const std::string& path, const MeasurementSet& m, const std::string& headerComment = "");
MeasurementSet readMeasurementCsv(const std::string& path, const ImagingModel& imaging);
std::string formatMeasurementCsv(const MeasurementSet& m, const std::string& headerComment = "");
MeasurementSet parseMeasurementCsv(const std::string& text, const ImagingModel& imaging);

}  // namespace quadtomo
