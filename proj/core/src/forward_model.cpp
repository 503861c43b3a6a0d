#include <cmath>
#include <string>

#include "quadtomo/errors.hpp"
#include "quadtomo/forward_model.hpp"

namespace quadtomo {

int unknownCount(int modes) { return 2 * modes * modes + modes; }

namespace {

int triangleCount(int m) { return m * (m + 1) / 2; }

}  // namespace

Eigen::VectorXd vectorize(const Eigen::MatrixXd& v) {
  const int m = static_cast<int>(v.rows() / 2);
  Eigen::VectorXd out(unknownCount(m));
  int idx = 0;
  for (int j = 0; j < m; ++j)
    for (int k = j; k < m; ++k) out(idx++) = v(j, k);
  for (int j = 0; j < m; ++j)
    for (int k = 0; k < m; ++k) out(idx++) = v(j, m + k);
  for (int j = 0; j < m; ++j)
    for (int k = j; k < m; ++k) out(idx++) = v(m + j, m + k);
  return out;
}

Eigen::MatrixXd devectorize(const Eigen::VectorXd& vec, int m) {
  if (vec.size() != unknownCount(m)) throw DimensionError("vector length does not match the mode count");
  Eigen::MatrixXd v(2 * m, 2 * m);
  int idx = 0;
  for (int j = 0; j < m; ++j)
    for (int k = j; k < m; ++k) v(j, k) = v(k, j) = vec(idx++);
  for (int j = 0; j < m; ++j)
    for (int k = 0; k < m; ++k) v(j, m + k) = v(m + k, j) = vec(idx++);
  for (int j = 0; j < m; ++j)
    for (int k = j; k < m; ++k) v(m + j, m + k) = v(m + k, m + j) = vec(idx++);
  return v;
}

Eigen::VectorXd frobeniusWeights(int m) {
  Eigen::VectorXd d(unknownCount(m));
  int idx = 0;
  for (int j = 0; j < m; ++j)
    for (int k = j; k < m; ++k) d(idx++) = j == k ? 1.0 : 2.0;
  for (int j = 0; j < m * m; ++j) d(idx++) = 2.0;
  for (int j = 0; j < m; ++j)
    for (int k = j; k < m; ++k) d(idx++) = j == k ? 1.0 : 2.0;
  return d;
}

std::pair<int, int> unknownModes(int index, int m) {
  const int tri = triangleCount(m);
  auto fromTriangle = [m](int r) {
    for (int j = 0; j < m; ++j) {
      const int len = m - j;
      if (r < len) return std::pair<int, int>{j, j + r};
      r -= len;
    }
    return std::pair<int, int>{-1, -1};
  };
  if (index < tri) return fromTriangle(index);
  if (index < tri + m * m) return {(index - tri) / m, (index - tri) % m};
  return fromTriangle(index - tri - m * m);
}

std::string unknownLabel(int index, int m) {
  const int tri = triangleCount(m);
  const auto [j, k] = unknownModes(index, m);
  const char* block = index < tri ? "phiphi" : (index < tri + m * m ? "phirho" : "rhorho");
  return std::string(block) + "(" + std::to_string(j + 1) + "," + std::to_string(k + 1) + ")";
}

Eigen::MatrixXd pixelWavefunctions(const ModeBasis& basis, const ImagingModel& imaging, bool convolved) {
  const Eigen::MatrixXd k = pixelOperator(imaging, basis.gridPoints, convolved);
  return basis.phiWavefunctions * k.transpose();
}

Eigen::MatrixXd convolveWavefunctions(const ModeBasis& basis, const ImagingModel& imaging) {
  return pixelWavefunctions(basis, imaging, true);
}

ReferencedCouplings referencedCouplings(const Eigen::MatrixXd& pixelWf, const ImagingModel& imaging) {
  if (imaging.referenceIndex < 0 || imaging.referenceIndex >= imaging.pixelCount) {
    throw ConfigError("reference pixel is outside the pixel set");
  }
  if (pixelWf.cols() != imaging.pixelCount) throw DimensionError("wavefunctions do not cover every pixel");
  ReferencedCouplings c;
  c.u = pixelWf.transpose();
  const Eigen::RowVectorXd ref = c.u.row(imaging.referenceIndex);
  c.u.rowwise() -= ref;
  c.u.row(imaging.referenceIndex).setZero();
  return c;
}

Eigen::MatrixXd predictCorrelationsAt(const CovarianceMatrix& v, const ReferencedCouplings& couplings,
                                      const Eigen::VectorXd& frequencies, double t) {
  const int m = couplings.modes();
  if (v.modeCount() != m || frequencies.size() != m) throw DimensionError("covariance, couplings and frequencies disagree");
  const Eigen::MatrixXd& u = couplings.u;
  const Eigen::Index np = u.rows();
  Eigen::VectorXd c(m), s(m);
  for (int k = 0; k < m; ++k) {
    c(k) = std::cos(frequencies(k) * t);
    s(k) = std::sin(frequencies(k) * t);
  }
  const Eigen::MatrixXd vpp = v.phiPhi();
  const Eigen::MatrixXd vpr = v.phiRho();
  const Eigen::MatrixXd vrr = v.rhoRho();
  Eigen::MatrixXd phi(np, np);
  for (Eigen::Index a = 0; a < np; ++a) {
    for (Eigen::Index b = a; b < np; ++b) {
      double sum = 0.0;
      for (int j = 0; j < m; ++j) {
        for (int k = 0; k < m; ++k) {
          const double fab = u(a, j) * u(b, k);
          const double fba = u(b, j) * u(a, k);
          sum += fab * (c(j) * c(k) * vpp(j, k) + s(j) * s(k) * vrr(j, k));
          sum -= (fab + fba) * c(j) * s(k) * vpr(j, k);
        }
      }
      phi(a, b) = phi(b, a) = sum;
    }
  }
  return phi;
}

Eigen::MatrixXd predictByEvolution(const CovarianceMatrix& v, const ReferencedCouplings& couplings,
                                   const Eigen::VectorXd& frequencies, double t) {
  const Eigen::MatrixXd g = rotationMatrix(frequencies, t);
  const CovarianceMatrix vt(g * v.matrix() * g.transpose());
  Eigen::MatrixXd phi = couplings.u * vt.phiPhi() * couplings.u.transpose();
  return 0.5 * (phi + phi.transpose());
}

std::vector<Eigen::MatrixXd> predictCorrelations(const CovarianceMatrix& v, const ModeBasis& basis,
                                                 const ImagingModel& imaging, const std::vector<double>& times,
                                                 bool convolved) {
  const ReferencedCouplings couplings = referencedCouplings(pixelWavefunctions(basis, imaging, convolved), imaging);
  std::vector<Eigen::MatrixXd> out;
  out.reserve(times.size());
  for (double t : times) {
    if (!std::isfinite(t)) throw RangeError("prediction time is not finite");
    out.push_back(predictCorrelationsAt(v, couplings, basis.frequencies, t));
  }
  return out;
}

std::string DesignSystem::describeRow(int r) const {
  const DesignRow& row = rows.at(r);
  return "row " + std::to_string(r) + " (t = " + std::to_string(row.t) + " ms, pixels " + std::to_string(row.a + 1) +
         ", " + std::to_string(row.b + 1) + ")";
}

DesignSystemBuilder::DesignSystemBuilder(const ModeBasis& basis, const ImagingModel& imaging,
                                         const std::vector<double>& times, bool convolved)
    : couplings_(referencedCouplings(pixelWavefunctions(basis, imaging, convolved), imaging)),
      frequencies_(basis.frequencies),
      imaging_(imaging),
      times_(times) {
  for (int a = 0; a < imaging.pixelCount; ++a) {
    if (a == imaging.referenceIndex) continue;
    for (int b = a; b < imaging.pixelCount; ++b) {
      if (b != imaging.referenceIndex) pairs_.emplace_back(a, b);
    }
  }
  const int p = unknownCount(modes());
  for (double t : times_) {
    Eigen::MatrixXd block(pairs_.size(), p);
    for (std::size_t r = 0; r < pairs_.size(); ++r) block.row(r) = row(pairs_[r].first, pairs_[r].second, t);
    blocks_.push_back(std::move(block));
  }
}

Eigen::RowVectorXd DesignSystemBuilder::row(int a, int b, double t) const {
  const int m = modes();
  const Eigen::MatrixXd& u = couplings_.u;
  Eigen::VectorXd c(m), s(m);
  for (int k = 0; k < m; ++k) {
    c(k) = std::cos(frequencies_(k) * t);
    s(k) = std::sin(frequencies_(k) * t);
  }
  Eigen::RowVectorXd out(unknownCount(m));
  int idx = 0;
  for (int j = 0; j < m; ++j) {
    for (int k = j; k < m; ++k) {
      double f = u(a, j) * u(b, k);
      if (j != k) f += u(a, k) * u(b, j);
      out(idx++) = f * c(j) * c(k);
    }
  }
  for (int j = 0; j < m; ++j) {
    for (int k = 0; k < m; ++k) out(idx++) = -(u(a, j) * u(b, k) + u(b, j) * u(a, k)) * c(j) * s(k);
  }
  for (int j = 0; j < m; ++j) {
    for (int k = j; k < m; ++k) {
      double f = u(a, j) * u(b, k);
      if (j != k) f += u(a, k) * u(b, j);
      out(idx++) = f * s(j) * s(k);
    }
  }
  return out;
}

DesignSystem DesignSystemBuilder::assemble(const MeasurementSet& measurements) const {
  std::vector<int> all(measurements.timeCount());
  for (int i = 0; i < measurements.timeCount(); ++i) all[i] = i;
  return assemble(measurements, all);
}

DesignSystem DesignSystemBuilder::assemble(const MeasurementSet& measurements,
                                           const std::vector<int>& timeIndices) const {
  if (measurements.pixelCount() != imaging_.pixelCount ||
      measurements.imaging.referenceIndex != imaging_.referenceIndex) {
    throw DimensionError("measurement pixels do not match the imaging model");
  }
  if (timeIndices.empty()) throw RangeError("no measurement times selected");
  const int p = unknownCount(modes());

  struct Pick {
    int block, pair, timeSlot, measIndex;
  };
  std::vector<Pick> picks;
  DesignSystem sys;
  sys.modes = modes();
  for (int slot = 0; slot < static_cast<int>(timeIndices.size()); ++slot) {
    const int i = timeIndices[slot];
    if (i < 0 || i >= measurements.timeCount()) throw RangeError("time index " + std::to_string(i) + " out of range");
    const double t = measurements.times[i];
    int block = -1;
    for (std::size_t q = 0; q < times_.size(); ++q) {
      if (std::abs(times_[q] - t) <= 1e-9) block = static_cast<int>(q);
    }
    if (block < 0) throw RangeError("time " + std::to_string(t) + " ms was not prepared in the design builder");
    sys.times.push_back(t);
    for (std::size_t r = 0; r < pairs_.size(); ++r) {
      const auto [a, b] = pairs_[r];
      if (!measurements.included[i](a, b)) continue;
      picks.push_back({block, static_cast<int>(r), slot, i});
    }
  }
  if (picks.empty()) throw RangeError("no included observations in the selected times");

  sys.a.resize(picks.size(), p);
  sys.b.resize(picks.size());
  sys.w.resize(picks.size());
  for (std::size_t r = 0; r < picks.size(); ++r) {
    const Pick& pk = picks[r];
    const auto [a, b] = pairs_[pk.pair];
    sys.rows.push_back({pk.timeSlot, sys.times[pk.timeSlot], a, b});
    const double sigma = measurements.stdError[pk.measIndex](a, b);
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
      throw WeightingError("zero or missing standard error on " + sys.describeRow(static_cast<int>(r)));
    }
    sys.a.row(r) = blocks_[pk.block].row(pk.pair);
    sys.b(r) = measurements.phi[pk.measIndex](a, b);
    sys.w(r) = 1.0 / sigma;
  }
  return sys;
}

DesignSystem assembleDesignSystem(const MeasurementSet& measurements, const ModeBasis& basis,
                                  const ImagingModel& imaging, const std::vector<int>& includedTimes,
                                  bool convolved) {
  std::vector<double> times;
  for (int i : includedTimes) {
    if (i < 0 || i >= measurements.timeCount()) throw RangeError("time index " + std::to_string(i) + " out of range");
    times.push_back(measurements.times[i]);
  }
  DesignSystemBuilder builder(basis, imaging, times, convolved);
  return builder.assemble(measurements, includedTimes);
}

}  // namespace quadtomo
