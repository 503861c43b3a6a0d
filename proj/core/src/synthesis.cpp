#include <cmath>
#include <random>
#include <string>

#include "quadtomo/errors.hpp"
#include "quadtomo/rng.hpp"
#include "quadtomo/synthesis.hpp"
#include "quadtomo/units.hpp"

namespace quadtomo {

Statistics parseStatistics(const std::string& name) {
  if (name == "classical" || name == "classicalField") return Statistics::ClassicalField;
  if (name == "quantum" || name == "quantumCoth") return Statistics::QuantumCoth;
  throw ConfigError("unknown statistics '" + name + "' (expected classical or quantum)");
}

std::string statisticsName(Statistics s) { return s == Statistics::ClassicalField ? "classical" : "quantum"; }

void ThermalSpec::validate() const {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) throw ConfigError("temperature must be positive");
  if (!(tunnelCoupling >= 0.0)) throw ConfigError("tunnel coupling must be non-negative");
}

Eigen::VectorXd thermalMoments(const Eigen::VectorXd& frequencies, const ThermalSpec& spec) {
  spec.validate();
  const double kT = units::thermalEnergy(spec.temperature);
  Eigen::VectorXd out(frequencies.size());
  for (Eigen::Index k = 0; k < frequencies.size(); ++k) {
    const double w = frequencies(k);
    if (!(w > 0.0)) {
      throw SingularityError("thermal state of a zero mode is not normalizable; use a preparation Hamiltonian with "
                             "tunnel coupling J > 0");
    }
    out(k) = spec.statistics == Statistics::ClassicalField ? kT / w : 0.5 / std::tanh(0.5 * w / kT);
  }
  return out;
}

CovarianceMatrix thermalCovariance(const ModeBasis& basis, const ThermalSpec& spec) {
  if (basis.zeroModeCount > 0 && spec.statistics == Statistics::ClassicalField) {
    throw SingularityError("preparation basis has a zero mode; classical thermal moments need J > 0");
  }
  const Eigen::VectorXd moments = thermalMoments(basis.frequencies, spec);
  const int m = basis.cutoff;
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  v.diagonal() << moments, moments;
  return CovarianceMatrix(v);
}

BasisChange basisChange(const ModeBasis& from, const ModeBasis& to) {
  if (from.fullPhi.rows() != to.fullPhi.rows()) throw DimensionError("mode bases live on different grids");
  return {to.fullRho.transpose() * from.fullPhi, to.fullPhi.transpose() * from.fullRho};
}

Eigen::MatrixXd fullCovarianceInBasis(const Eigen::VectorXd& phiMoments, const Eigen::VectorXd& rhoMoments,
                                      const ModeBasis& from, const ModeBasis& to) {
  const Eigen::Index n = from.fullPhi.cols();
  if (phiMoments.size() != n || rhoMoments.size() != n) throw DimensionError("moments must cover every mode");
  const BasisChange map = basisChange(from, to);
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  v.topLeftCorner(n, n) = map.mapPhi * phiMoments.asDiagonal() * map.mapPhi.transpose();
  v.bottomRightCorner(n, n) = map.mapRho * rhoMoments.asDiagonal() * map.mapRho.transpose();
  return 0.5 * (v + v.transpose());
}

CovarianceMatrix retainedBlock(const Eigen::MatrixXd& full, const ModeBasis& basis) {
  const Eigen::Index n = full.rows() / 2;
  const int z = basis.zeroModeCount;
  const int m = basis.cutoff;
  if (n != basis.fullPhi.cols()) throw DimensionError("full covariance does not match the basis");
  Eigen::MatrixXd v(2 * m, 2 * m);
  v << full.block(z, z, m, m), full.block(z, n + z, m, m), full.block(n + z, z, m, m), full.block(n + z, n + z, m, m);
  return CovarianceMatrix(v);
}

QuenchTruth::QuenchTruth(const ModeBasis& preparation, const ModeBasis& quench, const ThermalSpec& spec)
    : quench_(quench) {
  if (preparation.zeroModeCount > 0) {
    throw SingularityError("preparation Hamiltonian has a zero mode; set the tunnel coupling J > 0");
  }
  const Eigen::VectorXd moments = thermalMoments(preparation.allFrequencies, spec);
  full_ = fullCovarianceInBasis(moments, moments, preparation, quench);
}

namespace {

Eigen::MatrixXd evolvedPhaseBlock(const Eigen::MatrixXd& full, const Eigen::VectorXd& w, double t) {
  const Eigen::Index n = w.size();
  Eigen::ArrayXd c(n), s(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    c(k) = std::cos(w(k) * t);
    s(k) = std::sin(w(k) * t);
  }
  const Eigen::MatrixXd cross = c.matrix().asDiagonal() * full.topRightCorner(n, n) * s.matrix().asDiagonal();
  Eigen::MatrixXd out = c.matrix().asDiagonal() * full.topLeftCorner(n, n) * c.matrix().asDiagonal() +
                        s.matrix().asDiagonal() * full.bottomRightCorner(n, n) * s.matrix().asDiagonal() - cross -
                        cross.transpose();
  return 0.5 * (out + out.transpose());
}

}  // namespace

Eigen::MatrixXd QuenchTruth::realSpacePhase(double t) const {
  const Eigen::MatrixXd f = quench_.fullPhi / std::sqrt(quench_.deltaZ);
  const Eigen::MatrixXd block = evolvedPhaseBlock(full_, quench_.allFrequencies, t);
  Eigen::MatrixXd gamma = f * block * f.transpose();
  return 0.5 * (gamma + gamma.transpose());
}

Eigen::MatrixXd QuenchTruth::referencedPixelCorrelations(double t, const ImagingModel& imaging, bool convolved) const {
  Eigen::MatrixXd u = pixelOperator(imaging, quench_.gridPoints, convolved) * quench_.fullPhi /
                      std::sqrt(quench_.deltaZ);
  const Eigen::RowVectorXd ref = u.row(imaging.referenceIndex);
  u.rowwise() -= ref;
  u.row(imaging.referenceIndex).setZero();
  Eigen::MatrixXd phi = u * evolvedPhaseBlock(full_, quench_.allFrequencies, t) * u.transpose();
  return 0.5 * (phi + phi.transpose());
}

Eigen::MatrixXd referencedPixelCovariance(const Eigen::MatrixXd& gamma, const Eigen::MatrixXd& pixelOp,
                                          int referenceIndex) {
  const Eigen::MatrixXd p = pixelOp * gamma * pixelOp.transpose();
  const Eigen::Index np = p.rows();
  Eigen::MatrixXd phi(np, np);
  for (Eigen::Index a = 0; a < np; ++a) {
    for (Eigen::Index b = 0; b < np; ++b) {
      phi(a, b) = p(a, b) - p(a, referenceIndex) - p(referenceIndex, b) + p(referenceIndex, referenceIndex);
    }
  }
  phi.row(referenceIndex).setZero();
  phi.col(referenceIndex).setZero();
  return 0.5 * (phi + phi.transpose());
}

PhaseProfileSampler::PhaseProfileSampler(const Eigen::MatrixXd& gamma, const Eigen::VectorXd& grid,
                                         const ImagingModel& imaging)
    : reference_(imaging.referenceIndex) {
  if (gamma.rows() != gamma.cols() || gamma.rows() != grid.size()) {
    throw DimensionError("covariance does not match the grid");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (gamma + gamma.transpose()));
  const Eigen::VectorXd& lam = es.eigenvalues();
  const double top = std::max(lam.maxCoeff(), 0.0);
  if (lam.minCoeff() < -1e-9 * std::max(top, 1.0)) {
    throw ConfigError("phase covariance is indefinite (smallest eigenvalue " + std::to_string(lam.minCoeff()) + ")");
  }
  std::vector<int> keep;
  for (Eigen::Index q = 0; q < lam.size(); ++q) {
    if (lam(q) > 1e-14 * top && top > 0.0) keep.push_back(static_cast<int>(q));
  }
  Eigen::MatrixXd root(grid.size(), keep.size());
  for (std::size_t r = 0; r < keep.size(); ++r) root.col(r) = es.eigenvectors().col(keep[r]) * std::sqrt(lam(keep[r]));
  map_ = pixelOperator(imaging, grid, true) * root;
  const Eigen::RowVectorXd ref = map_.row(reference_);
  map_.rowwise() -= ref;
  map_.row(reference_).setZero();
}

Eigen::MatrixXd PhaseProfileSampler::sample(int n, std::uint64_t seed, std::uint64_t stream) const {
  if (n < 0) throw ConfigError("sample count must be non-negative");
  Philox4x32 gen(seed, stream);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd xi(map_.cols(), n);
  for (int i = 0; i < n; ++i)
    for (Eigen::Index r = 0; r < map_.cols(); ++r) xi(r, i) = normal(gen);
  Eigen::MatrixXd y = (map_ * xi).transpose();
  y.col(reference_).setZero();
  return y;
}

Eigen::MatrixXd PhaseProfileSampler::pixelCovariance() const { return map_ * map_.transpose(); }

PhaseProfileSamples samplePhaseProfiles(const std::vector<Eigen::MatrixXd>& gammas, const std::vector<double>& times,
                                        const Eigen::VectorXd& grid, const ImagingModel& imaging, int nSample,
                                        std::uint64_t seed, std::uint64_t repeat) {
  if (gammas.size() != times.size()) throw DimensionError("one covariance per time is required");
  if (nSample < 1) throw ConfigError("sample count must be positive");
  PhaseProfileSamples out;
  out.times = times;
  out.seed = seed;
  out.referenceIndex = imaging.referenceIndex;
  for (std::size_t i = 0; i < times.size(); ++i) {
    PhaseProfileSampler sampler(gammas[i], grid, imaging);
    out.profiles.push_back(sampler.sample(nSample, seed, deriveStream(repeat, i)));
  }
  return out;
}

namespace {

void fillEstimate(const Eigen::MatrixXd& y, MeasurementSet& m, int i) {
  const Eigen::Index n = y.rows();
  const Eigen::Index np = y.cols();
  const int ref = m.imaging.referenceIndex;
  const Eigen::MatrixXd mean = y.transpose() * y / static_cast<double>(n);
  const Eigen::MatrixXd sq = y.array().square().matrix();
  const Eigen::MatrixXd meanSq = sq.transpose() * sq / static_cast<double>(n);
  m.sampleCounts[i] = static_cast<int>(n);
  for (Eigen::Index a = 0; a < np; ++a) {
    for (Eigen::Index b = 0; b < np; ++b) {
      if (a == ref || b == ref) continue;
      const double phi = 0.5 * (mean(a, b) + mean(b, a));
      const double var = n > 1 ? std::max(meanSq(a, b) - phi * phi, 0.0) * n / (n - 1.0) : 0.0;
      const double err = std::sqrt(var / n);
      m.phi[i](a, b) = phi;
      m.stdError[i](a, b) = err;
      m.included[i](a, b) = err > 0.0;
    }
  }
}

}  // namespace

MeasurementSet estimateCorrelations(const PhaseProfileSamples& samples, const ImagingModel& imaging) {
  MeasurementSet m = MeasurementSet::empty(imaging, samples.times);
  for (std::size_t i = 0; i < samples.times.size(); ++i) {
    const Eigen::MatrixXd& y = samples.profiles[i];
    if (y.cols() != imaging.pixelCount) throw DimensionError("profiles do not match the pixel count");
    if (y.rows() < 2) throw ConfigError("the estimator needs at least two shots");
    fillEstimate(y, m, static_cast<int>(i));
  }
  return m;
}

MeasurementSet estimateCorrelations(const PhaseProfileSamples& samples, const ImagingModel& imaging,
                                    const std::vector<std::vector<int>>& rows) {
  if (rows.size() != samples.times.size()) throw DimensionError("one row selection per time is required");
  MeasurementSet m = MeasurementSet::empty(imaging, samples.times);
  for (std::size_t i = 0; i < samples.times.size(); ++i) {
    const Eigen::MatrixXd& src = samples.profiles[i];
    if (rows[i].size() < 2) throw ConfigError("the estimator needs at least two shots");
    Eigen::MatrixXd y(rows[i].size(), src.cols());
    for (std::size_t r = 0; r < rows[i].size(); ++r) y.row(r) = src.row(rows[i][r]);
    fillEstimate(y, m, static_cast<int>(i));
  }
  return m;
}

MeasurementSet exactMeasurements(const ImagingModel& imaging, const std::vector<double>& times,
                                 const std::vector<Eigen::MatrixXd>& phi, int nSample) {
  if (phi.size() != times.size()) throw DimensionError("one correlation matrix per time is required");
  if (nSample < 1) throw ConfigError("sample count must be positive");
  MeasurementSet m = MeasurementSet::empty(imaging, times);
  const int np = imaging.pixelCount;
  const int ref = imaging.referenceIndex;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const Eigen::MatrixXd& p = phi[i];
    if (p.rows() != np || p.cols() != np) throw DimensionError("correlations must be N_p x N_p");
    m.sampleCounts[i] = nSample;
    for (int a = 0; a < np; ++a) {
      for (int b = 0; b < np; ++b) {
        if (a == ref || b == ref) continue;
        const double value = 0.5 * (p(a, b) + p(b, a));
        const double err = std::sqrt(std::max(p(a, a) * p(b, b) + value * value, 0.0) / nSample);
        m.phi[i](a, b) = value;
        m.stdError[i](a, b) = err;
        m.included[i](a, b) = err > 0.0;
      }
    }
  }
  return m;
}

}  // namespace quadtomo
