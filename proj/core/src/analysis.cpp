#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "quadtomo/analysis.hpp"
#include "quadtomo/errors.hpp"
#include "quadtomo/parallel.hpp"
#include "quadtomo/rng.hpp"
#include "quadtomo/units.hpp"

namespace quadtomo {

ReconstructionResult reconstructWindow(const MeasurementSet& measurements, const std::vector<int>& timeIndices,
                                       const ReconstructionSetup& setup, double timeOrigin) {
  MeasurementSet shifted = measurements.subset(timeIndices);
  for (double& t : shifted.times) t -= timeOrigin;
  DesignSystemBuilder builder(setup.basis, setup.imaging, shifted.times, setup.convolvedModes);
  const DesignSystem system = builder.assemble(shifted);
  ReconstructionResult result = solveConstrainedLeastSquares(system, setup.solver);
  for (double& t : result.inputWindow) t += timeOrigin;
  return result;
}

std::vector<std::pair<int, int>> pairsAtSeparation(const ImagingModel& imaging, double zbar, Diagnostics* diagnostics,
                                                   double* usedSeparation) {
  const double target = std::abs(zbar);
  const double half = 0.5 * imaging.pixelSize;
  std::vector<std::pair<int, int>> pairs;
  auto collect = [&](double sep) {
    pairs.clear();
    for (int a = 0; a < imaging.pixelCount; ++a) {
      for (int b = a; b < imaging.pixelCount; ++b) {
        const double d = std::abs(imaging.pixelPosition(b) - imaging.pixelPosition(a));
        if (std::abs(d - sep) < half) pairs.emplace_back(a, b);
      }
    }
  };
  collect(target);
  double used = target;
  if (pairs.empty()) {
    const double maxSep = (imaging.pixelCount - 1) * imaging.pixelSize;
    used = std::min(std::round(target / imaging.pixelSize) * imaging.pixelSize, maxSep);
    collect(used);
    if (diagnostics) {
      diagnostics->warn("separation " + std::to_string(zbar) + " um is not on the pixel grid; using " +
                        std::to_string(used) + " um");
    }
  }
  if (usedSeparation) *usedSeparation = used;
  return pairs;
}

double cosineFromCovariance(const Eigen::MatrixXd& phi, const std::vector<std::pair<int, int>>& pairs) {
  if (pairs.empty()) throw RangeError("no pixel pairs for the correlator");
  double sum = 0.0;
  for (const auto& [a, b] : pairs) {
    const double var = std::max(phi(a, a) + phi(b, b) - 2.0 * phi(a, b), 0.0);
    sum += std::exp(-0.5 * var);
  }
  return sum / pairs.size();
}

double cosineFromSamples(const Eigen::MatrixXd& profiles, const std::vector<std::pair<int, int>>& pairs) {
  if (pairs.empty()) throw RangeError("no pixel pairs for the correlator");
  if (profiles.rows() < 2) throw ConfigError("the sample correlator needs at least two shots");
  double sum = 0.0;
  for (const auto& [a, b] : pairs) sum += (profiles.col(a) - profiles.col(b)).array().cos().mean();
  return sum / pairs.size();
}

Eigen::MatrixXd cosineCorrelator(const CovarianceMatrix& v, const ModeBasis& basis, const ImagingModel& imaging,
                                 const std::vector<double>& separations, const std::vector<double>& times,
                                 bool convolvedModes, Diagnostics* diagnostics) {
  const ReferencedCouplings couplings =
      referencedCouplings(pixelWavefunctions(basis, imaging, convolvedModes), imaging);
  std::vector<std::vector<std::pair<int, int>>> pairSets;
  for (double zbar : separations) pairSets.push_back(pairsAtSeparation(imaging, zbar, diagnostics));
  Eigen::MatrixXd c(times.size(), separations.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    const Eigen::MatrixXd phi = predictByEvolution(v, couplings, basis.frequencies, times[i]);
    for (std::size_t s = 0; s < separations.size(); ++s) c(i, s) = cosineFromCovariance(phi, pairSets[s]);
  }
  return c;
}

Eigen::MatrixXd cosineCorrelator(const PhaseProfileSamples& samples, const ImagingModel& imaging,
                                 const std::vector<double>& separations, Diagnostics* diagnostics) {
  Eigen::MatrixXd c(samples.times.size(), separations.size());
  for (std::size_t s = 0; s < separations.size(); ++s) {
    const auto pairs = pairsAtSeparation(imaging, separations[s], diagnostics);
    for (std::size_t i = 0; i < samples.times.size(); ++i) c(i, s) = cosineFromSamples(samples.profiles[i], pairs);
  }
  return c;
}

OccupationEntry phononOccupations(const CovarianceMatrix& v, const Eigen::VectorXd& frequencies) {
  const int m = v.modeCount();
  if (frequencies.size() < m) throw DimensionError("fewer frequencies than modes in the covariance");
  OccupationEntry e;
  e.phiMoments = v.matrix().diagonal().head(m);
  e.rhoMoments = v.matrix().diagonal().tail(m);
  e.occupations = 0.5 * (e.phiMoments + e.rhoMoments).array() - 0.5;
  e.energy = frequencies.head(m).dot(e.occupations);
  return e;
}

OccupationEntry phononOccupations(const ReconstructionResult& result, const ModeBasis& basis) {
  return phononOccupations(result.v, basis.frequencies);
}

OccupationSeries slidingWindowReconstruction(const MeasurementSet& measurements, int windowLength,
                                             const ReconstructionSetup& setup, unsigned threads) {
  const int count = measurements.timeCount();
  if (windowLength < 1 || windowLength > count) {
    throw RangeError("window length " + std::to_string(windowLength) + " exceeds the " + std::to_string(count) +
                     " available times");
  }
  if (count >= 3) {
    const double dt = measurements.times[1] - measurements.times[0];
    for (int i = 2; i < count; ++i) {
      const double step = measurements.times[i] - measurements.times[i - 1];
      if (std::abs(step - dt) > 1e-6 * std::max(1.0, std::abs(dt))) {
        throw RangeError("sliding windows need equidistant measurement times");
      }
    }
  }
  const int windows = count - windowLength + 1;
  const int m = setup.basis.cutoff;

  // Every window has the same relative times, so one builder serves them all.
  std::vector<double> relative;
  for (int i = 0; i < windowLength; ++i) relative.push_back(measurements.times[i] - measurements.times[0]);
  const DesignSystemBuilder builder(setup.basis, setup.imaging, relative, setup.convolvedModes);

  OccupationSeries series;
  series.results.resize(windows);
  parallelFor(static_cast<std::size_t>(windows), threads, [&](std::size_t s) {
    std::vector<int> idx(windowLength);
    for (int i = 0; i < windowLength; ++i) idx[i] = static_cast<int>(s) + i;
    MeasurementSet window = measurements.subset(idx);
    const double origin = window.times.front();
    for (int i = 0; i < windowLength; ++i) window.times[i] = relative[i];
    ReconstructionResult r = solveConstrainedLeastSquares(builder.assemble(window), setup.solver);
    for (double& t : r.inputWindow) t += origin;
    series.results[s] = std::move(r);
  });
  series.occupations.resize(windows, m);
  series.phiMoments.resize(windows, m);
  series.rhoMoments.resize(windows, m);
  series.energy.resize(windows);
  for (int s = 0; s < windows; ++s) {
    series.windowStartTimes.push_back(measurements.times[s]);
    const OccupationEntry e = phononOccupations(series.results[s], setup.basis);
    series.occupations.row(s) = e.occupations.transpose();
    series.phiMoments.row(s) = e.phiMoments.transpose();
    series.rhoMoments.row(s) = e.rhoMoments.transpose();
    series.energy(s) = e.energy;
  }
  return series;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw RangeError("percentile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(q, 0.0, 1.0) * (values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - lo) * (values[hi] - values[lo]);
}

BootstrapResult bootstrapConfidence(const PhaseProfileSamples& samples, const ImagingModel& imaging,
                                    const ScalarPipeline& pipeline, const BootstrapSettings& settings) {
  if (settings.replicas < 10) {
    throw ConfigError("bootstrap needs at least 10 replicas for percentile intervals (500 is customary)");
  }
  if (!(settings.level > 0.0 && settings.level < 1.0)) throw ConfigError("confidence level must lie in (0, 1)");
  BootstrapResult out;
  out.level = settings.level;
  out.estimate = pipeline(estimateCorrelations(samples, imaging));
  const Eigen::Index q = out.estimate.size();
  out.replicas.resize(settings.replicas, q);

  parallelFor(static_cast<std::size_t>(settings.replicas), settings.threads, [&](std::size_t r) {
    std::vector<std::vector<int>> rows(samples.times.size());
    for (std::size_t i = 0; i < samples.times.size(); ++i) {
      const int n = static_cast<int>(samples.profiles[i].rows());
      Philox4x32 gen(settings.seed, deriveStream(r + 1, i));
      std::uniform_int_distribution<int> pick(0, n - 1);
      rows[i].resize(n);
      for (int& idx : rows[i]) idx = pick(gen);
    }
    const Eigen::VectorXd value = pipeline(estimateCorrelations(samples, imaging, rows));
    if (value.size() != q) throw DimensionError("bootstrap pipeline changed its output size");
    out.replicas.row(r) = value.transpose();
  });

  const double tail = 0.5 * (1.0 - settings.level);
  out.lower.resize(q);
  out.upper.resize(q);
  for (Eigen::Index j = 0; j < q; ++j) {
    std::vector<double> column(out.replicas.rows());
    for (Eigen::Index r = 0; r < out.replicas.rows(); ++r) column[r] = out.replicas(r, j);
    out.lower(j) = percentile(column, tail);
    out.upper(j) = percentile(column, 1.0 - tail);
  }
  return out;
}

ThermalModel::ThermalModel(const GpProfile& profile, const PhysicalParams& params, bool includeDensityGradient,
                           const ModeBasis& quenchBasis, int modes, Statistics statistics, double blurSigma)
    : profile_(profile), params_(params), gradient_(includeDensityGradient), modes_(modes), statistics_(statistics) {
  if (modes < 1 || modes > quenchBasis.cutoff) throw ConfigError("fit modes must lie within the basis cutoff");
  if (quenchBasis.gridSize() != profile.size()) throw DimensionError("quench basis and profile grids differ");
  base_ = discretizeHamiltonian(profile, params, 0.0, includeDensityGradient);
  pinning_ = Eigen::MatrixXd::Zero(profile.size(), profile.size());
  pinning_.diagonal() = 2.0 * profile.density * profile.deltaZ();
  root_ = RhoSquareRoot::compute(base_.hRho);

  const Eigen::MatrixXd blur = imagingOperator(quenchBasis.gridPoints, quenchBasis.gridPoints, blurSigma);
  const Eigen::MatrixXd dualRows = std::sqrt(quenchBasis.deltaZ) * quenchBasis.rhoWavefunctions.topRows(modes) * blur;
  projPhi_ = dualRows;
  projRho_ = dualRows * quenchBasis.fullPhi * quenchBasis.fullPhi.transpose();
}

ThermalModel::Projection ThermalModel::project(double tunnelCoupling) const {
  if (tunnelCoupling < 0.0) throw RangeError("tunnel coupling must be non-negative");
  QuadraticHamiltonian ham = base_;
  ham.tunnelCoupling = tunnelCoupling;
  ham.hPhi += tunnelCoupling * pinning_;
  const ModeBasis prep = symplecticDiagonalize(ham, 1, &root_);
  Projection p;
  p.phi = projPhi_ * prep.fullPhi;
  p.rho = projRho_ * prep.fullRho;
  p.frequencies = prep.allFrequencies;
  return p;
}

void ThermalModel::predict(const Projection& proj, double temperature, Eigen::VectorXd& phi,
                           Eigen::VectorXd& rho) const {
  ThermalSpec spec;
  spec.temperature = temperature;
  spec.statistics = statistics_;
  const Eigen::Index n = proj.frequencies.size();
  Eigen::VectorXd m = Eigen::VectorXd::Zero(n);
  Eigen::Index first = 0;
  while (first < n && proj.frequencies(first) == 0.0) ++first;
  // Zero modes of the preparation Hamiltonian (J = 0) are the global phase, which the quench
  // basis also excludes; they carry no weight in the retained modes.
  m.tail(n - first) = thermalMoments(proj.frequencies.tail(n - first), spec);
  phi = proj.phi.array().square().matrix() * m;
  rho = proj.rho.array().square().matrix() * m;
}

void ThermalModel::predict(double temperature, double tunnelCoupling, Eigen::VectorXd& phi, Eigen::VectorXd& rho) const {
  predict(project(tunnelCoupling), temperature, phi, rho);
}

namespace {

double relativeDeviation(const Eigen::VectorXd& predPhi, const Eigen::VectorXd& predRho, const Eigen::VectorXd& obsPhi,
                         const Eigen::VectorXd& obsRho) {
  double sum = 0.0;
  for (Eigen::Index k = 0; k < obsPhi.size(); ++k) {
    const double dp = (predPhi(k) - obsPhi(k)) / obsPhi(k);
    const double dr = (predRho(k) - obsRho(k)) / obsRho(k);
    sum += dp * dp + dr * dr;
  }
  return sum;
}

}  // namespace

double thermalObjective(const ThermalModel& model, const Eigen::VectorXd& observedPhi, const Eigen::VectorXd& observedRho,
                        double temperature, double tunnelCoupling) {
  Eigen::VectorXd phi, rho;
  model.predict(temperature, tunnelCoupling, phi, rho);
  return relativeDeviation(phi, rho, observedPhi, observedRho);
}

ThermalFitResult fitThermalParameters(const CovarianceMatrix& v, const ThermalModel& model,
                                      const ThermalFitSettings& settings) {
  const int m = model.modes();
  if (v.modeCount() < m) throw DimensionError("reconstruction holds fewer modes than the fit uses");
  if (m < 2) throw ConfigError("the thermal fit needs at least two modes");
  if (settings.temperaturePoints < 2 || settings.couplingPoints < 2) throw ConfigError("fit grid too small");
  const Eigen::VectorXd obsPhi = v.matrix().diagonal().head(m);
  const Eigen::VectorXd obsRho = v.matrix().diagonal().segment(v.modeCount(), m);
  for (int k = 0; k < m; ++k) {
    if (!(obsPhi(k) > 0.0) || !(obsRho(k) > 0.0)) throw RangeError("reconstructed moments must be positive to fit");
  }

  ThermalFitResult fit;
  fit.temperatureGrid = Eigen::VectorXd::LinSpaced(settings.temperaturePoints, settings.minTemperature,
                                                   settings.maxTemperature);
  fit.couplingGridHz =
      Eigen::VectorXd::LinSpaced(settings.couplingPoints, settings.minCouplingHz, settings.maxCouplingHz);
  fit.surface.resize(settings.couplingPoints, settings.temperaturePoints);

  parallelFor(static_cast<std::size_t>(settings.couplingPoints), settings.threads, [&](std::size_t j) {
    const ThermalModel::Projection proj = model.project(units::hzToRadPerMs(fit.couplingGridHz(j)));
    Eigen::VectorXd phi, rho;
    for (int i = 0; i < settings.temperaturePoints; ++i) {
      model.predict(proj, fit.temperatureGrid(i), phi, rho);
      fit.surface(j, i) = relativeDeviation(phi, rho, obsPhi, obsRho);
    }
  });

  Eigen::Index bj = 0, bi = 0;
  const double gridMin = fit.surface.minCoeff(&bj, &bi);
  const double gridMax = fit.surface.maxCoeff();
  if (gridMax - gridMin <= 1e-9 * std::max(1.0, gridMax)) {
    fit.identifiable = false;
    fit.diagnostics.warn("residual surface is flat; temperature and tunnel coupling are not identifiable");
  }

  // Nelder-Mead on (T, J/2pi) from the best grid node, clamped to the search box.
  const Eigen::Vector2d lowerBound(settings.minTemperature, settings.minCouplingHz);
  const Eigen::Vector2d upperBound(settings.maxTemperature, settings.maxCouplingHz);
  auto objective = [&](Eigen::Vector2d x) {
    x = x.cwiseMax(lowerBound).cwiseMin(upperBound);
    return thermalObjective(model, obsPhi, obsRho, x(0), units::hzToRadPerMs(x(1)));
  };
  const Eigen::Vector2d step((settings.maxTemperature - settings.minTemperature) / (settings.temperaturePoints - 1),
                             (settings.maxCouplingHz - settings.minCouplingHz) / (settings.couplingPoints - 1));
  std::array<Eigen::Vector2d, 3> simplex{Eigen::Vector2d(fit.temperatureGrid(bi), fit.couplingGridHz(bj)),
                                         Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero()};
  simplex[1] = simplex[0] + Eigen::Vector2d(step(0), 0.0);
  simplex[2] = simplex[0] + Eigen::Vector2d(0.0, step(1));
  std::array<double, 3> values{};
  for (int k = 0; k < 3; ++k) {
    simplex[k] = simplex[k].cwiseMax(lowerBound).cwiseMin(upperBound);
    values[k] = objective(simplex[k]);
  }
  for (int it = 0; it < 200; ++it) {
    std::array<int, 3> order{0, 1, 2};
    std::sort(order.begin(), order.end(), [&](int a, int b) { return values[a] < values[b]; });
    const int best = order[0], mid = order[1], worst = order[2];
    const double size = std::max((simplex[mid] - simplex[best]).cwiseQuotient(step).norm(),
                                 (simplex[worst] - simplex[best]).cwiseQuotient(step).norm());
    if (size < 1e-4 || std::abs(values[worst] - values[best]) <= 1e-14 * (1.0 + values[best])) break;
    const Eigen::Vector2d centroid = 0.5 * (simplex[best] + simplex[mid]);
    auto clampPoint = [&](Eigen::Vector2d x) { return Eigen::Vector2d(x.cwiseMax(lowerBound).cwiseMin(upperBound)); };
    const Eigen::Vector2d reflected = clampPoint(centroid + (centroid - simplex[worst]));
    const double fr = objective(reflected);
    if (fr < values[best]) {
      const Eigen::Vector2d expanded = clampPoint(centroid + 2.0 * (centroid - simplex[worst]));
      const double fe = objective(expanded);
      if (fe < fr) {
        simplex[worst] = expanded;
        values[worst] = fe;
      } else {
        simplex[worst] = reflected;
        values[worst] = fr;
      }
    } else if (fr < values[mid]) {
      simplex[worst] = reflected;
      values[worst] = fr;
    } else {
      const Eigen::Vector2d contracted = clampPoint(centroid + 0.5 * (simplex[worst] - centroid));
      const double fc = objective(contracted);
      if (fc < values[worst]) {
        simplex[worst] = contracted;
        values[worst] = fc;
      } else {
        for (int k : {mid, worst}) {
          simplex[k] = clampPoint(simplex[best] + 0.5 * (simplex[k] - simplex[best]));
          values[k] = objective(simplex[k]);
        }
      }
    }
  }
  const int best = static_cast<int>(std::min_element(values.begin(), values.end()) - values.begin());
  if (values[best] <= gridMin) {
    fit.temperature = simplex[best](0);
    fit.couplingHz = simplex[best](1);
    fit.residual = values[best];
  } else {
    fit.temperature = fit.temperatureGrid(bi);
    fit.couplingHz = fit.couplingGridHz(bj);
    fit.residual = gridMin;
  }
  return fit;
}

Eigen::MatrixXd predictRecurrence(const ReconstructionResult& result, const ModeBasis& basis,
                                  const ImagingModel& imaging, const std::vector<double>& separations,
                                  const std::vector<double>& times, bool convolvedModes, Diagnostics* diagnostics) {
  if (result.v.modeCount() != basis.cutoff) throw DimensionError("result and basis disagree on the mode count");
  return cosineCorrelator(result.v, basis, imaging, separations, times, convolvedModes, diagnostics);
}

}  // namespace quadtomo
