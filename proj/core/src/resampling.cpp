#include "quadtomo/resampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "quadtomo/errors.hpp"
#include "quadtomo/parallel.hpp"
#include "quadtomo/rng.hpp"

namespace quadtomo {

double truthCorrelator(const QuenchTruth& truth, const ImagingModel& imaging, double separation, double t) {
  const auto pairs = pairsAtSeparation(imaging, separation);
  return cosineFromCovariance(truth.referencedPixelCorrelations(t, imaging, true), pairs);
}

double locateRecurrence(const QuenchTruth& truth, const ImagingModel& imaging, double separation, double horizon,
                        double step) {
  if (!(step > 0.0) || !(horizon > 2.0 * step)) throw RangeError("recurrence search needs horizon > 2 step > 0");
  const auto pairs = pairsAtSeparation(imaging, separation);
  const auto c = [&](double t) {
    return cosineFromCovariance(truth.referencedPixelCorrelations(t, imaging, true), pairs);
  };
  const int n = static_cast<int>(horizon / step) + 1;
  std::vector<double> values(n);
  for (int i = 0; i < n; ++i) values[i] = c(i * step);

  int dip = -1;
  for (int i = 1; i + 1 < n; ++i) {
    if (values[i] <= values[i - 1] && values[i] < values[i + 1]) {
      dip = i;
      break;
    }
  }
  if (dip < 0) throw NumericalError("no dephasing dip within the horizon", horizon);
  // Ignore ripples: the peak has to recover a tenth of the initial drop.
  const double threshold = values[dip] + 0.1 * (values[0] - values[dip]);
  int peak = -1;
  for (int i = dip + 1; i + 1 < n; ++i) {
    if (values[i] >= values[i - 1] && values[i] > values[i + 1] && values[i] > threshold) {
      peak = i;
      break;
    }
  }
  if (peak < 0) throw NumericalError("no recurrence within the horizon", horizon);

  double a = (peak - 1) * step;
  double b = (peak + 1) * step;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - g * (b - a);
  double x2 = a + g * (b - a);
  double f1 = c(x1);
  double f2 = c(x2);
  while (b - a > 1e-6) {
    if (f1 > f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = c(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = c(x2);
    }
  }
  return 0.5 * (a + b);
}

ResamplingResult runResamplingStudy(const Scenario& scenario, const ScenarioModel& model,
                                    const ResamplingSettings& settings) {
  if (settings.nSample < 2) throw ConfigError("resampling needs at least two shots per time");
  if (settings.repeats < 1) throw ConfigError("resampling needs at least one repeat");

  const QuenchTruth truth(model.preparationBasis, model.quenchBasis, scenario.thermal);
  const ImagingModel& imaging = scenario.imaging;
  ResamplingResult out;
  out.recurrenceTime = settings.recurrenceTime > 0.0
                           ? settings.recurrenceTime
                           : locateRecurrence(truth, imaging, settings.separation, settings.horizon);
  out.truthHeight = truthCorrelator(truth, imaging, settings.separation, out.recurrenceTime);

  const std::vector<int> window = scenario.windowIndices();
  std::vector<double> times;
  for (int i : window) times.push_back(scenario.times[i]);
  const double origin = times.front();

  std::vector<PhaseProfileSampler> samplers;
  for (double t : times) samplers.emplace_back(truth.realSpacePhase(t), model.quenchBasis.gridPoints, imaging);

  std::vector<double> relative;
  for (double t : times) relative.push_back(t - origin);
  const DesignSystemBuilder builder(model.quenchBasis, imaging, relative, scenario.convolvedModes);

  out.heights.resize(settings.repeats);
  out.feasibilityMargins.resize(settings.repeats);
  std::vector<char> converged(settings.repeats, 0);
  parallelFor(static_cast<std::size_t>(settings.repeats), settings.threads, [&](std::size_t r) {
    PhaseProfileSamples samples;
    samples.times = relative;
    samples.seed = settings.seed;
    samples.referenceIndex = imaging.referenceIndex;
    for (std::size_t i = 0; i < samplers.size(); ++i)
      samples.profiles.push_back(samplers[i].sample(settings.nSample, settings.seed, deriveStream(r, window[i])));
    const MeasurementSet ms = estimateCorrelations(samples, imaging);
    const ReconstructionResult result = solveConstrainedLeastSquares(builder.assemble(ms), scenario.solver);
    const Eigen::MatrixXd c =
        cosineCorrelator(result.v, model.quenchBasis, imaging, {settings.separation},
                         {out.recurrenceTime - origin}, scenario.convolvedModes);
    out.heights[r] = c(0, 0);
    out.feasibilityMargins[r] = result.feasibilityMargin;
    converged[r] = result.converged ? 1 : 0;
  });

  out.unconverged = static_cast<int>(std::count(converged.begin(), converged.end(), 0));
  if (out.unconverged > 0)
    out.diagnostics.warn(std::to_string(out.unconverged) + " of " + std::to_string(settings.repeats) +
                         " reconstructions did not converge");
  const double n = static_cast<double>(out.heights.size());
  out.mean = std::accumulate(out.heights.begin(), out.heights.end(), 0.0) / n;
  if (out.heights.size() > 1) {
    double ss = 0.0;
    for (double h : out.heights) ss += (h - out.mean) * (h - out.mean);
    out.standardDeviation = std::sqrt(ss / (n - 1.0));
  }
  return out;
}

}  // namespace quadtomo
