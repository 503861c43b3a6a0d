#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "quadtomo/analysis.hpp"
#include "quadtomo/scenario.hpp"
#include "quadtomo/synthesis.hpp"

namespace quadtomo {

// First recurrence of the exact C(zbar, t): the first local maximum after the initial dephasing dip,
// refined by golden-section search. Times in ms.
double locateRecurrence(const QuenchTruth& truth, const ImagingModel& imaging, double separation, double horizon,
                        double step = 0.1);

// Exact C(zbar, t) of the thermal state (all modes, blurred, referenced).
double truthCorrelator(const QuenchTruth& truth, const ImagingModel& imaging, double separation, double t);

struct ResamplingSettings {
  int nSample = 2000;
  int repeats = 100;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  double separation = 27.25;    // um
  double recurrenceTime = 0.0;  // ms; 0 locates it from the truth
  double horizon = 60.0;        // search range for the recurrence, ms
};

struct ResamplingResult {
  double recurrenceTime = 0.0;
  double truthHeight = 0.0;
  std::vector<double> heights;  // one per repeat
  double mean = 0.0;
  std::optional<double> standardDeviation;  // absent for a single repeat
  std::vector<double> feasibilityMargins;
  int unconverged = 0;
  Diagnostics diagnostics;
};

// Repeats sample -> estimate -> reconstruct -> propagate -> C at the recurrence with independent
// Philox streams per repeat. The window and imaging come from the scenario.
ResamplingResult runResamplingStudy(const Scenario& scenario, const ScenarioModel& model,
                                    const ResamplingSettings& settings);

}  // namespace quadtomo
