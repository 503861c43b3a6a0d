#pragma once

#include <string>
#include <vector>

#include "quadtomo/config.hpp"
#include "quadtomo/core_model.hpp"
#include "quadtomo/imaging.hpp"
#include "quadtomo/modes.hpp"
#include "quadtomo/synthesis.hpp"
#include "quadtomo/tomography.hpp"

namespace quadtomo {

// One experimental scan: system length L = 2 R and mean atoms per well.
struct ScanDescriptor {
  double systemLength = 0.0;  // um
  double atomsPerWell = 0.0;
  std::vector<double> measurementTimes;  // ms
  std::string label;

  void validate() const;
};

// The five scans of the recurrence experiment, labelled "scan1".."scan5".
const std::vector<ScanDescriptor>& tableScans();

enum class TrapKind { Harmonic, Box, BoxHarmonic };

TrapKind parseTrapKind(const std::string& name);  // "harmonic", "box", "box_harmonic"
std::string trapKindName(TrapKind kind);

// A full synthetic experiment: geometry, preparation state, camera, solver and analysis knobs.
struct Scenario {
  int scan = 1;
  PhysicalParams params = PhysicalParams::defaults();
  TrapKind trap = TrapKind::BoxHarmonic;
  double wallWidth = 4.0;       // um
  double wallHeightHz = 900.0;  // potential at the grid edge, Hz
  int gridSize = 400;
  bool includeDensityGradient = true;
  double quenchCouplingHz = 0.0;

  ThermalSpec thermal{40.0, 0.0, Statistics::ClassicalField};  // J filled from tunnel_coupling_hz
  double tunnelCouplingHz = 3.5;

  ImagingModel imaging;
  int modeCutoff = 10;
  bool convolvedModes = false;

  std::vector<double> times;  // ms
  std::vector<int> window;    // indices into times; empty means all
  int nSample = 2000;
  SolverSettings solver;

  std::vector<double> separations{27.25};  // um
  int bootstrapReplicas = 500;
  double confidenceLevel = 0.8;
  double horizonStart = 0.0;  // ms
  double horizonEnd = 60.0;
  double horizonStep = 0.25;

  // Scan-1 defaults with the simulation-study preparation (T = 40 nK, J = 2pi x 3.5 Hz) and six times from 1 ms
  // spaced by 2.5 ms.
  static Scenario defaults();

  // Overrides from a key-value config; unknown keys and invalid values throw ConfigError with the
  // offending line.
  static Scenario fromConfig(const KeyValueConfig& config);
  static const std::vector<std::string>& knownKeys();

  void validate() const;
  TrapShape trapShape() const;
  std::vector<int> windowIndices() const;
  std::vector<double> horizon() const;
};

// Ground-state profile and both Hamiltonians with their mode bases.
struct ScenarioModel {
  GpSolution gp;
  QuadraticHamiltonian quench;
  QuadraticHamiltonian preparation;
  ModeBasis quenchBasis;        // truncated at modeCutoff
  ModeBasis preparationBasis;   // same cutoff; the complete basis is in fullPhi / fullRho
};

ScenarioModel buildScenarioModel(const Scenario& scenario);

}  // namespace quadtomo
