#include "quadtomo/scenario.hpp"

#include <algorithm>
#include <cmath>

#include "quadtomo/errors.hpp"
#include "quadtomo/units.hpp"

namespace quadtomo {

void ScanDescriptor::validate() const {
  if (!(systemLength > 0.0)) throw ConfigError("scan " + label + ": system length must be positive");
  if (!(atomsPerWell > 0.0)) throw ConfigError("scan " + label + ": atom number must be positive");
  for (std::size_t i = 1; i < measurementTimes.size(); ++i)
    if (!(measurementTimes[i] > measurementTimes[i - 1]))
      throw ConfigError("scan " + label + ": times must be strictly increasing");
}

const std::vector<ScanDescriptor>& tableScans() {
  static const std::vector<ScanDescriptor> scans{
      {49.0, 3147.5, {}, "scan1"}, {60.0, 3813.6, {}, "scan2"}, {38.0, 2293.5, {}, "scan3"},
      {43.0, 2625.7, {}, "scan4"}, {54.0, 3513.3, {}, "scan5"}};
  return scans;
}

TrapKind parseTrapKind(const std::string& name) {
  if (name == "harmonic") return TrapKind::Harmonic;
  if (name == "box") return TrapKind::Box;
  if (name == "box_harmonic") return TrapKind::BoxHarmonic;
  throw ConfigError("unknown trap '" + name + "' (harmonic, box, box_harmonic)");
}

std::string trapKindName(TrapKind kind) {
  switch (kind) {
    case TrapKind::Harmonic: return "harmonic";
    case TrapKind::Box: return "box";
    case TrapKind::BoxHarmonic: return "box_harmonic";
  }
  return "box_harmonic";
}

Scenario Scenario::defaults() {
  Scenario s;
  s.thermal.tunnelCoupling = units::hzToRadPerMs(s.tunnelCouplingHz);
  for (int i = 0; i < 6; ++i) s.times.push_back(1.0 + 2.5 * i);
  return s;
}

const std::vector<std::string>& Scenario::knownKeys() {
  static const std::vector<std::string> keys{
      "scan", "atom_mass_u", "scattering_length_nm", "omega_perp_hz", "omega_long_hz", "atom_number",
      "box_half_length_um", "grid_size", "include_density_gradient", "tunnel_coupling_hz",
      "quench_tunnel_coupling_hz", "trap", "box_wall_width_um", "box_wall_height_hz", "temperature_nk",
      "statistics", "pixel_size_um", "pixel_count", "reference_pixel", "conv_sigma_um", "mode_cutoff",
      "convolved_modes", "times_ms", "t_start_ms", "t_step_ms", "n_times", "window", "n_sample",
      "solver_max_iter", "solver_tol_primal", "solver_tol_dual", "solver_rho", "solver_cone_margin",
      "separations_um", "n_bootstrap", "ci_level", "horizon_start_ms", "horizon_end_ms", "horizon_step_ms"};
  return keys;
}

namespace {

// Re-throws validation failures of a single key with that key's line.
template <class F>
void withLine(const KeyValueConfig& config, const std::string& key, F&& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    if (e.line() > 0) throw;
    throw ConfigError(key + ": " + e.what(), config.lineOf(key));
  }
}

int toInt(const KeyValueConfig& config, const std::string& key, long long v, long long lo, long long hi) {
  if (v < lo || v > hi)
    throw ConfigError(key + " must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]",
                      config.lineOf(key));
  return static_cast<int>(v);
}

}  // namespace

Scenario Scenario::fromConfig(const KeyValueConfig& config) {
  config.requireKnownKeys(knownKeys());
  Scenario s = defaults();

  if (auto v = config.getInt("scan")) {
    const int idx = toInt(config, "scan", *v, 1, static_cast<long long>(tableScans().size()));
    s.scan = idx;
    s.params.boxHalfLengthUm = tableScans()[idx - 1].systemLength / 2.0;
    s.params.atomNumber = tableScans()[idx - 1].atomsPerWell;
  }
  if (auto v = config.getDouble("atom_mass_u")) s.params.atomMassU = *v;
  if (auto v = config.getDouble("scattering_length_nm")) s.params.scatteringLengthUm = units::nmToUm(*v);
  if (auto v = config.getDouble("omega_perp_hz")) s.params.radialTrapFreq = units::hzToRadPerMs(*v);
  if (auto v = config.getDouble("omega_long_hz")) s.params.longitudinalTrapFreq = units::hzToRadPerMs(*v);
  if (auto v = config.getDouble("atom_number")) s.params.atomNumber = *v;
  if (auto v = config.getDouble("box_half_length_um")) s.params.boxHalfLengthUm = *v;
  if (auto v = config.getInt("grid_size")) s.gridSize = toInt(config, "grid_size", *v, 16, 20000);
  if (auto v = config.getBool("include_density_gradient")) s.includeDensityGradient = *v;
  if (auto v = config.getDouble("tunnel_coupling_hz")) s.tunnelCouplingHz = *v;
  if (auto v = config.getDouble("quench_tunnel_coupling_hz")) s.quenchCouplingHz = *v;
  if (auto v = config.getString("trap")) withLine(config, "trap", [&] { s.trap = parseTrapKind(*v); });
  if (auto v = config.getDouble("box_wall_width_um")) s.wallWidth = *v;
  if (auto v = config.getDouble("box_wall_height_hz")) s.wallHeightHz = *v;
  if (auto v = config.getDouble("temperature_nk")) s.thermal.temperature = *v;
  if (auto v = config.getString("statistics"))
    withLine(config, "statistics", [&] { s.thermal.statistics = parseStatistics(*v); });

  if (auto v = config.getDouble("pixel_size_um")) s.imaging.pixelSize = *v;
  if (auto v = config.getInt("pixel_count")) {
    s.imaging.pixelCount = toInt(config, "pixel_count", *v, 2, 100000);
    s.imaging.referenceIndex = s.imaging.centerIndex();
  }
  if (auto v = config.getInt("reference_pixel")) s.imaging.referenceIndex = static_cast<int>(*v);
  if (auto v = config.getDouble("conv_sigma_um")) s.imaging.convolutionSigma = *v;
  if (auto v = config.getInt("mode_cutoff")) s.modeCutoff = toInt(config, "mode_cutoff", *v, 1, 100000);
  if (auto v = config.getBool("convolved_modes")) s.convolvedModes = *v;

  if (auto v = config.getDoubleList("times_ms")) {
    s.times = *v;
  } else if (config.contains("t_start_ms") || config.contains("t_step_ms") || config.contains("n_times")) {
    const double start = config.getDouble("t_start_ms").value_or(1.0);
    const double step = config.getDouble("t_step_ms").value_or(2.5);
    const int n = toInt(config, "n_times", config.getInt("n_times").value_or(6), 1, 100000);
    if (!(step > 0.0)) throw ConfigError("t_step_ms must be positive", config.lineOf("t_step_ms"));
    s.times.clear();
    for (int i = 0; i < n; ++i) s.times.push_back(start + step * i);
  }
  if (auto v = config.getDoubleList("window")) {
    s.window.clear();
    for (double x : *v) {
      if (x != std::floor(x) || x < 0) throw ConfigError("window entries must be time indices", config.lineOf("window"));
      s.window.push_back(static_cast<int>(x));
    }
  }
  if (auto v = config.getInt("n_sample")) s.nSample = static_cast<int>(*v);

  if (auto v = config.getInt("solver_max_iter")) s.solver.maxIterations = static_cast<int>(*v);
  if (auto v = config.getDouble("solver_tol_primal")) s.solver.primalTolerance = *v;
  if (auto v = config.getDouble("solver_tol_dual")) s.solver.dualTolerance = *v;
  if (auto v = config.getDouble("solver_rho")) s.solver.penaltyParameter = *v;
  if (auto v = config.getDouble("solver_cone_margin")) s.solver.coneMargin = *v;

  if (auto v = config.getDoubleList("separations_um")) s.separations = *v;
  if (auto v = config.getInt("n_bootstrap")) s.bootstrapReplicas = static_cast<int>(*v);
  if (auto v = config.getDouble("ci_level")) s.confidenceLevel = *v;
  if (auto v = config.getDouble("horizon_start_ms")) s.horizonStart = *v;
  if (auto v = config.getDouble("horizon_end_ms")) s.horizonEnd = *v;
  if (auto v = config.getDouble("horizon_step_ms")) s.horizonStep = *v;

  s.thermal.tunnelCoupling = units::hzToRadPerMs(s.tunnelCouplingHz);

  // Attribute whole-scenario validation failures to the most likely key.
  const auto check = [&](const std::string& key, auto&& f) { withLine(config, key, f); };
  check("atom_number", [&] { s.params.validate(); });
  check("temperature_nk", [&] { s.thermal.validate(); });
  check("pixel_count", [&] { s.imaging.validate(s.params.boxHalfLengthUm); });
  check("solver_max_iter", [&] { s.solver.validate(); });
  check("n_sample", [&] {
    if (s.nSample < 2) throw ConfigError("n_sample must be at least 2");
  });
  check("times_ms", [&] { s.validate(); });
  return s;
}

void Scenario::validate() const {
  params.validate();
  thermal.validate();
  imaging.validate(params.boxHalfLengthUm);
  solver.validate();
  if (gridSize < 16) throw ConfigError("grid_size must be at least 16");
  if (modeCutoff < 1 || modeCutoff >= gridSize) throw ConfigError("mode_cutoff must lie in [1, grid_size)");
  if (!(wallWidth > 0.0) || !(wallHeightHz >= 0.0)) throw ConfigError("box wall width must be positive");
  if (wallWidth >= params.boxHalfLengthUm) throw ConfigError("box wall wider than the half length");
  if (tunnelCouplingHz < 0.0 || quenchCouplingHz < 0.0) throw ConfigError("tunnel couplings must be non-negative");
  if (times.empty()) throw ConfigError("no measurement times");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw ConfigError("measurement times must be strictly increasing");
  for (int w : window)
    if (w < 0 || w >= static_cast<int>(times.size())) throw ConfigError("window index out of range");
  if (nSample < 2) throw ConfigError("n_sample must be at least 2");
  if (bootstrapReplicas < 10) throw ConfigError("n_bootstrap must be at least 10");
  if (!(confidenceLevel > 0.0 && confidenceLevel < 1.0)) throw ConfigError("ci_level must lie in (0, 1)");
  if (!(horizonStep > 0.0) || !(horizonEnd >= horizonStart)) throw ConfigError("invalid prediction horizon");
  for (double z : separations)
    if (!(z >= 0.0)) throw ConfigError("separations must be non-negative");
}

TrapShape Scenario::trapShape() const {
  const double wall = params.boxHalfLengthUm - wallWidth;
  const double height = units::hzToRadPerMs(wallHeightHz);
  switch (trap) {
    case TrapKind::Harmonic: return harmonicTrap(params);
    case TrapKind::Box: return boxTrap(wall, wallWidth, height);
    case TrapKind::BoxHarmonic: return boxPlusHarmonicTrap(params, wall, wallWidth, height);
  }
  return harmonicTrap(params);
}

std::vector<int> Scenario::windowIndices() const {
  if (!window.empty()) return window;
  std::vector<int> all(times.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  return all;
}

std::vector<double> Scenario::horizon() const {
  std::vector<double> out;
  const int n = static_cast<int>(std::floor((horizonEnd - horizonStart) / horizonStep + 1e-9)) + 1;
  for (int i = 0; i < n; ++i) out.push_back(horizonStart + i * horizonStep);
  return out;
}

ScenarioModel buildScenarioModel(const Scenario& scenario) {
  scenario.validate();
  ScenarioModel m;
  m.gp = solveGpGroundState(scenario.params, scenario.trapShape(), scenario.gridSize);
  m.quench = discretizeHamiltonian(m.gp.profile, scenario.params, units::hzToRadPerMs(scenario.quenchCouplingHz),
                                   scenario.includeDensityGradient);
  m.preparation = discretizeHamiltonian(m.gp.profile, scenario.params, scenario.thermal.tunnelCoupling,
                                        scenario.includeDensityGradient);
  RhoSquareRoot root = RhoSquareRoot::compute(m.quench.hRho);
  m.quenchBasis = symplecticDiagonalize(m.quench, scenario.modeCutoff, &root);
  m.preparationBasis = symplecticDiagonalize(m.preparation, scenario.modeCutoff, &root);
  return m;
}

}  // namespace quadtomo
