#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "quadtomo/analysis.hpp"
#include "quadtomo/errors.hpp"
#include "quadtomo/parallel.hpp"
#include "quadtomo/serialization.hpp"
#include "quadtomo/units.hpp"

namespace quadtomo::cli {

namespace {

template <class T>
std::string joined(const std::vector<T>& values) {
  std::ostringstream out;
  for (std::size_t i = 0; i < values.size(); ++i) out << (i ? "," : "") << values[i];
  return out.str();
}

std::ostringstream csvStream(const RunContext& run) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << run.csvHeader() << '\n';
  return out;
}

std::vector<int> allIndices(int count) {
  std::vector<int> idx(count);
  for (int i = 0; i < count; ++i) idx[i] = i;
  return idx;
}

void checkModes(const ReconstructionResult& r, const ModeBasis& basis, const std::string& source) {
  if (r.v.modeCount() != basis.cutoff) {
    throw DimensionError(source + " holds " + std::to_string(r.v.modeCount()) + " modes but the configuration uses " +
                         std::to_string(basis.cutoff));
  }
}

double originOf(const ReconstructionResult& r) { return r.inputWindow.empty() ? 0.0 : r.inputWindow.front(); }

void reportWarnings(const Diagnostics& d) {
  for (const auto& w : d.warnings) std::cerr << "warning: " << w << '\n';
}

PhaseProfileSamples readProfiles(const std::string& dir) {
  std::vector<std::filesystem::path> files;
  if (!std::filesystem::is_directory(dir)) throw IoError("profile directory " + dir + " does not exist");
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("profiles_t", 0) == 0 && entry.path().extension() == ".csv") files.push_back(entry.path());
  }
  if (files.empty()) throw IoError("no profiles_t*.csv files in " + dir);
  std::sort(files.begin(), files.end());
  std::vector<std::string> texts;
  for (const auto& f : files) texts.push_back(readTextFile(f));
  return parseProfileSamplesCsv(texts);
}

std::vector<ReconstructionResult> readResults(const std::vector<std::string>& paths, const ModeBasis& basis) {
  if (paths.empty()) throw ConfigError("--result is required for this mode");
  std::vector<ReconstructionResult> out;
  for (const auto& p : paths) {
    out.push_back(resultFromJson(readTextFile(p)));
    checkModes(out.back(), basis, p);
  }
  return out;
}

void writeCorrelatorRows(std::ostringstream& out, const std::vector<double>& times, const std::vector<double>& seps,
                         const Eigen::MatrixXd& c, const Eigen::MatrixXd* lo = nullptr,
                         const Eigen::MatrixXd* hi = nullptr) {
  out << "t_ms,zbar_um,C,lo,hi\n";
  for (std::size_t i = 0; i < times.size(); ++i) {
    for (std::size_t s = 0; s < seps.size(); ++s) {
      out << times[i] << ',' << seps[s] << ',' << c(i, s) << ',';
      if (lo && hi) {
        out << (*lo)(i, s) << ',' << (*hi)(i, s) << '\n';
      } else {
        out << "nan,nan\n";
      }
    }
  }
}

}  // namespace

std::string describe(const SimulateOptions& o) {
  std::string s;
  if (o.nSample) s += " --n-sample " + std::to_string(*o.nSample);
  if (!o.exact.empty()) s += " --exact " + o.exact;
  return s;
}

std::string describe(const ReconstructOptions& o) {
  std::string s = "--measurements " + o.measurements;
  if (!o.window.empty()) s += " --window " + joined(o.window);
  if (o.windowStart) s += " --window-start " + std::to_string(*o.windowStart);
  if (o.windowLength) s += " --window-length " + std::to_string(*o.windowLength);
  return s;
}

std::string describe(const AnalyzeOptions& o) {
  std::string s = o.mode;
  for (const auto& r : o.results) s += " --result " + r;
  if (!o.profiles.empty()) s += " --profiles " + o.profiles;
  if (!o.measurements.empty()) s += " --measurements " + o.measurements;
  if (o.windowLength) s += " --window-length " + std::to_string(*o.windowLength);
  if (!o.window.empty()) s += " --window " + joined(o.window);
  if (o.bootstrapReplicas) s += " --n-bootstrap " + std::to_string(*o.bootstrapReplicas);
  s += " --fit-modes " + std::to_string(o.fitModes);
  if (o.mode == "fit-thermal") s += " --state-time " + std::to_string(o.stateTime);
  return s;
}

Session::Session(const GlobalOptions& global, const std::string& command) {
  KeyValueConfig config;
  if (!global.config.empty()) config = KeyValueConfig::load(global.config);
  scenario_ = Scenario::fromConfig(config);
  threads_ = global.threads == 0 ? defaultThreadCount() : global.threads;
  run_ = std::make_unique<RunContext>(config, global.seed, command, global.out, global.commandLine);
}

bool Session::wroteOutputs() const { return run_ && run_->outputCount() > 0; }

void Session::finish(int exitCode) {
  if (exitCode == 2 && !wroteOutputs()) return;
  run_->appendManifest(exitCode);
}

const ScenarioModel& Session::model() {
  if (!model_) model_ = std::make_unique<ScenarioModel>(buildScenarioModel(scenario_));
  return *model_;
}

int runSimulate(Session& session, const SimulateOptions& options) {
  const Scenario& s = session.scenario();
  const int n = options.nSample.value_or(s.nSample);
  if (n < 2) throw ConfigError("n_sample must be at least 2 (got " + std::to_string(n) + ")");

  const ScenarioModel& m = session.model();
  const QuenchTruth truth(m.preparationBasis, m.quenchBasis, s.thermal);
  RunContext& run = session.run();

  MeasurementSet ms;
  if (options.exact == "full") {
    std::vector<Eigen::MatrixXd> phis;
    for (double t : s.times) phis.push_back(truth.referencedPixelCorrelations(t, s.imaging, true));
    ms = exactMeasurements(s.imaging, s.times, phis, n);
  } else if (options.exact == "model") {
    ms = exactMeasurements(s.imaging, s.times,
                           predictCorrelations(truth.initialCovariance(), m.quenchBasis, s.imaging, s.times,
                                               s.convolvedModes),
                           n);
  } else {
    std::vector<Eigen::MatrixXd> gammas;
    for (double t : s.times) gammas.push_back(truth.realSpacePhase(t));
    PhaseProfileSamples samples =
        samplePhaseProfiles(gammas, s.times, m.quenchBasis.gridPoints, s.imaging, n, run.seed());
    std::ostringstream spec;
    spec << "T_nK=" << s.thermal.temperature << " J_hz=" << s.tunnelCouplingHz
         << " statistics=" << statisticsName(s.thermal.statistics) << " n_sample=" << n
         << " conv_sigma_um=" << s.imaging.convolutionSigma;
    samples.generatingSpec = spec.str();
    for (std::size_t i = 0; i < s.times.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "profiles_t%03zu.csv", i);
      run.writeText(name, formatProfileSamplesCsv(samples, static_cast<int>(i), run.csvHeader()));
    }
    ms = estimateCorrelations(samples, s.imaging);
  }
  run.writeText("measurements.csv", formatMeasurementCsv(ms, run.csvHeader()));
  run.writeText("truth.json", covarianceToJson(truth.initialCovariance(), run.digest()));
  std::cout << "simulated " << s.times.size() << " times, " << (options.exact.empty() ? n : 0)
            << " shots per time -> " << run.outDir().string() << '\n';
  return 0;
}

int runReconstruct(Session& session, const ReconstructOptions& options) {
  const Scenario& s = session.scenario();
  const MeasurementSet ms = readMeasurementCsv(options.measurements, s.imaging);
  std::vector<int> idx = options.window;
  if (idx.empty() && (options.windowStart || options.windowLength)) {
    const int start = options.windowStart.value_or(0);
    const int length = options.windowLength.value_or(ms.timeCount() - start);
    if (start < 0 || length < 1 || start + length > ms.timeCount())
      throw RangeError("window [" + std::to_string(start) + ", " + std::to_string(start + length) +
                       ") exceeds the " + std::to_string(ms.timeCount()) + " measured times");
    for (int i = 0; i < length; ++i) idx.push_back(start + i);
  }
  if (idx.empty()) idx = allIndices(ms.timeCount());
  for (int i : idx)
    if (i < 0 || i >= ms.timeCount()) throw RangeError("window index " + std::to_string(i) + " out of range");

  const ScenarioModel& m = session.model();
  const ReconstructionSetup setup{m.quenchBasis, s.imaging, s.solver, s.convolvedModes};
  const ReconstructionResult result = reconstructWindow(ms, idx, setup, ms.times[idx.front()]);
  reportWarnings(result.diagnostics);

  RunContext& run = session.run();
  run.writeText("result.json", resultToJson(result, run.digest()));
  std::cout << "theta " << result.theta << ", feasibility margin " << result.feasibilityMargin << ", "
            << result.iterations << " iterations, " << (result.converged ? "converged" : "NOT converged") << '\n';
  if (!result.converged) {
    std::ostringstream diag;
    diag << std::setprecision(17) << "{\n \"converged\": false,\n \"iterations\": " << result.iterations
         << ",\n \"primal_residual\": " << (result.primalHistory.empty() ? 0.0 : result.primalHistory.back())
         << ",\n \"dual_residual\": " << (result.dualHistory.empty() ? 0.0 : result.dualHistory.back())
         << ",\n \"manifest\": \"" << run.digest() << "\"\n}\n";
    run.writeText("diagnostics.json", diag.str());
    std::cerr << "reconstruction did not converge within " << s.solver.maxIterations << " iterations\n";
    return 3;
  }
  return 0;
}

namespace {

int analyzeOccupations(Session& session, const AnalyzeOptions& o) {
  const Scenario& s = session.scenario();
  const ScenarioModel& m = session.model();
  RunContext& run = session.run();
  std::vector<double> starts;
  std::vector<OccupationEntry> entries;
  bool allConverged = true;
  if (!o.measurements.empty()) {
    const MeasurementSet ms = readMeasurementCsv(o.measurements, s.imaging);
    const ReconstructionSetup setup{m.quenchBasis, s.imaging, s.solver, s.convolvedModes};
    const OccupationSeries series =
        slidingWindowReconstruction(ms, o.windowLength.value_or(8), setup, session.threads());
    for (std::size_t w = 0; w < series.windowStartTimes.size(); ++w) {
      starts.push_back(series.windowStartTimes[w]);
      entries.push_back(phononOccupations(series.results[w], m.quenchBasis));
      allConverged = allConverged && series.results[w].converged;
    }
  } else {
    for (const auto& r : readResults(o.results, m.quenchBasis)) {
      starts.push_back(originOf(r));
      entries.push_back(phononOccupations(r, m.quenchBasis));
      allConverged = allConverged && r.converged;
    }
  }
  auto out = csvStream(run);
  out << "t_ms,k,n_k,lo,hi\n";
  for (std::size_t w = 0; w < entries.size(); ++w)
    for (Eigen::Index k = 0; k < entries[w].occupations.size(); ++k)
      out << starts[w] << ',' << k + 1 << ',' << entries[w].occupations(k) << ",nan,nan\n";
  run.writeText("occupations.csv", out.str());
  if (!allConverged) std::cerr << "warning: some reconstructions did not converge\n";
  return allConverged ? 0 : 3;
}

int analyzeCorrelator(Session& session, const AnalyzeOptions& o, bool predict) {
  const Scenario& s = session.scenario();
  RunContext& run = session.run();
  Diagnostics diag;
  auto out = csvStream(run);
  if (!o.profiles.empty() && !predict) {
    const PhaseProfileSamples samples = readProfiles(o.profiles);
    const Eigen::MatrixXd c = cosineCorrelator(samples, s.imaging, s.separations, &diag);
    writeCorrelatorRows(out, samples.times, s.separations, c);
  } else {
    const ScenarioModel& m = session.model();
    const auto results = readResults(o.results, m.quenchBasis);
    if (results.size() != 1) throw ConfigError("correlator and predict take exactly one --result");
    const ReconstructionResult& r = results.front();
    const double origin = originOf(r);
    const std::vector<double> times = predict ? s.horizon() : r.inputWindow;
    std::vector<double> rel;
    for (double t : times) rel.push_back(t - origin);
    const Eigen::MatrixXd c =
        predictRecurrence(r, m.quenchBasis, s.imaging, s.separations, rel, s.convolvedModes, &diag);
    writeCorrelatorRows(out, times, s.separations, c);
  }
  reportWarnings(diag);
  run.writeText(predict ? "prediction.csv" : "correlator.csv", out.str());
  return 0;
}

int analyzeFit(Session& session, const AnalyzeOptions& o) {
  const Scenario& s = session.scenario();
  const ScenarioModel& m = session.model();
  RunContext& run = session.run();
  const auto results = readResults(o.results, m.quenchBasis);
  if (results.size() != 1) throw ConfigError("fit-thermal takes exactly one --result");
  if (o.fitModes < 2) throw ConfigError("the thermal fit needs at least two modes");
  // Raw-mode reconstructions see blur-suppressed moments, so the predictions are blurred too.
  const ThermalModel model(m.gp.profile, s.params, s.includeDensityGradient, m.quenchBasis, o.fitModes,
                           s.thermal.statistics, s.convolvedModes ? 0.0 : s.imaging.convolutionSigma);
  ThermalFitSettings settings;
  settings.threads = session.threads();
  // V is reported at the first window time; the thermal state lives at the quench.
  const CovarianceMatrix atQuench =
      evolveCovariance(results.front().v, m.quenchBasis, o.stateTime - originOf(results.front()));
  const ThermalFitResult fit = fitThermalParameters(atQuench, model, settings);
  reportWarnings(fit.diagnostics);
  run.writeText("fit_thermal.json", thermalFitToJson(fit, run.digest()));
  std::cout << "T = " << fit.temperature << " nK, J/2pi = " << fit.couplingHz << " Hz, residual " << fit.residual
            << '\n';
  return 0;
}

int analyzeBootstrap(Session& session, const AnalyzeOptions& o) {
  const Scenario& s = session.scenario();
  if (o.profiles.empty()) throw ConfigError("bootstrap needs --profiles with the per-shot data");
  const PhaseProfileSamples all = readProfiles(o.profiles);
  std::vector<int> idx = o.window.empty() ? allIndices(static_cast<int>(all.times.size())) : o.window;
  if (o.window.empty() && !s.window.empty()) idx = s.window;
  PhaseProfileSamples samples;
  samples.seed = all.seed;
  samples.referenceIndex = all.referenceIndex;
  samples.generatingSpec = all.generatingSpec;
  for (int i : idx) {
    if (i < 0 || i >= static_cast<int>(all.times.size())) throw RangeError("window index out of range");
    samples.times.push_back(all.times[i]);
    samples.profiles.push_back(all.profiles[i]);
  }
  const double origin = samples.times.front();
  std::vector<double> rel;
  for (double t : samples.times) rel.push_back(t - origin);
  for (double& t : samples.times) t -= origin;

  const ScenarioModel& m = session.model();
  const int modes = m.quenchBasis.cutoff;
  const DesignSystemBuilder builder(m.quenchBasis, s.imaging, rel, s.convolvedModes);
  const ReferencedCouplings couplings =
      referencedCouplings(pixelWavefunctions(m.quenchBasis, s.imaging, s.convolvedModes), s.imaging);
  std::vector<std::vector<std::pair<int, int>>> pairSets;
  for (double z : s.separations) pairSets.push_back(pairsAtSeparation(s.imaging, z));
  const std::vector<double> horizon = s.horizon();

  const ScalarPipeline pipeline = [&](const MeasurementSet& ms) {
    const ReconstructionResult r = solveConstrainedLeastSquares(builder.assemble(ms), s.solver);
    const OccupationEntry e = phononOccupations(r.v, m.quenchBasis.frequencies);
    Eigen::VectorXd out(3 * modes + static_cast<Eigen::Index>(horizon.size() * pairSets.size()));
    out << e.phiMoments, e.rhoMoments, e.occupations, Eigen::VectorXd::Zero(out.size() - 3 * modes);
    Eigen::Index j = 3 * modes;
    for (double t : horizon) {
      const Eigen::MatrixXd phi = predictByEvolution(r.v, couplings, m.quenchBasis.frequencies, t - origin);
      for (const auto& pairs : pairSets) out(j++) = cosineFromCovariance(phi, pairs);
    }
    return out;
  };
  BootstrapSettings settings;
  settings.replicas = o.bootstrapReplicas.value_or(s.bootstrapReplicas);
  settings.level = s.confidenceLevel;
  settings.seed = session.run().seed();
  settings.threads = session.threads();
  const BootstrapResult b = bootstrapConfidence(samples, s.imaging, pipeline, settings);

  RunContext& run = session.run();
  auto occ = csvStream(run);
  occ << "t_ms,k,n_k,lo,hi\n";
  for (int k = 0; k < modes; ++k)
    occ << origin << ',' << k + 1 << ',' << b.estimate(2 * modes + k) << ',' << b.lower(2 * modes + k) << ','
        << b.upper(2 * modes + k) << '\n';
  run.writeText("bootstrap_occupations.csv", occ.str());

  const auto nh = static_cast<Eigen::Index>(horizon.size());
  const auto ns = static_cast<Eigen::Index>(pairSets.size());
  Eigen::MatrixXd c(nh, ns), lo(nh, ns), hi(nh, ns);
  for (Eigen::Index i = 0; i < nh; ++i)
    for (Eigen::Index k = 0; k < ns; ++k) {
      const Eigen::Index j = 3 * modes + i * ns + k;
      c(i, k) = b.estimate(j);
      lo(i, k) = b.lower(j);
      hi(i, k) = b.upper(j);
    }
  auto cor = csvStream(run);
  writeCorrelatorRows(cor, horizon, s.separations, c, &lo, &hi);
  run.writeText("bootstrap_correlator.csv", cor.str());

  auto mom = csvStream(run);
  mom << "k,phi2,phi2_lo,phi2_hi,rho2,rho2_lo,rho2_hi\n";
  for (int k = 0; k < modes; ++k)
    mom << k + 1 << ',' << b.estimate(k) << ',' << b.lower(k) << ',' << b.upper(k) << ',' << b.estimate(modes + k)
        << ',' << b.lower(modes + k) << ',' << b.upper(modes + k) << '\n';
  run.writeText("bootstrap_moments.csv", mom.str());
  std::cout << settings.replicas << " bootstrap replicas at level " << settings.level << '\n';
  return 0;
}

}  // namespace

int runAnalyze(Session& session, const AnalyzeOptions& options) {
  if (options.mode == "occupations") return analyzeOccupations(session, options);
  if (options.mode == "correlator") return analyzeCorrelator(session, options, false);
  if (options.mode == "predict") return analyzeCorrelator(session, options, true);
  if (options.mode == "fit-thermal") return analyzeFit(session, options);
  if (options.mode == "bootstrap") return analyzeBootstrap(session, options);
  throw ConfigError("unknown analysis mode '" + options.mode + "'");
}

int runGpProfile(Session& session) {
  const Scenario& s = session.scenario();
  const ScenarioModel& m = session.model();
  RunContext& run = session.run();
  std::ostringstream header;
  header << run.csvHeader() << "\n# trap = " << trapKindName(s.trap) << ", mu_rad_per_ms = " << std::setprecision(17)
         << m.gp.chemicalPotential << ", iterations = " << m.gp.iterations;
  run.writeText("gp_profile.csv", formatProfileCsv(m.gp.profile, header.str()));
  std::cout << "chemical potential " << units::radPerMsToHz(m.gp.chemicalPotential) << " Hz after " << m.gp.iterations
            << " iterations\n";
  return 0;
}

int runModes(Session& session, bool preparation) {
  const ScenarioModel& m = session.model();
  RunContext& run = session.run();
  run.writeText("modes.json", modeBasisToJson(m.quenchBasis, run.digest()));
  if (preparation) run.writeText("modes_preparation.json", modeBasisToJson(m.preparationBasis, run.digest()));
  auto out = csvStream(run);
  out << "k,omega_rad_per_ms,f_hz\n";
  for (Eigen::Index k = 0; k < m.quenchBasis.frequencies.size(); ++k)
    out << k + 1 << ',' << m.quenchBasis.frequencies(k) << ',' << units::radPerMsToHz(m.quenchBasis.frequencies(k))
        << '\n';
  run.writeText("frequencies.csv", out.str());
  std::cout << m.quenchBasis.cutoff << " modes, lowest " << units::radPerMsToHz(m.quenchBasis.frequencies(0))
            << " Hz\n";
  return 0;
}

}  // namespace quadtomo::cli
