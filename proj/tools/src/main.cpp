#include <filesystem>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "quadtomo/errors.hpp"

namespace {

enum ExitCode { kOk = 0, kValidation = 2, kNumerical = 3, kIo = 4 };

int exitCodeFor(const std::exception_ptr& error) {
  try {
    std::rethrow_exception(error);
  } catch (const quadtomo::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const quadtomo::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const quadtomo::InstabilityError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const quadtomo::Error& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  }
}

}  // namespace

int main(int argc, char** argv) {
  using namespace quadtomo::cli;

  CLI::App app{"Covariance tomography of tunnel-coupled 1D quantum gases"};
  app.set_version_flag("--version", QUADTOMO_VERSION);
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions global;
  app.add_option("--config", global.config, "Key-value configuration file");
  app.add_option("--seed", global.seed, "64-bit RNG seed");
  app.add_option("--out", global.out, "Output directory");
  app.add_option("--threads", global.threads, "Worker threads (0: all cores)");

  SimulateOptions simulate;
  auto* sim = app.add_subcommand("simulate", "Sample phase profiles and estimate correlations");
  sim->add_option("--n-sample", simulate.nSample, "Shots per time (overrides n_sample)");
  sim->add_option("--exact", simulate.exact, "Write exact correlations instead of samples: full or model")
      ->check(CLI::IsMember({"full", "model"}));

  ReconstructOptions reconstruct;
  auto* rec = app.add_subcommand("reconstruct", "Recover the covariance matrix from a measurement CSV");
  rec->add_option("--measurements", reconstruct.measurements, "Measurement CSV")->required();
  rec->add_option("--window", reconstruct.window, "Comma-separated time indices")->delimiter(',');
  rec->add_option("--window-start", reconstruct.windowStart, "First time index of the window");
  rec->add_option("--window-length", reconstruct.windowLength, "Number of times in the window");

  AnalyzeOptions analyze;
  auto* ana = app.add_subcommand("analyze", "Analyses of reconstructed states");
  ana->add_option("mode", analyze.mode, "occupations, correlator, predict, fit-thermal or bootstrap")
      ->required()
      ->check(CLI::IsMember({"occupations", "correlator", "predict", "fit-thermal", "bootstrap"}));
  ana->add_option("--result", analyze.results, "Reconstruction result JSON (repeatable)");
  ana->add_option("--profiles", analyze.profiles, "Directory with profiles_t*.csv");
  ana->add_option("--measurements", analyze.measurements, "Measurement CSV (sliding-window occupations)");
  ana->add_option("--window-length", analyze.windowLength, "Sliding window length I");
  ana->add_option("--window", analyze.window, "Comma-separated time indices for bootstrap")->delimiter(',');
  ana->add_option("--n-bootstrap", analyze.bootstrapReplicas, "Bootstrap replicas (overrides n_bootstrap)");
  ana->add_option("--fit-modes", analyze.fitModes, "Modes entering the thermal fit");
  ana->add_option("--state-time", analyze.stateTime, "Time (ms) at which the state is thermal, for fit-thermal");

  auto* gp = app.add_subcommand("gp-profile", "Solve the Gross-Pitaevskii ground state");
  auto* modes = app.add_subcommand("modes", "Symplectic eigenmodes of the quench Hamiltonian");
  bool preparation = false;
  modes->add_flag("--preparation", preparation, "Also export the preparation basis");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  std::ostringstream line;
  for (int i = 0; i < argc; ++i) line << (i ? " " : "") << argv[i];
  global.commandLine = line.str();

  std::unique_ptr<Session> session;
  int code = kOk;
  try {
    if (*sim) {
      session = std::make_unique<Session>(global, "simulate" + describe(simulate));
      code = runSimulate(*session, simulate);
    } else if (*rec) {
      session = std::make_unique<Session>(global, "reconstruct " + describe(reconstruct));
      code = runReconstruct(*session, reconstruct);
    } else if (*ana) {
      session = std::make_unique<Session>(global, "analyze " + describe(analyze));
      code = runAnalyze(*session, analyze);
    } else if (*gp) {
      session = std::make_unique<Session>(global, "gp-profile");
      code = runGpProfile(*session);
    } else if (*modes) {
      session = std::make_unique<Session>(global, std::string("modes") + (preparation ? " --preparation" : ""));
      code = runModes(*session, preparation);
    }
  } catch (...) {
    code = exitCodeFor(std::current_exception());
  }
  if (session && session->started()) {
    try {
      session->finish(code);
    } catch (...) {
      return exitCodeFor(std::current_exception());
    }
  }
  return code;
}
