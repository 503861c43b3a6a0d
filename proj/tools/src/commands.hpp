#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "quadtomo/scenario.hpp"
#include "run_context.hpp"

namespace quadtomo::cli {

struct GlobalOptions {
  std::string config;
  std::uint64_t seed = 1;
  std::string out = ".";
  unsigned threads = 0;
  std::string commandLine;
};

struct SimulateOptions {
  std::optional<int> nSample;
  std::string exact;  // "", "full" or "model"
};

struct ReconstructOptions {
  std::string measurements;
  std::vector<int> window;
  std::optional<int> windowStart;
  std::optional<int> windowLength;
};

struct AnalyzeOptions {
  std::string mode;
  std::vector<std::string> results;
  std::string profiles;
  std::string measurements;
  std::optional<int> windowLength;
  std::vector<int> window;
  std::optional<int> bootstrapReplicas;
  int fitModes = 5;
  double stateTime = 0.0;  // ms, time of the thermal state for fit-thermal
};

// Canonical option text entering the run digest.
std::string describe(const SimulateOptions& o);
std::string describe(const ReconstructOptions& o);
std::string describe(const AnalyzeOptions& o);

// Loaded configuration plus the provenance record of one invocation.
class Session {
 public:
  Session(const GlobalOptions& global, const std::string& command);

  const Scenario& scenario() const { return scenario_; }
  RunContext& run() { return *run_; }
  unsigned threads() const { return threads_; }
  bool started() const { return run_ != nullptr; }

  // Appends the manifest unless a validation failure left no outputs behind.
  void finish(int exitCode);

  const ScenarioModel& model();

 private:
  Scenario scenario_;
  unsigned threads_;
  std::unique_ptr<RunContext> run_;
  std::unique_ptr<ScenarioModel> model_;
  bool wroteOutputs() const;
};

int runSimulate(Session& session, const SimulateOptions& options);
int runReconstruct(Session& session, const ReconstructOptions& options);
int runAnalyze(Session& session, const AnalyzeOptions& options);
int runGpProfile(Session& session);
int runModes(Session& session, bool preparation);

}  // namespace quadtomo::cli
