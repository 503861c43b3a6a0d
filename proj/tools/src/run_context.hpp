#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "quadtomo/config.hpp"

namespace quadtomo::cli {

std::string sha256Hex(const std::string& data);

// Provenance of one invocation. The digest covers the canonical config, the seed and the command
// (output directory and thread count excluded), so identical runs stamp identical headers.
class RunContext {
 public:
  RunContext(KeyValueConfig config, std::uint64_t seed, std::string command, std::filesystem::path outDir,
             std::string commandLine);

  const std::string& digest() const { return digest_; }
  std::uint64_t seed() const { return seed_; }
  const KeyValueConfig& config() const { return config_; }
  const std::filesystem::path& outDir() const { return outDir_; }

  // Path inside the output directory; the file is recorded in the manifest.
  std::filesystem::path output(const std::string& name);

  // `# manifest: <digest>` line for CSV headers.
  std::string csvHeader() const;

  void writeText(const std::string& name, const std::string& text);

  std::size_t outputCount() const { return outputs_.size(); }

  // Appends one JSON line to run_manifest.jsonl.
  void appendManifest(int exitCode) const;

 private:
  KeyValueConfig config_;
  std::uint64_t seed_;
  std::string command_;
  std::filesystem::path outDir_;
  std::string commandLine_;
  std::string digest_;
  std::string started_;
  std::vector<std::string> outputs_;
};

}  // namespace quadtomo::cli
