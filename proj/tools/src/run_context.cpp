#include "run_context.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>
#include <openssl/evp.h>

#include "quadtomo/errors.hpp"
#include "quadtomo/serialization.hpp"

#ifndef QUADTOMO_VERSION
#define QUADTOMO_VERSION "unknown"
#endif

namespace quadtomo::cli {

namespace {

std::string utcNow() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

}  // namespace

std::string sha256Hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 digest failed");
  std::ostringstream out;
  for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return out.str();
}

RunContext::RunContext(KeyValueConfig config, std::uint64_t seed, std::string command, std::filesystem::path outDir,
                       std::string commandLine)
    : config_(std::move(config)),
      seed_(seed),
      command_(std::move(command)),
      outDir_(std::move(outDir)),
      commandLine_(std::move(commandLine)),
      started_(utcNow()) {
  digest_ = sha256Hex(config_.canonical() + "\nseed=" + std::to_string(seed_) + "\ncommand=" + command_ + "\n");
}

std::filesystem::path RunContext::output(const std::string& name) {
  std::error_code ec;
  std::filesystem::create_directories(outDir_, ec);
  if (ec) throw IoError("cannot create output directory " + outDir_.string() + ": " + ec.message());
  outputs_.push_back(name);
  return outDir_ / name;
}

std::string RunContext::csvHeader() const { return "# manifest: " + digest_; }

void RunContext::writeText(const std::string& name, const std::string& text) { writeTextFile(output(name), text); }

void RunContext::appendManifest(int exitCode) const {
  std::error_code ec;
  std::filesystem::create_directories(outDir_, ec);
  if (ec) throw IoError("cannot create output directory " + outDir_.string());
  nlohmann::json line{{"config_hash", digest_},
                      {"seed", seed_},
                      {"command", command_},
                      {"command_line", commandLine_},
                      {"output_paths", outputs_},
                      {"tool_version", QUADTOMO_VERSION},
                      {"started", started_},
                      {"finished", utcNow()},
                      {"exit_code", exitCode}};
  std::ofstream f(outDir_ / "run_manifest.jsonl", std::ios::app | std::ios::binary);
  if (!f) throw IoError("cannot append to " + (outDir_ / "run_manifest.jsonl").string());
  f << line.dump() << '\n';
}

}  // namespace quadtomo::cli
