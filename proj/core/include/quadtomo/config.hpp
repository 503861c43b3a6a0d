#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace quadtomo {

// Flat `key = value` configuration text. Blank lines and lines starting with
// `#` are ignored; trailing `# comments` are stripped. Every value remembers
// the line it came from so validation errors can point at it.
class KeyValueConfig {
 public:
  struct Entry {
    std::string value;
    int line = 0;
  };

  KeyValueConfig() = default;

  static KeyValueConfig parse(const std::string& text);
  static KeyValueConfig load(const std::filesystem::path& path);

  bool contains(const std::string& key) const { return entries_.count(key) != 0; }
  void set(const std::string& key, std::string value);

  std::optional<std::string> getString(const std::string& key) const;
  std::optional<double> getDouble(const std::string& key) const;
  std::optional<long long> getInt(const std::string& key) const;
  std::optional<bool> getBool(const std::string& key) const;
  std::optional<std::vector<double>> getDoubleList(const std::string& key) const;

  int lineOf(const std::string& key) const;

  // Throws ConfigError (with line number) for the first key not in `known`.
  void requireKnownKeys(const std::vector<std::string>& known) const;

  // Sorted `key = value` lines; the input to the run digest.
  std::string canonical() const;

  const std::map<std::string, Entry>& entries() const { return entries_; }

 private:
  std::map<std::string, Entry> entries_;
};

}  // namespace quadtomo
