#include "quadtomo/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "quadtomo/errors.hpp"

namespace quadtomo {
namespace {

std::string trim(const std::string& s) {
  const auto first = std::find_if_not(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
  const auto last = std::find_if_not(s.rbegin(), s.rend(), [](unsigned char c) { return std::isspace(c); }).base();
  return first < last ? std::string(first, last) : std::string();
}

double parseDouble(const std::string& text, const std::string& key, int line) {
  const std::string t = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError("value of '" + key + "' is not a number: '" + t + "'", line);
  }
  return value;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& text) {
  KeyValueConfig cfg;
  std::istringstream in(text);
  std::string raw;
  int lineNo = 0;
  while (std::getline(in, raw)) {
    ++lineNo;
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value', got '" + line + "'", lineNo);
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key", lineNo);
    if (cfg.entries_.count(key)) throw ConfigError("duplicate key '" + key + "'", lineNo);
    cfg.entries_[key] = Entry{value, lineNo};
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

void KeyValueConfig::set(const std::string& key, std::string value) {
  entries_[key] = Entry{std::move(value), 0};
}

std::optional<std::string> KeyValueConfig::getString(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second.value;
}

std::optional<double> KeyValueConfig::getDouble(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return parseDouble(it->second.value, key, it->second.line);
}

std::optional<long long> KeyValueConfig::getInt(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  const std::string t = trim(it->second.value);
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError("value of '" + key + "' is not an integer: '" + t + "'", it->second.line);
  }
  return value;
}

std::optional<bool> KeyValueConfig::getBool(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  std::string t = trim(it->second.value);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError("value of '" + key + "' is not a boolean: '" + t + "'", it->second.line);
}

std::optional<std::vector<double>> KeyValueConfig::getDoubleList(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  std::vector<double> values;
  std::stringstream ss(it->second.value);
  std::string item;
  while (std::getline(ss, item, ',')) values.push_back(parseDouble(item, key, it->second.line));
  if (values.empty()) throw ConfigError("list '" + key + "' is empty", it->second.line);
  return values;
}

int KeyValueConfig::lineOf(const std::string& key) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? 0 : it->second.line;
}

void KeyValueConfig::requireKnownKeys(const std::vector<std::string>& known) const {
  for (const auto& [key, entry] : entries_) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError("unknown key '" + key + "'", entry.line);
    }
  }
}

std::string KeyValueConfig::canonical() const {
  std::string out;
  for (const auto& [key, entry] : entries_) out += key + " = " + entry.value + "\n";
  return out;
}

}  // namespace quadtomo
