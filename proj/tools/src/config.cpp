#include "kspattern/cli/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace kspattern::cli {

config_error::config_error(const std::filesystem::path& file, std::size_t line,
                           const std::string& key, const std::string& what)
    : error(file.string() + ":" + std::to_string(line) +
            (key.empty() ? std::string() : ": key '" + key + "'") + ": " + what),
      line_(line),
      key_(key) {}

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::vector<config_entry> read_config(const std::filesystem::path& file) {
  std::ifstream is(file);
  if (!is) throw error("cannot open config file " + file.string());
  std::vector<config_entry> out;
  std::set<std::string> seen;
  std::string raw;
  for (std::size_t line = 1; std::getline(is, raw); ++line) {
    const auto hash = raw.find('#');
    const std::string text = trim(raw.substr(0, hash));
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw config_error(file, line, "", "expected key = value");
    }
    std::string key = trim(text.substr(0, eq));
    std::replace(key.begin(), key.end(), '_', '-');
    if (key.empty()) throw config_error(file, line, "", "empty key");
    if (!seen.insert(key).second) {
      throw config_error(file, line, key, "repeated key");
    }
    out.push_back({key, trim(text.substr(eq + 1)), line});
  }
  return out;
}

}  // namespace kspattern::cli
