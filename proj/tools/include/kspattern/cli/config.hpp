#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "kspattern/errors.hpp"

namespace kspattern::cli {

/// Problem in a key=value configuration file, located by line and key.
class config_error : public error {
 public:
  config_error(const std::filesystem::path& file, std::size_t line,
               const std::string& key, const std::string& what);
  std::size_t line() const noexcept { return line_; }
  const std::string& key() const noexcept { return key_; }

 private:
  std::size_t line_;
  std::string key_;
};

struct config_entry {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

/// Flat `key = value` lines; `#` starts a comment, blank lines are skipped.
/// Keys are option names without leading dashes, with '_' read as '-'.
/// Throws config_error on a malformed line, an empty key or a repeated key,
/// and error if the file cannot be read.
std::vector<config_entry> read_config(const std::filesystem::path& file);

}  // namespace kspattern::cli
