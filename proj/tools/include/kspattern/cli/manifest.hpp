#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

namespace kspattern::cli {

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// Collects the description of one command run and writes manifest.json
/// next to the artifacts it lists.
class run_manifest {
 public:
  /// `config_json` is a serialized JSON object holding every effective
  /// parameter of the run.
  run_manifest(std::string command, std::string config_json);

  /// Registers a file written into the output directory.
  void add(const std::filesystem::path& relative);
  const std::vector<std::filesystem::path>& files() const noexcept {
    return files_;
  }

  /// Stamps the end time, checksums every listed file and writes
  /// `dir / manifest.json`.
  void write(const std::filesystem::path& dir) const;

  static constexpr const char* file_name = "manifest.json";

 private:
  std::string command_;
  std::string config_json_;
  std::chrono::system_clock::time_point start_;
  std::vector<std::filesystem::path> files_;
};

}  // namespace kspattern::cli
