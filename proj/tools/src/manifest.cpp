#include "kspattern/cli/manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <ctime>
#include <fstream>
#include <memory>

#include "json.hpp"
#include "kspattern/errors.hpp"

#ifndef KSPATTERN_VERSION
#define KSPATTERN_VERSION "unknown"
#endif

namespace kspattern::cli {

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw error("cannot read " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                              &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw error("SHA-256 unavailable");
  }
  std::array<char, 1 << 16> buf;
  while (is) {
    is.read(buf.data(), buf.size());
    if (is.gcount() > 0) {
      EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(is.gcount()));
    }
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md;
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int k = 0; k < len; ++k) {
    out += hex[md[k] >> 4];
    out += hex[md[k] & 15];
  }
  return out;
}

namespace {

std::string utc_iso8601(std::chrono::system_clock::time_point tp) {
  const std::time_t t = std::chrono::system_clock::to_time_t(tp);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

run_manifest::run_manifest(std::string command, std::string config_json)
    : command_(std::move(command)),
      config_json_(std::move(config_json)),
      start_(std::chrono::system_clock::now()) {}

void run_manifest::add(const std::filesystem::path& relative) {
  files_.push_back(relative);
}

void run_manifest::write(const std::filesystem::path& dir) const {
  nlohmann::ordered_json j;
  j["command"] = command_;
  j["version"] = KSPATTERN_VERSION;
  j["config"] = nlohmann::ordered_json::parse(config_json_);
  j["started"] = utc_iso8601(start_);
  j["finished"] = utc_iso8601(std::chrono::system_clock::now());
  auto files = nlohmann::ordered_json::array();
  for (const auto& rel : files_) {
    const auto full = dir / rel;
    files.push_back({{"path", rel.generic_string()},
                     {"bytes", std::filesystem::file_size(full)},
                     {"sha256", sha256_file(full)}});
  }
  j["files"] = std::move(files);
  std::ofstream os(dir / file_name, std::ios::binary);
  if (!os) throw error("cannot write " + (dir / file_name).string());
  os << j.dump(2) << '\n';
}

}  // namespace kspattern::cli
