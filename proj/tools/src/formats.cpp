#include "kspattern/cli/formats.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>

#include "kspattern/errors.hpp"

namespace kspattern::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

template <class T>
T parse_number(std::string_view s, const char* what) {
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    throw invalid_argument("invalid " + std::string(what) + " '" +
                           std::string(s) + "'");
  }
  return value;
}

}  // namespace

grid_spec parse_grid(std::string_view text) {
  const auto t = trim(text);
  const auto x = t.find_first_of("xX");
  grid_spec g;
  g.h = 1.0;
  if (x == std::string_view::npos) {
    g.nx = g.ny = parse_number<std::size_t>(t, "grid size");
  } else {
    g.nx = parse_number<std::size_t>(trim(t.substr(0, x)), "grid width");
    g.ny = parse_number<std::size_t>(trim(t.substr(x + 1)), "grid height");
  }
  g.validate();
  return g;
}

std::vector<double> parse_reals(std::string_view text) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  for (auto part : split(text, ',')) out.push_back(parse_number<double>(part, "number"));
  return out;
}

std::vector<probe> parse_probes(std::string_view text) {
  std::vector<probe> out;
  if (trim(text).empty()) return out;
  for (auto part : split(text, ',')) {
    const auto colon = part.find(':');
    if (colon == std::string_view::npos) {
      throw invalid_argument("probe '" + std::string(part) + "' is not of the form i:j");
    }
    out.push_back({parse_number<std::size_t>(trim(part.substr(0, colon)), "probe row"),
                   parse_number<std::size_t>(trim(part.substr(colon + 1)), "probe column")});
  }
  return out;
}

std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string time_tag(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", t);
  return buf;
}

void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw error("cannot write " + path.string());
  auto line = [&os](const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (k != 0) os << ',';
      os << cells[k];
    }
    os << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  if (!os) throw error("failed writing " + path.string());
}

void write_probe_csv(const std::filesystem::path& path, const probe_series& s) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) {
    rows.push_back({format_real(s.t[k]), format_real(s.u[k]), format_real(s.v[k]),
                    format_real(s.lap_u[k]), format_real(s.lap_v[k]),
                    format_real(s.gradu_dot_gradv[k])});
  }
  write_csv(path, {"t", "u", "v", "lap_u", "lap_v", "gradu_dot_gradv"}, rows);
}

void write_means_csv(const std::filesystem::path& path, const mean_series& m) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(m.t.size());
  for (std::size_t k = 0; k < m.t.size(); ++k) {
    rows.push_back({format_real(m.t[k]), format_real(m.ubar[k]), format_real(m.vbar[k])});
  }
  write_csv(path, {"t", "ubar", "vbar"}, rows);
}

}  // namespace kspattern::cli
