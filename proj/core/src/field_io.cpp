#include "kspattern/field_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "kspattern/errors.hpp"

namespace kspattern {

void write_field_csv(std::ostream& os, const scalar_field& f) {
  char buf[32];
  for (std::size_t i = 0; i < f.ny(); ++i) {
    for (std::size_t j = 0; j < f.nx(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", f(i, j));
      if (j != 0) os << ',';
      os << buf;
    }
    os << '\n';
  }
}

void write_field_csv(const std::filesystem::path& path, const scalar_field& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw error("cannot write " + path.string());
  write_field_csv(os, f);
  if (!os) throw error("failed writing " + path.string());
}

scalar_field read_field_csv(const std::filesystem::path& path, double h) {
  std::ifstream is(path);
  if (!is) throw ingestion_fault("cannot open " + path.string());
  std::vector<double> values;
  std::size_t nx = 0, ny = 0;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::size_t count = 0;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t pos = 0;
        values.push_back(std::stod(cell, &pos));
        if (pos != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ingestion_fault("bad number '" + cell + "' on line " +
                              std::to_string(ny + 1) + " of " + path.string());
      }
      ++count;
    }
    if (ny == 0) nx = count;
    if (count != nx) {
      throw ingestion_fault("ragged row " + std::to_string(ny + 1) + " in " +
                            path.string());
    }
    ++ny;
  }
  grid_spec spec{nx, ny, h};
  spec.validate();
  return scalar_field(spec, std::move(values));
}

gray_image field_to_image(const scalar_field& f, double lo, double hi) {
  if (!(hi > lo)) throw invalid_argument("gray range must satisfy hi > lo");
  gray_image img;
  img.width = f.nx();
  img.height = f.ny();
  img.pixels.resize(f.size());
  const double scale = 1.0 / (hi - lo);
  for (std::size_t k = 0; k < f.size(); ++k) img.pixels[k] = (f[k] - lo) * scale;
  return img;
}

void write_field_pgm(const std::filesystem::path& path, const scalar_field& f,
                     double lo, double hi) {
  write_pgm(path, field_to_image(f, lo, hi), f.size() > ascii_pgm_limit);
}

}  // namespace kspattern
