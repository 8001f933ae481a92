#include "kspattern/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "kspattern/errors.hpp"

namespace kspattern {

namespace {

struct file_closer {
  void operator()(std::FILE* f) const noexcept {
    if (f != nullptr) std::fclose(f);
  }
};
using file_ptr = std::unique_ptr<std::FILE, file_closer>;

file_ptr open_file(const std::filesystem::path& path, const char* mode) {
  file_ptr f(std::fopen(path.c_str(), mode));
  if (!f) {
    throw ingestion_fault("cannot open " + path.string());
  }
  return f;
}

std::uint8_t to_byte(double x) {
  const double c = std::clamp(x, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::lround(c * 255.0));
}

// Next whitespace-delimited PNM header token, skipping '#' comments.
std::string pnm_token(std::istream& is) {
  std::string tok;
  char ch = 0;
  while (is.get(ch)) {
    if (ch == '#') {
      std::string ignored;
      std::getline(is, ignored);
      if (!tok.empty()) break;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch)) != 0) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(ch);
  }
  return tok;
}

std::size_t parse_positive(const std::string& tok, const std::string& what,
                           const std::filesystem::path& path) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(tok, &pos);
    if (pos != tok.size() || v <= 0) throw std::invalid_argument(tok);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw ingestion_fault("bad PGM " + what + " '" + tok + "' in " +
                          path.string());
  }
}

}  // namespace

gray_image read_pgm(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ingestion_fault("cannot open " + path.string());
  const std::string magic = pnm_token(is);
  if (magic != "P2" && magic != "P5") {
    throw ingestion_fault(path.string() + " is not a PGM file");
  }
  gray_image img;
  img.width = parse_positive(pnm_token(is), "width", path);
  img.height = parse_positive(pnm_token(is), "height", path);
  const std::size_t maxval = parse_positive(pnm_token(is), "maxval", path);
  if (maxval > 65535) throw ingestion_fault("PGM maxval too large in " + path.string());
  const std::size_t n = img.width * img.height;
  img.pixels.resize(n);
  const double scale = 1.0 / static_cast<double>(maxval);
  if (magic == "P2") {
    for (std::size_t k = 0; k < n; ++k) {
      const std::string tok = pnm_token(is);
      if (tok.empty()) throw ingestion_fault("truncated PGM " + path.string());
      std::size_t pos = 0;
      long v = -1;
      try {
        v = std::stol(tok, &pos);
      } catch (const std::exception&) {
      }
      if (pos != tok.size() || v < 0 || static_cast<std::size_t>(v) > maxval) {
        throw ingestion_fault("bad PGM sample '" + tok + "' in " + path.string());
      }
      img.pixels[k] = static_cast<double>(v) * scale;
    }
  } else {
    const std::size_t bytes = maxval < 256 ? 1 : 2;
    std::vector<unsigned char> raw(n * bytes);
    is.read(reinterpret_cast<char*>(raw.data()),
            static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(is.gcount()) != raw.size()) {
      throw ingestion_fault("truncated PGM " + path.string());
    }
    for (std::size_t k = 0; k < n; ++k) {
      const unsigned v = bytes == 1 ? raw[k]
                                    : (unsigned{raw[2 * k]} << 8) | raw[2 * k + 1];
      img.pixels[k] = static_cast<double>(std::min<std::size_t>(v, maxval)) * scale;
    }
  }
  return img;
}

gray_image read_png(const std::filesystem::path& path) {
  file_ptr fp = open_file(path, "rb");
  std::array<png_byte, 8> sig{};
  if (std::fread(sig.data(), 1, sig.size(), fp.get()) != sig.size() ||
      png_sig_cmp(sig.data(), 0, sig.size()) != 0) {
    throw ingestion_fault(path.string() + " is not a PNG file");
  }
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (png == nullptr) throw ingestion_fault("libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw ingestion_fault("libpng initialisation failed");
  }
  gray_image img;
  std::vector<png_byte> buffer;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ingestion_fault("corrupt PNG " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_sig_bytes(png, static_cast<int>(sig.size()));
  png_read_info(png, info);
  png_set_expand(png);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  const png_byte color = png_get_color_type(png, info);
  if ((color & PNG_COLOR_MASK_COLOR) != 0 || color == PNG_COLOR_TYPE_PALETTE) {
    png_set_rgb_to_gray_fixed(png, 1, -1, -1);
  }
  png_read_update_info(png, info);
  img.width = png_get_image_width(png, info);
  img.height = png_get_image_height(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  const std::size_t channels = png_get_channels(png, info);
  buffer.resize(rowbytes * img.height);
  rows.resize(img.height);
  for (std::size_t r = 0; r < img.height; ++r) rows[r] = buffer.data() + r * rowbytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  img.pixels.resize(img.width * img.height);
  for (std::size_t r = 0; r < img.height; ++r) {
    for (std::size_t c = 0; c < img.width; ++c) {
      img.pixels[r * img.width + c] =
          static_cast<double>(rows[r][c * channels]) / 255.0;
    }
  }
  return img;
}

gray_image read_image(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ingestion_fault("cannot open " + path.string());
  std::array<char, 8> head{};
  is.read(head.data(), head.size());
  const auto got = static_cast<std::size_t>(is.gcount());
  if (got >= 8 && png_sig_cmp(reinterpret_cast<png_const_bytep>(head.data()), 0,
                              8) == 0) {
    return read_png(path);
  }
  if (got >= 2 && head[0] == 'P' && (head[1] == '2' || head[1] == '5')) {
    return read_pgm(path);
  }
  throw ingestion_fault("unsupported image format: " + path.string());
}

void write_png(const std::filesystem::path& path, const gray_image& img) {
  if (img.pixels.size() != img.width * img.height) {
    throw dimension_error("image pixel count does not match its size");
  }
  file_ptr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw error("cannot write " + path.string());
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png != nullptr ? png_create_info_struct(png) : nullptr;
  if (png == nullptr || info == nullptr) {
    png_destroy_write_struct(&png, &info);
    throw error("libpng initialisation failed");
  }
  std::vector<png_byte> row(img.width);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw error("failed writing PNG " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
               static_cast<png_uint_32>(img.height), 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (std::size_t r = 0; r < img.height; ++r) {
    for (std::size_t c = 0; c < img.width; ++c) row[c] = to_byte(img.at(r, c));
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void write_pgm(const std::filesystem::path& path, const gray_image& img,
               bool binary) {
  if (img.pixels.size() != img.width * img.height) {
    throw dimension_error("image pixel count does not match its size");
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw error("cannot write " + path.string());
  os << (binary ? "P5" : "P2") << '\n'
     << img.width << ' ' << img.height << "\n255\n";
  if (binary) {
    std::vector<char> raw(img.pixels.size());
    std::transform(img.pixels.begin(), img.pixels.end(), raw.begin(),
                   [](double x) { return static_cast<char>(to_byte(x)); });
    os.write(raw.data(), static_cast<std::streamsize>(raw.size()));
  } else {
    for (std::size_t r = 0; r < img.height; ++r) {
      for (std::size_t c = 0; c < img.width; ++c) {
        os << (c == 0 ? "" : " ") << static_cast<unsigned>(to_byte(img.at(r, c)));
      }
      os << '\n';
    }
  }
  if (!os) throw error("failed writing " + path.string());
}

}  // namespace kspattern
