#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "kspattern/errors.hpp"
#include "kspattern/field_io.hpp"
#include "kspattern/image_io.hpp"
#include "kspattern/oracles.hpp"

namespace ks = kspattern;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  auto d = fs::temp_directory_path() / ("ks_io_" + std::to_string(::getpid()));
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST(FieldCsv, RoundTripIsExact) {
  const ks::grid_spec g{7, 5, 0.5};
  const auto f = ks::oracle::random_field(g, 77, -1e3, 1e3);
  const auto path = temp_dir() / "f.csv";
  ks::write_field_csv(path, f);
  const auto back = ks::read_field_csv(path, 0.5);
  EXPECT_EQ(back, f);
  std::ostringstream os;
  ks::write_field_csv(os, ks::scalar_field::constant({3, 3, 1.0}, 0.1));
  EXPECT_EQ(os.str(), "0.10000000000000001,0.10000000000000001,0.10000000000000001\n"
                      "0.10000000000000001,0.10000000000000001,0.10000000000000001\n"
                      "0.10000000000000001,0.10000000000000001,0.10000000000000001\n");
}

TEST(FieldCsv, RejectsRaggedRows) {
  const auto path = temp_dir() / "ragged.csv";
  std::ofstream(path) << "1,2,3\n4,5\n6,7,8\n";
  EXPECT_THROW(ks::read_field_csv(path), ks::error);
}

TEST(FieldPgm, AsciiForSmallBinaryForLarge) {
  const auto dir = temp_dir();
  ks::scalar_field small = ks::scalar_field::constant({4, 3, 1.0}, 0.5);
  small(0, 0) = 0.0;
  small(2, 3) = 2.0;
  ks::write_field_pgm(dir / "small.pgm", small, 0.0, 1.0);
  const auto text = slurp(dir / "small.pgm");
  EXPECT_EQ(text.substr(0, 2), "P2");
  const auto img = ks::read_pgm(dir / "small.pgm");
  EXPECT_EQ(img.width, 4u);
  EXPECT_EQ(img.height, 3u);
  EXPECT_EQ(img.at(0, 0), 0.0);
  EXPECT_EQ(img.at(2, 3), 1.0);
  EXPECT_NEAR(img.at(1, 1), 0.5, 1.0 / 255.0);

  ks::write_field_pgm(dir / "large.pgm", ks::scalar_field::constant({65, 64, 1.0}, 1.0), 0.0, 1.0);
  EXPECT_EQ(slurp(dir / "large.pgm").substr(0, 2), "P5");
  EXPECT_EQ(ks::read_pgm(dir / "large.pgm").at(63, 64), 1.0);
}

TEST(Pgm, ParsesCommentsAndSixteenBit) {
  const auto dir = temp_dir();
  std::ofstream(dir / "c.pgm") << "P2\n# comment\n2 2\n# another\n1000\n0 500\n1000 250\n";
  const auto img = ks::read_pgm(dir / "c.pgm");
  EXPECT_EQ(img.at(0, 1), 0.5);
  EXPECT_EQ(img.at(1, 1), 0.25);
  {
    std::ofstream out(dir / "w.pgm", std::ios::binary);
    out << "P5\n2 1\n65535\n";
    const unsigned char bytes[] = {0xff, 0xff, 0x00, 0x00};
    out.write(reinterpret_cast<const char*>(bytes), 4);
  }
  const auto w = ks::read_image(dir / "w.pgm");
  EXPECT_EQ(w.at(0, 0), 1.0);
  EXPECT_EQ(w.at(0, 1), 0.0);
}

TEST(Png, WriteReadRoundTrip) {
  const auto dir = temp_dir();
  ks::gray_image img{3, 2, {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}};
  ks::write_png(dir / "g.png", img);
  const auto back = ks::read_image(dir / "g.png");
  ASSERT_EQ(back.width, 3u);
  ASSERT_EQ(back.height, 2u);
  for (std::size_t k = 0; k < 6; ++k) EXPECT_NEAR(back.pixels[k], img.pixels[k], 0.5 / 255.0);
}

TEST(Images, GarbageIsAnIngestionFault) {
  const auto dir = temp_dir();
  std::ofstream(dir / "junk.png") << "not an image at all";
  EXPECT_THROW(ks::read_image(dir / "junk.png"), ks::ingestion_fault);
  std::ofstream(dir / "trunc.pgm") << "P5\n10 10\n255\nabc";
  EXPECT_THROW(ks::read_image(dir / "trunc.pgm"), ks::ingestion_fault);
}
