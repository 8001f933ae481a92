#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "json.hpp"
#include "kspattern/cli/app.hpp"
#include "kspattern/cli/commands.hpp"
#include "kspattern/cli/config.hpp"
#include "kspattern/cli/formats.hpp"
#include "kspattern/cli/manifest.hpp"
#include "kspattern/field_io.hpp"
#include "kspattern/simulator.hpp"

namespace ks = kspattern;
namespace cli = kspattern::cli;
namespace fs = std::filesystem;

namespace {

struct outcome {
  int code = -1;
  std::string out, err;
};

outcome run_cli(std::vector<std::string> args, const cli::selftest_hooks& hooks = {}) {
  std::ostringstream out, err;
  outcome r;
  r.code = cli::run(args, out, err, hooks);
  r.out = out.str();
  r.err = err.str();
  return r;
}

class scratch_dir {
 public:
  scratch_dir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() /
            ("kspattern_cli_" + std::string(info->test_suite_name()) + "_" + info->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~scratch_dir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

std::set<std::string> listing(const fs::path& dir) {
  std::set<std::string> names;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) names.insert(fs::relative(e.path(), dir).generic_string());
  }
  return names;
}

std::size_t data_lines(const fs::path& csv) {
  std::ifstream is(csv);
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) ++n;
  return n == 0 ? 0 : n - 1;
}

const std::vector<std::string> small_sim = {"--grid", "32", "simulate", "--gamma", "0.25",
                                            "--t-end", "0.5", "--snapshots", "0,0.25,0.5"};

std::vector<std::string> with_out(std::vector<std::string> args, const std::string& out) {
  args.insert(args.begin(), {"--out", out});
  return args;
}

// Density frames from a short simulation written as 8-bit PGM rasters.
void write_frames(const fs::path& dir, std::size_t count) {
  fs::create_directories(dir);
  ks::sim_config c;
  c.grid = {40, 40, 1.0};
  c.params.gamma = 0.25;
  c.t_end = 0.2 * static_cast<double>(count - 1);
  for (std::size_t k = 0; k < count; ++k) c.snapshot_times.push_back(0.2 * static_cast<double>(k));
  const auto run = ks::run(c);
  char name[32];
  for (std::size_t k = 0; k < run.snapshots.size(); ++k) {
    std::snprintf(name, sizeof name, "frame%02zu.pgm", k);
    ks::write_field_pgm(dir / name, run.snapshots[k].u, 0.0, 1.0);
  }
}

}  // namespace

TEST(Formats, GridSpecifications) {
  EXPECT_EQ(cli::parse_grid("64"), (ks::grid_spec{64, 64, 1.0}));
  EXPECT_EQ(cli::parse_grid("32x16"), (ks::grid_spec{32, 16, 1.0}));
  EXPECT_EQ(cli::parse_grid(" 8 X 9 "), (ks::grid_spec{8, 9, 1.0}));
  for (const char* bad : {"", "x", "2", "10x", "ax3", "-4", "4.5"}) {
    EXPECT_THROW(cli::parse_grid(bad), ks::invalid_argument) << bad;
  }
}

TEST(Formats, ListsAndProbes) {
  EXPECT_EQ(cli::parse_reals("0.1, 0.2,0.25"), (std::vector<double>{0.1, 0.2, 0.25}));
  EXPECT_TRUE(cli::parse_reals(" ").empty());
  EXPECT_THROW(cli::parse_reals("0.1,,0.2"), ks::invalid_argument);
  const auto probes = cli::parse_probes("50:50, 3:7");
  ASSERT_EQ(probes.size(), 2u);
  EXPECT_EQ(probes[1], (ks::probe{3, 7}));
  EXPECT_THROW(cli::parse_probes("50"), ks::invalid_argument);
  EXPECT_EQ(cli::time_tag(0.6000000000000005), "0.6");
  EXPECT_EQ(cli::format_real(0.1), "0.10000000000000001");
}

TEST(Config, ParsesCommentsAndNormalizesKeys) {
  scratch_dir dir;
  std::ofstream(dir / "a.cfg") << "# header\n\nt_end = 3  # trailing\n gamma=0.25\n";
  const auto entries = cli::read_config(dir / "a.cfg");
  ASSERT_EQ(entries.size(), 2u);
  EXPECT_EQ(entries[0].key, "t-end");
  EXPECT_EQ(entries[0].value, "3");
  EXPECT_EQ(entries[0].line, 3u);
  EXPECT_EQ(entries[1].key, "gamma");
}

TEST(Config, DiagnosticsCarryLineAndKey) {
  scratch_dir dir;
  std::ofstream(dir / "dup.cfg") << "gamma = 0.2\n\ngamma = 0.3\n";
  try {
    cli::read_config(dir / "dup.cfg");
    FAIL() << "repeated key accepted";
  } catch (const cli::config_error& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_EQ(e.key(), "gamma");
  }
  std::ofstream(dir / "syntax.cfg") << "gamma 0.2\n";
  EXPECT_THROW(cli::read_config(dir / "syntax.cfg"), cli::config_error);
}

TEST(ExitCodes, UsageErrors) {
  EXPECT_EQ(run_cli({}).code, cli::exit_usage_error);
  EXPECT_EQ(run_cli({"bogus"}).code, cli::exit_usage_error);
  EXPECT_EQ(run_cli({"simulate", "--no-such-flag"}).code, cli::exit_usage_error);
  EXPECT_EQ(run_cli({"simulate", "--gamma", "abc"}).code, cli::exit_usage_error);
  EXPECT_EQ(run_cli({"--help"}).code, cli::exit_ok);
}

TEST(ExitCodes, MissingGammaIsUsageError) {
  scratch_dir dir;
  const auto r = run_cli({"--out", dir / "o", "--grid", "32", "simulate", "--t-end", "0.1"});
  EXPECT_EQ(r.code, cli::exit_usage_error);
  EXPECT_NE(r.err.find("--gamma"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir / "o"));
}

TEST(ExitCodes, GammaOutOfRangeIsValidationError) {
  scratch_dir dir;
  EXPECT_EQ(run_cli(with_out({"--grid", "32", "simulate", "--gamma", "1.5", "--t-end", "0.1"},
                             dir / "a"))
                .code,
            cli::exit_usage_error);
  EXPECT_EQ(run_cli(with_out({"--grid", "32", "sweep", "--gammas", "0.25,1.5", "--t-end", "0.1"},
                             dir / "b"))
                .code,
            cli::exit_usage_error);
  EXPECT_EQ(run_cli(with_out({"--grid", "8", "simulate", "--gamma", "0.25"}, dir / "c")).code,
            cli::exit_usage_error);
}

TEST(ExitCodes, BlowUpIsRuntimeFaultWithTime) {
  scratch_dir dir;
  const auto r = run_cli(with_out({"--grid", "32", "--dt", "0.5", "simulate", "--gamma", "0.25",
                                   "--t-end", "50"},
                                  dir / "o"));
  EXPECT_EQ(r.code, cli::exit_runtime_fault);
  EXPECT_NE(r.err.find("runtime fault at t ="), std::string::npos) << r.err;
}

TEST(Simulate, WritesEveryArtifact) {
  scratch_dir dir;
  const auto r = run_cli(with_out(small_sim, dir / "o"));
  ASSERT_EQ(r.code, cli::exit_ok) << r.err;
  const auto files = listing(dir.path() / "o");
  for (const char* name :
       {"u_t0.csv", "v_t0.csv", "u_t0.pgm", "v_t0.pgm", "u_t0.25.csv", "u_t0.5.pgm",
        "probe_16_16.csv", "means.csv", "outcome.txt", "palette.txt", "manifest.json"}) {
    EXPECT_TRUE(files.count(name)) << name;
  }
  EXPECT_EQ(slurp(dir.path() / "o" / "probe_16_16.csv").substr(0, 34),
            "t,u,v,lap_u,lap_v,gradu_dot_gradv\n");
  EXPECT_EQ(data_lines(dir.path() / "o" / "probe_16_16.csv"), 51u);
  const auto u = ks::read_field_csv(dir.path() / "o" / "u_t0.csv");
  EXPECT_EQ(u.nx(), 32u);
  EXPECT_EQ(slurp(dir.path() / "o" / "u_t0.pgm").substr(0, 2), "P2");
  EXPECT_NE(r.out.find("outcome="), std::string::npos);
}

TEST(Simulate, DeterministicArtifacts) {
  scratch_dir dir;
  ASSERT_EQ(run_cli(with_out(small_sim, dir / "a")).code, cli::exit_ok);
  ASSERT_EQ(run_cli(with_out(small_sim, dir / "b")).code, cli::exit_ok);
  auto other_seed = small_sim;
  other_seed.insert(other_seed.begin(), {"--seed", "43"});
  ASSERT_EQ(run_cli(with_out(other_seed, dir / "c")).code, cli::exit_ok);
  std::size_t compared = 0;
  for (const auto& name : listing(dir.path() / "a")) {
    const auto ext = fs::path(name).extension();
    if (ext != ".csv" && ext != ".pgm") continue;
    EXPECT_EQ(slurp(dir.path() / "a" / name), slurp(dir.path() / "b" / name)) << name;
    ++compared;
  }
  EXPECT_GE(compared, 14u);
  EXPECT_NE(slurp(dir.path() / "a" / "u_t0.csv"), slurp(dir.path() / "c" / "u_t0.csv"));
}

TEST(Simulate, ManifestListsExactlyTheFilesOnDisk) {
  scratch_dir dir;
  ASSERT_EQ(run_cli(with_out(small_sim, dir / "o")).code, cli::exit_ok);
  const auto root = dir.path() / "o";
  const auto m = nlohmann::json::parse(slurp(root / "manifest.json"));
  std::set<std::string> listed;
  for (const auto& f : m["files"]) {
    const std::string name = f["path"];
    listed.insert(name);
    EXPECT_EQ(f["sha256"], cli::sha256_file(root / name)) << name;
    EXPECT_EQ(f["bytes"].get<std::uintmax_t>(), fs::file_size(root / name)) << name;
  }
  listed.insert("manifest.json");
  EXPECT_EQ(listed, listing(root));
  EXPECT_EQ(m["config"]["seed"], 42);
  EXPECT_EQ(m["config"]["params"]["gamma"], 0.25);
  EXPECT_EQ(m["config"]["grid"]["nx"], 32);
  EXPECT_TRUE(m.contains("version"));
  EXPECT_TRUE(m.contains("started"));
  EXPECT_TRUE(m.contains("finished"));
  EXPECT_NE(m["command"].get<std::string>().find("simulate"), std::string::npos);
}

TEST(Simulate, ManifestConfigReproducesFields) {
  scratch_dir dir;
  ASSERT_EQ(run_cli(with_out(small_sim, dir / "o")).code, cli::exit_ok);
  const auto m = nlohmann::json::parse(slurp(dir.path() / "o" / "manifest.json"));
  ks::sim_config c;
  c.grid = {m["config"]["grid"]["nx"], m["config"]["grid"]["ny"], m["config"]["grid"]["h"]};
  c.params.gamma = m["config"]["params"]["gamma"];
  c.dt = m["config"]["dt"];
  c.t_end = m["config"]["t_end"];
  c.seed = m["config"]["seed"];
  c.noise_amplitude = m["config"]["noise_amplitude"];
  const auto run = ks::run(c);
  std::ostringstream csv;
  ks::write_field_csv(csv, run.final_state.u);
  EXPECT_EQ(csv.str(), slurp(dir.path() / "o" / "u_t0.5.csv"));
}

TEST(Simulate, ConfigFileAndFlagPrecedence) {
  scratch_dir dir;
  std::ofstream(dir / "run.cfg") << "# base run\ngamma = 0.1\nt_end = 0.2\ngrid = 32\nseed = 9\n";
  const auto r = run_cli({"--config", dir / "run.cfg", "--out", dir / "o", "simulate",
                          "--gamma", "0.25"});
  ASSERT_EQ(r.code, cli::exit_ok) << r.err;
  const auto m = nlohmann::json::parse(slurp(dir.path() / "o" / "manifest.json"));
  EXPECT_EQ(m["config"]["params"]["gamma"], 0.25);
  EXPECT_EQ(m["config"]["t_end"], 0.2);
  EXPECT_EQ(m["config"]["seed"], 9);
  EXPECT_EQ(m["config"]["grid"]["nx"], 32);
}

TEST(Simulate, ConfigErrorsNameLineAndKey) {
  scratch_dir dir;
  std::ofstream(dir / "bad.cfg") << "gamma = 0.25\n\nsmoothness = 3\n";
  auto r = run_cli({"--config", dir / "bad.cfg", "--out", dir / "o", "simulate"});
  EXPECT_EQ(r.code, cli::exit_usage_error);
  EXPECT_NE(r.err.find("bad.cfg:3"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("'smoothness'"), std::string::npos) << r.err;
  std::ofstream(dir / "bad2.cfg") << "gamma = zero\n";
  r = run_cli({"--config", dir / "bad2.cfg", "--out", dir / "o", "simulate"});
  EXPECT_EQ(r.code, cli::exit_usage_error);
  EXPECT_NE(r.err.find("bad2.cfg:1"), std::string::npos) << r.err;
}

TEST(Simulate, OutputDirectoryFromEnvironment) {
  scratch_dir dir;
  ::setenv("KSPATTERN_OUT", (dir / "env").c_str(), 1);
  const auto r = run_cli({"--grid", "32", "simulate", "--gamma", "0.25", "--t-end", "0.05"});
  ::unsetenv("KSPATTERN_OUT");
  ASSERT_EQ(r.code, cli::exit_ok) << r.err;
  EXPECT_TRUE(fs::exists(dir.path() / "env" / "manifest.json"));
}

TEST(Sweep, OneRowPerGamma) {
  scratch_dir dir;
  const auto r = run_cli(with_out({"--grid", "32", "sweep", "--gammas", "0.25", "--t-end", "0.1"},
                                  dir / "o"));
  ASSERT_EQ(r.code, cli::exit_ok) << r.err;
  EXPECT_EQ(data_lines(dir.path() / "o" / "sweep.csv"), 1u);
  const auto r2 = run_cli(with_out(
      {"--grid", "32", "sweep", "--gammas", "0.1,0.25,0.3", "--t-end", "0.1"}, dir / "p"));
  ASSERT_EQ(r2.code, cli::exit_ok) << r2.err;
  EXPECT_EQ(data_lines(dir.path() / "p" / "sweep.csv"), 3u);
  EXPECT_EQ(run_cli(with_out({"--grid", "32", "sweep"}, dir / "q")).code, cli::exit_usage_error);
}

TEST(Reconstruct, FifteenFramesGiveFourteenFields) {
  scratch_dir dir;
  write_frames(dir.path() / "frames", 15);
  const auto r = run_cli({"--grid", "40", "--out", dir / "o", "reconstruct", dir / "frames",
                          "--frame-interval", "0.2"});
  EXPECT_EQ(r.code, cli::exit_ok) << r.out << r.err;
  std::size_t fields = 0;
  for (const auto& name : listing(dir.path() / "o")) {
    if (name.rfind("v_pair", 0) == 0 && fs::path(name).extension() == ".csv") ++fields;
  }
  EXPECT_EQ(fields, 14u);
  EXPECT_EQ(data_lines(dir.path() / "o" / "summary.csv"), 14u);
  EXPECT_TRUE(fs::exists(dir.path() / "o" / "manifest.json"));
}

TEST(Reconstruct, TwoExplicitFramesGiveOneField) {
  scratch_dir dir;
  write_frames(dir.path() / "frames", 2);
  const auto r = run_cli({"--grid", "40", "--out", dir / "o", "reconstruct",
                          dir / "frames/frame00.pgm", dir / "frames/frame01.pgm",
                          "--frame-interval", "0.2"});
  EXPECT_EQ(r.code, cli::exit_ok) << r.out << r.err;
  EXPECT_TRUE(fs::exists(dir.path() / "o" / "v_pair00.csv"));
  EXPECT_EQ(data_lines(dir.path() / "o" / "summary.csv"), 1u);
}

TEST(Reconstruct, CorruptFrameSkipsItsPairsOnly) {
  scratch_dir dir;
  write_frames(dir.path() / "frames", 6);
  std::ofstream(dir.path() / "frames" / "frame03.pgm") << "not an image";
  const auto r = run_cli({"--grid", "40", "--out", dir / "o", "reconstruct", dir / "frames",
                          "--frame-interval", "0.2"});
  EXPECT_EQ(r.code, cli::exit_runtime_fault);
  EXPECT_NE(r.err.find("frame03.pgm"), std::string::npos);
  const auto files = listing(dir.path() / "o");
  for (const char* ok : {"v_pair00.csv", "v_pair01.csv", "v_pair04.csv"}) {
    EXPECT_TRUE(files.count(ok)) << ok;
  }
  EXPECT_FALSE(files.count("v_pair02.csv"));
  EXPECT_FALSE(files.count("v_pair03.csv"));
  const std::string summary = slurp(dir.path() / "o" / "summary.csv");
  EXPECT_NE(summary.find("2,0.40000000000000002,frame02.pgm,frame03.pgm,skipped"),
            std::string::npos)
      << summary;
}

TEST(Reconstruct, TooFewFramesIsUsageError) {
  scratch_dir dir;
  write_frames(dir.path() / "frames", 2);
  EXPECT_EQ(run_cli({"--out", dir / "o", "reconstruct", dir / "frames/frame00.pgm"}).code,
            cli::exit_usage_error);
  fs::create_directories(dir.path() / "empty");
  EXPECT_EQ(run_cli({"--out", dir / "o", "reconstruct", dir / "empty"}).code,
            cli::exit_usage_error);
}

TEST(Reduced, StationaryTableAtStrongCoupling) {
  scratch_dir dir;
  const auto r = run_cli({"--out", dir / "o", "reduced", "stationary", "--b", "25"});
  ASSERT_EQ(r.code, cli::exit_ok) << r.err;
  EXPECT_EQ(data_lines(dir.path() / "o" / "stationary.csv"), 9u);
  for (const char* label : {"U1*", "U5*", "U9*"}) {
    EXPECT_NE(r.out.find(label), std::string::npos) << label;
  }
}

TEST(Reduced, ScanCsv) {
  scratch_dir dir;
  const auto r = run_cli({"--out", dir / "o", "reduced", "scan", "--b-from", "10", "--b-to",
                          "25", "--steps", "31"});
  ASSERT_EQ(r.code, cli::exit_ok) << r.err;
  EXPECT_EQ(data_lines(dir.path() / "o" / "scan.csv"), 31u);
  const std::string csv = slurp(dir.path() / "o" / "scan.csv");
  EXPECT_NE(csv.find("\n10,3,2,"), std::string::npos);
  EXPECT_NE(csv.find("\n25,9,4,"), std::string::npos);
}

TEST(Reduced, OrbitsWriteThreeTrajectories) {
  scratch_dir dir;
  const auto r = run_cli({"--out", dir / "o", "reduced", "orbits", "--b", "25"});
  ASSERT_EQ(r.code, cli::exit_ok) << r.err;
  for (const char* name : {"orbit_symmetric-minus.csv", "orbit_symmetric-plus.csv",
                           "orbit_asymmetric.csv", "orbits.csv"}) {
    EXPECT_TRUE(fs::exists(dir.path() / "o" / name)) << name;
  }
  EXPECT_NE(r.out.find("asymmetric -> U8*"), std::string::npos) << r.out;
}

TEST(Selftest, PassesOnTheShippedKernels) {
  const auto r = run_cli({"selftest"});
  EXPECT_EQ(r.code, cli::exit_ok) << r.out;
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos) << r.out;
}

TEST(Selftest, InjectedStencilSignBugIsNamed) {
  cli::selftest_hooks hooks;
  hooks.laplacian = [](const ks::scalar_field& f) {
    auto lap = ks::laplacian(f);
    lap(0, 0) = -lap(0, 0);
    return lap;
  };
  const auto r = run_cli({"selftest"}, hooks);
  EXPECT_EQ(r.code, cli::exit_runtime_fault);
  EXPECT_NE(r.out.find("FAIL laplacian-oracle-equivalence"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("PASS gmres-dense-oracle"), std::string::npos) << r.out;
}

TEST(Manifest, Sha256KnownAnswer) {
  scratch_dir dir;
  std::ofstream(dir / "abc", std::ios::binary) << "abc";
  EXPECT_EQ(cli::sha256_file(dir / "abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
