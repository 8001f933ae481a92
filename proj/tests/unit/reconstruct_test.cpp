#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "kspattern/errors.hpp"
#include "kspattern/image_io.hpp"
#include "kspattern/oracles.hpp"
#include "kspattern/reconstruct.hpp"
#include "kspattern/simulator.hpp"

namespace ks = kspattern;
namespace oracle = kspattern::oracle;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  auto d = fs::temp_directory_path() / ("ks_reconstruct_" + std::to_string(::getpid()));
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST(BuildRhs, ConstantFrames) {
  const ks::grid_spec g{6, 5, 1.0};
  const ks::model_params p;
  const auto k = ks::scalar_field::constant(g, 0.6);
  const auto r = ks::build_rhs(k, k, p);
  for (double x : r.values()) EXPECT_NEAR(x, -ks::reaction(0.6, p) / p.b, 1e-15);
  const auto one = ks::scalar_field::constant(g, 1.0);
  const auto zero = ks::build_rhs(one, one, p);
  for (double x : zero.values()) EXPECT_EQ(x, 0.0);
  EXPECT_THROW(ks::build_rhs(one, ks::scalar_field({5, 5, 1.0}), p), ks::dimension_error);
}

TEST(BuildRhs, SimulatedStepApproximatesChemotaxis) {
  ks::sim_config c;
  c.grid = {32, 32, 1.0};
  c.t_end = 1.0;
  c.noise_amplitude = 0.2;
  const auto s = ks::run(c).final_state;
  const double dt = 1e-4;
  const auto next = ks::rk4_step(s, c.params, dt, false);
  const auto r = ks::build_rhs(s.u, next.u, c.params, dt);
  const auto chem = ks::chemotaxis_term(s.u, s.v, c.params.b);
  double worst = 0.0, scale = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k) {
    worst = std::max(worst, std::abs(r[k] - chem[k] / c.params.b));
    scale = std::max(scale, std::abs(chem[k] / c.params.b));
  }
  EXPECT_LE(worst, 1e-2 * scale);
}

TEST(EllipticOperator, AnnihilatesConstants) {
  const ks::grid_spec g{9, 7, 1.0};
  const auto op = ks::elliptic_operator(oracle::random_field(g, 3, 0.1, 1.0));
  const auto y = op(std::vector<double>(g.size(), 4.2));
  for (double x : y) EXPECT_LE(std::abs(x), 1e-10);
}

TEST(EllipticOperator, UnitDensityIsMinusLaplacian) {
  const ks::grid_spec g{7, 7, 1.0};
  const auto op = ks::elliptic_operator(ks::scalar_field::constant(g, 1.0));
  std::vector<double> x(g.size());
  for (std::size_t i = 0; i < g.ny; ++i) {
    for (std::size_t j = 0; j < g.nx; ++j) x[g.index(i, j)] = static_cast<double>(i * i);
  }
  const auto y = op(x);
  for (std::size_t i = 1; i + 1 < g.ny; ++i) {
    for (std::size_t j = 1; j + 1 < g.nx; ++j) EXPECT_NEAR(y[g.index(i, j)], -2.0, 1e-12);
  }
}

TEST(EllipticOperator, MatchesDenseAssembly) {
  for (const ks::grid_spec& g : {ks::grid_spec{6, 6, 1.0}, ks::grid_spec{8, 8, 1.0},
                                 ks::grid_spec{5, 8, 0.5}, ks::grid_spec{3, 3, 1.0}}) {
    const auto u = oracle::random_field(g, 30 + g.nx, 0.05, 1.5);
    const auto x = oracle::random_field(g, 40 + g.ny);
    const auto y = ks::elliptic_operator(u)(x.values());
    const oracle::vector expect = oracle::elliptic_matrix(u) * oracle::to_vector(x);
    EXPECT_LE(oracle::max_abs_diff(y, std::vector<double>(expect.data(), expect.data() + expect.size())),
              1e-10);
  }
}

TEST(EllipticOperator, RequiresDensityAboveFloor) {
  const ks::grid_spec g{5, 5, 1.0};
  auto u = ks::scalar_field::constant(g, 0.5);
  u(2, 2) = 1e-4;
  EXPECT_THROW(ks::elliptic_operator(u), ks::ellipticity_fault);
  EXPECT_NO_THROW(ks::elliptic_operator(ks::floor_field(u, 1e-3)));
  EXPECT_EQ(ks::floor_field(u, 1e-3)(2, 2), 1e-3);
}

TEST(ReconstructV, RecoversManufacturedAttractant) {
  const ks::model_params p;
  const auto m = ks::oracle::manufactured(32, p);
  ks::reconstruct_options tight;
  tight.eps = 1e-6;
  const auto r = ks::reconstruct_v(m.u_t, m.u_next, p, tight);
  ASSERT_TRUE(r.converged);
  EXPECT_LE(r.residual, 1e-6);
  EXPECT_LE(oracle::centered_relative_error(r.v, m.v_star), 0.05);
  const auto loose = ks::reconstruct_v(m.u_t, m.u_next, p);
  EXPECT_TRUE(loose.converged);
  EXPECT_LE(loose.residual, 0.1);
  EXPECT_LE(oracle::centered_relative_error(loose.v, m.v_star), 0.15);
}

TEST(ReconstructV, ReturnsMeanZeroFieldAndReportsDiscardedMean) {
  const ks::model_params p;
  auto m = ks::oracle::manufactured(16, p);
  for (double& x : m.u_next.values()) x += 0.05;
  ks::reconstruct_options o;
  o.eps = 1e-8;
  const auto r = ks::reconstruct_v(m.u_t, m.u_next, p, o);
  EXPECT_LE(std::abs(r.v.mean()), 1e-12);
  EXPECT_NEAR(r.discarded_mean, 0.05 / p.b, 1e-12);
  EXPECT_LE(oracle::centered_relative_error(r.v, m.v_star), 1e-4);
}

TEST(ReconstructV, ConstantUnitFramesGiveZeroField) {
  const ks::grid_spec g{10, 10, 1.0};
  const auto one = ks::scalar_field::constant(g, 1.0);
  const auto r = ks::reconstruct_v(one, one, ks::model_params{});
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 0u);
  for (double x : r.v.values()) EXPECT_EQ(x, 0.0);
}

TEST(ReconstructV, FlagsNonConvergence) {
  const ks::model_params p;
  const auto m = ks::oracle::manufactured(16, p);
  ks::reconstruct_options o;
  o.eps = 1e-12;
  o.max_iter = 3;
  const auto r = ks::reconstruct_v(m.u_t, m.u_next, p, o);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, 3u);
  EXPECT_GT(r.residual, 1e-12);
}

TEST(ReconstructV, SimulatedFramesRoundTrip) {
  ks::sim_config c;
  c.grid = {40, 40, 1.0};
  c.t_end = 2.0 + 1e-3;
  c.snapshot_times = {2.0, 2.0 + 1e-3};
  const auto run = ks::run(c);
  const auto& a = run.snapshots[0];
  const auto& b = run.snapshots[1];
  ks::reconstruct_options o;
  o.eps = 1e-6;
  o.time_step = b.t - a.t;
  const auto r = ks::reconstruct_v(a.u, b.u, c.params, o);
  ASSERT_TRUE(r.converged);
  EXPECT_GE(oracle::pearson(r.v.data(), a.v.data()), 0.99);
  // Putting v back into the forward relation reproduces the frame change.
  const auto chem = ks::chemotaxis_term(a.u, r.v, c.params.b);
  const auto lap = ks::laplacian(a.u);
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < a.u.size(); ++k) {
    const double du = (b.u[k] - a.u[k]) / o.time_step;
    const double model = ks::reaction(a.u[k], c.params) + c.params.d_u * lap[k] + chem[k] +
                         c.params.b * r.discarded_mean;
    num += (du - model) * (du - model);
    den += du * du;
  }
  EXPECT_LE(std::sqrt(num / den), 0.1);
}

TEST(FrameSequence, Validation) {
  const ks::grid_spec g{5, 5, 1.0};
  ks::frame_sequence seq;
  seq.push_back({0.0, ks::scalar_field::constant(g, 0.5)});
  EXPECT_THROW(seq.push_back({0.0, ks::scalar_field::constant(g, 0.5)}), ks::invalid_argument);
  EXPECT_THROW(seq.push_back({1.0, ks::scalar_field::constant(g, 1.5)}), ks::invalid_argument);
  EXPECT_THROW(seq.push_back({1.0, ks::scalar_field::constant({6, 5, 1.0}, 0.5)}), ks::dimension_error);
  EXPECT_EQ(seq.size(), 1u);
}

TEST(ProcessSequence, OneFieldPerConsecutivePair) {
  const ks::grid_spec g{8, 8, 1.0};
  const ks::model_params p;
  EXPECT_THROW(ks::process_sequence(ks::frame_sequence{}, p), ks::invalid_argument);
  ks::frame_sequence seq;
  for (int k = 0; k < 15; ++k) {
    seq.push_back({2.0 * k, ks::scalar_field::constant(g, 1.0)});
    if (k == 1) {
      const auto two = ks::process_sequence(seq, p);
      ASSERT_EQ(two.size(), 1u);
      EXPECT_EQ(two[0].time, 0.0);
    }
  }
  const auto out = ks::process_sequence(seq, p);
  ASSERT_EQ(out.size(), 14u);
  for (std::size_t k = 0; k < out.size(); ++k) {
    EXPECT_DOUBLE_EQ(out[k].time, 2.0 * static_cast<double>(k));
    ASSERT_TRUE(out[k].result.has_value());
    for (double x : out[k].result->v.values()) EXPECT_EQ(x, 0.0);
  }
}

TEST(ProcessSequence, FlagsUnconvergedPairsAndContinues) {
  const ks::grid_spec g{8, 8, 1.0};
  const ks::model_params p;
  ks::frame_sequence seq;
  seq.push_back({0.0, ks::scalar_field::constant(g, 1.0)});
  auto noisy = oracle::random_field(g, 2, 0.2, 1.0);
  seq.push_back({1.0, noisy});
  seq.push_back({2.0, ks::scalar_field::constant(g, 1.0)});
  ks::reconstruct_options o;
  o.eps = 1e-14;
  o.max_iter = 2;
  const auto out = ks::process_sequence(seq, p, o);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_TRUE(out[0].result.has_value());
  EXPECT_TRUE(out[1].result.has_value());
  EXPECT_FALSE(out[1].result->converged);
}

TEST(Ingest, ConstantImageIsRejected) {
  const auto dir = temp_dir();
  ks::gray_image img{16, 16, std::vector<double>(256, 1.0)};
  ks::write_png(dir / "white.png", img);
  EXPECT_THROW(ks::ingest_image(dir / "white.png", {8, 8, 1.0}), ks::ingestion_fault);
  EXPECT_THROW(ks::ingest_image(dir / "missing.png", {8, 8, 1.0}), ks::ingestion_fault);
}

TEST(Ingest, HalfBlackHalfWhite) {
  const auto dir = temp_dir();
  ks::gray_image img{20, 10, std::vector<double>(200, 0.0)};
  for (std::size_t r = 0; r < 10; ++r) {
    for (std::size_t c = 10; c < 20; ++c) img.pixels[r * 20 + c] = 1.0;
  }
  ks::write_png(dir / "half.png", img);
  const auto f = ks::ingest_image(dir / "half.png", {10, 5, 1.0});
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 10; ++j) EXPECT_EQ(f(i, j), j < 5 ? 1e-3 : 1.0);
  }
}

TEST(Ingest, RampIsMonotoneWithUnitRange) {
  const auto dir = temp_dir();
  ks::gray_image img{64, 16, {}};
  for (std::size_t r = 0; r < 16; ++r) {
    for (std::size_t c = 0; c < 64; ++c) img.pixels.push_back(static_cast<double>(c) / 63.0);
  }
  ks::write_png(dir / "ramp.png", img);
  const auto f = ks::ingest_image(dir / "ramp.png", {20, 6, 1.0});
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_NEAR(f(i, 0), 1e-3, 1e-12);
    EXPECT_NEAR(f(i, 19), 1.0, 1e-12);
    for (std::size_t j = 1; j < 20; ++j) EXPECT_GE(f(i, j), f(i, j - 1));
  }
  // Rows are identical, so the ramp is strictly increasing along x.
  EXPECT_GT(f(0, 10), f(0, 9));
}

TEST(Ingest, BoxFilterAveragesAreas) {
  ks::gray_image img{6, 6, {}};
  for (int k = 0; k < 36; ++k) img.pixels.push_back(k % 6 < 2 ? 0.0 : 1.0);
  img.pixels[0] = 0.5;
  const auto f = ks::image_to_field(img, {3, 3, 1.0}, 1e-3);
  // Top-left block averages 0.125, the rest of the left column is black.
  EXPECT_NEAR(f(0, 0), 0.125, 1e-15);
  EXPECT_EQ(f(1, 0), 1e-3);
  EXPECT_EQ(f(0, 1), 1.0);
  EXPECT_EQ(f(2, 2), 1.0);
}
