#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kspattern/gmres.hpp"
#include "kspattern/grid.hpp"
#include "kspattern/image_io.hpp"
#include "kspattern/kinetics.hpp"

namespace kspattern {

/// Density frames at strictly increasing times on one grid.
struct frame {
  double time = 0.0;
  scalar_field field;
};

class frame_sequence {
 public:
  frame_sequence() = default;
  explicit frame_sequence(std::vector<frame> frames);

  /// Throws invalid_argument if the time is not after the last frame or the
  /// values leave [0, 1]; dimension_error on a grid mismatch.
  void push_back(frame f);

  const std::vector<frame>& frames() const noexcept { return frames_; }
  std::size_t size() const noexcept { return frames_.size(); }

 private:
  std::vector<frame> frames_;
};

inline constexpr double default_u_min = 1e-3;

/// (1/b) ((u_next - u_t) / time_step - f(u_t) - d_u lap u_t). The default
/// unit time step treats consecutive frames as one step of the forward
/// model.
scalar_field build_rhs(const scalar_field& u_t, const scalar_field& u_next,
                       const model_params& p, double time_step = 1.0);

/// Matrix-free x -> -grad u . grad x - u lap x with Neumann boundaries.
/// Throws ellipticity_fault if any u is below u_min.
linear_operator elliptic_operator(const scalar_field& u,
                                  double u_min = default_u_min);

/// max(u, u_min) pointwise.
scalar_field floor_field(const scalar_field& u, double u_min);

struct reconstruct_options {
  double eps = 0.1;
  double u_min = default_u_min;
  std::size_t max_iter = 1500;
  double time_step = 1.0;
};

struct reconstruction {
  /// Mean-zero chemoattractant field.
  scalar_field v;
  /// Final GMRES residual of the projected system.
  double residual = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  /// Grid mean removed from the right-hand side before solving.
  double discarded_mean = 0.0;
  std::vector<double> residual_history;
};

/// Solves the elliptic problem for v. Both the data and the unknown are
/// projected onto mean-zero fields, which fixes the additive constant and
/// makes the singular Neumann problem solvable; GMRES starts from zero.
reconstruction reconstruct_v(const scalar_field& u_t,
                             const scalar_field& u_next, const model_params& p,
                             const reconstruct_options& opts = {});

struct pair_result {
  double time = 0.0;
  std::optional<reconstruction> result;
  std::string error;
};

/// One reconstruction per consecutive frame pair, tagged with the earlier
/// time. A failing pair is recorded and the rest still run.
std::vector<pair_result> process_sequence(const frame_sequence& seq,
                                          const model_params& p,
                                          const reconstruct_options& opts = {});

/// Box-filters the raster onto `target`, min-max normalizes to [0, 1] and
/// floors at u_min. Throws ingestion_fault for unreadable or constant
/// images.
scalar_field ingest_image(const std::filesystem::path& path,
                          const grid_spec& target,
                          double u_min = default_u_min);

/// Resampling and normalization step of ingest_image on an in-memory image.
scalar_field image_to_field(const gray_image& img,
                            const grid_spec& target, double u_min);

}  // namespace kspattern
