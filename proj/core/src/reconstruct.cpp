#include "kspattern/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "kspattern/errors.hpp"
#include "kspattern/image_io.hpp"

namespace kspattern {

frame_sequence::frame_sequence(std::vector<frame> frames) {
  for (auto& f : frames) push_back(std::move(f));
}

void frame_sequence::push_back(frame f) {
  if (!frames_.empty()) {
    require_same_grid(frames_.front().field, f.field);
    if (!(f.time > frames_.back().time)) {
      throw invalid_argument("frame times must increase strictly");
    }
  }
  if (f.field.size() == 0 || f.field.min() < 0.0 || f.field.max() > 1.0) {
    throw invalid_argument("frame values must lie in [0, 1]");
  }
  frames_.push_back(std::move(f));
}

scalar_field build_rhs(const scalar_field& u_t, const scalar_field& u_next,
                       const model_params& p, double time_step) {
  require_same_grid(u_t, u_next);
  if (p.b == 0.0) throw invalid_argument("chemotactic strength b must be nonzero");
  if (!(time_step > 0.0)) throw invalid_argument("time step must be positive");
  const scalar_field lap_u = laplacian(u_t);
  scalar_field out(u_t.spec());
  const double inv_b = 1.0 / p.b;
  const double inv_dt = 1.0 / time_step;
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = inv_b * ((u_next[k] - u_t[k]) * inv_dt - reaction(u_t[k], p) -
                      p.d_u * lap_u[k]);
  }
  return out;
}

scalar_field floor_field(const scalar_field& u, double u_min) {
  scalar_field out = u;
  for (double& x : out.values()) x = std::max(x, u_min);
  return out;
}

linear_operator elliptic_operator(const scalar_field& u, double u_min) {
  if (!(u_min > 0.0)) throw invalid_argument("u_min must be positive");
  if (u.size() == 0) throw dimension_error("empty density field");
  const double lowest = u.min();
  if (lowest < u_min) {
    throw ellipticity_fault("density " + std::to_string(lowest) +
                            " below the ellipticity floor " +
                            std::to_string(u_min));
  }
  const grid_spec spec = u.spec();
  auto [ux, uy] = gradient(u);
  // Coefficient fields are captured by value; the operator owns them.
  return linear_operator(
      spec.size(),
      [spec, uc = u, ux = std::move(ux), uy = std::move(uy)](
          std::span<const double> x, std::span<double> y) {
        const std::size_t nx = spec.nx, ny = spec.ny;
        const double inv_h2 = 1.0 / (spec.h * spec.h);
        const double inv_2h = 0.5 / spec.h;
        for (std::size_t i = 0; i < ny; ++i) {
          const std::size_t up = i == 0 ? 0 : i - 1;
          const std::size_t dn = i + 1 == ny ? i : i + 1;
          const std::size_t gup = i == 0 ? 1 : i - 1;
          const std::size_t gdn = i + 1 == ny ? ny - 2 : i + 1;
          for (std::size_t j = 0; j < nx; ++j) {
            const std::size_t lf = j == 0 ? 0 : j - 1;
            const std::size_t rt = j + 1 == nx ? j : j + 1;
            const std::size_t glf = j == 0 ? 1 : j - 1;
            const std::size_t grt = j + 1 == nx ? nx - 2 : j + 1;
            const std::size_t k = i * nx + j;
            const double lap = (x[up * nx + j] + x[dn * nx + j] +
                                x[i * nx + lf] + x[i * nx + rt] - 4.0 * x[k]) *
                               inv_h2;
            const double gx = (x[i * nx + grt] - x[i * nx + glf]) * inv_2h;
            const double gy = (x[gdn * nx + j] - x[gup * nx + j]) * inv_2h;
            y[k] = -(ux[k] * gx + uy[k] * gy) - uc[k] * lap;
          }
        }
      });
}

namespace {

void remove_mean(std::span<double> x) {
  const double m =
      std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  for (double& v : x) v -= m;
}

}  // namespace

reconstruction reconstruct_v(const scalar_field& u_t,
                             const scalar_field& u_next, const model_params& p,
                             const reconstruct_options& opts) {
  require_same_grid(u_t, u_next);
  const scalar_field rhs = build_rhs(u_t, u_next, p, opts.time_step);
  const linear_operator raw = elliptic_operator(floor_field(u_t, opts.u_min),
                                                opts.u_min);
  const std::size_t n = raw.size();

  // P A P with P the projection onto mean-zero vectors; nonsingular on that
  // subspace whenever constants are the only null vectors of A.
  const linear_operator projected(
      n, [&raw, tmp = std::vector<double>(n)](std::span<const double> x,
                                               std::span<double> y) mutable {
        std::copy(x.begin(), x.end(), tmp.begin());
        remove_mean(tmp);
        raw.apply(tmp, y);
        remove_mean(y);
      });

  reconstruction out;
  std::vector<double> b(rhs.values().begin(), rhs.values().end());
  out.discarded_mean = rhs.mean();
  for (double& x : b) x -= out.discarded_mean;

  const std::vector<double> x0(n, 0.0);
  const std::size_t max_iter = std::min(opts.max_iter, n);
  gmres_result res = gmres_solve(projected, b, x0, opts.eps, max_iter);
  remove_mean(res.x);
  out.v = scalar_field(u_t.spec(), std::move(res.x));
  out.residual = res.residual_history.back();
  out.iterations = res.iterations;
  out.converged = res.converged;
  out.residual_history = std::move(res.residual_history);
  return out;
}

std::vector<pair_result> process_sequence(const frame_sequence& seq,
                                          const model_params& p,
                                          const reconstruct_options& opts) {
  if (seq.size() < 2) {
    throw invalid_argument("reconstruction needs at least two frames");
  }
  std::vector<pair_result> out;
  const auto& frames = seq.frames();
  for (std::size_t k = 0; k + 1 < frames.size(); ++k) {
    pair_result pr;
    pr.time = frames[k].time;
    try {
      pr.result = reconstruct_v(frames[k].field, frames[k + 1].field, p, opts);
    } catch (const error& ex) {
      pr.error = ex.what();
    }
    out.push_back(std::move(pr));
  }
  return out;
}

scalar_field image_to_field(const gray_image& img, const grid_spec& target,
                            double u_min) {
  target.validate();
  if (img.width == 0 || img.height == 0 ||
      img.pixels.size() != img.width * img.height) {
    throw ingestion_fault("empty or malformed image");
  }
  // Separable area-weighted box filter: source pixel p covers [p, p + 1),
  // target cell q covers [q, q + 1) * (source / target).
  auto weights = [](std::size_t src, std::size_t dst) {
    std::vector<std::vector<std::pair<std::size_t, double>>> w(dst);
    const double ratio = static_cast<double>(src) / static_cast<double>(dst);
    for (std::size_t q = 0; q < dst; ++q) {
      const double lo = static_cast<double>(q) * ratio;
      const double hi = static_cast<double>(q + 1) * ratio;
      const auto first = static_cast<std::size_t>(std::floor(lo));
      const auto last = std::min(src, static_cast<std::size_t>(std::ceil(hi)));
      for (std::size_t s = first; s < last; ++s) {
        const double overlap = std::min(hi, static_cast<double>(s + 1)) -
                               std::max(lo, static_cast<double>(s));
        if (overlap > 0.0) w[q].emplace_back(s, overlap / ratio);
      }
    }
    return w;
  };
  const auto wx = weights(img.width, target.nx);
  const auto wy = weights(img.height, target.ny);

  std::vector<double> rows(img.height * target.nx, 0.0);
  for (std::size_t r = 0; r < img.height; ++r) {
    for (std::size_t j = 0; j < target.nx; ++j) {
      double acc = 0.0;
      for (const auto& [s, w] : wx[j]) acc += w * img.at(r, s);
      rows[r * target.nx + j] = acc;
    }
  }
  scalar_field f(target);
  for (std::size_t i = 0; i < target.ny; ++i) {
    for (std::size_t j = 0; j < target.nx; ++j) {
      double acc = 0.0;
      for (const auto& [s, w] : wy[i]) acc += w * rows[s * target.nx + j];
      f(i, j) = acc;
    }
  }
  const double lo = f.min(), hi = f.max();
  if (!(hi - lo > 1e-12)) {
    throw ingestion_fault("image has no contrast after resampling");
  }
  for (double& x : f.values()) {
    x = std::max((x - lo) / (hi - lo), u_min);
  }
  return f;
}

scalar_field ingest_image(const std::filesystem::path& path,
                          const grid_spec& target, double u_min) {
  return image_to_field(read_image(path), target, u_min);
}

}  // namespace kspattern
