#include "kspattern/cli/commands.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>

#include "json.hpp"
#include "kspattern/cli/app.hpp"
#include "kspattern/cli/formats.hpp"
#include "kspattern/cli/manifest.hpp"
#include "kspattern/errors.hpp"
#include "kspattern/field_io.hpp"

namespace kspattern::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

json params_json(const model_params& p) {
  return {{"a", p.a}, {"b", p.b}, {"c", p.c}, {"e", p.e},
          {"d_u", p.d_u}, {"d_v", p.d_v}, {"gamma", p.gamma}};
}

json grid_json(const grid_spec& g) {
  return {{"nx", g.nx}, {"ny", g.ny}, {"h", g.h}};
}

json sim_json(const sim_config& c) {
  json probes = json::array();
  for (const auto& p : c.probes) probes.push_back({p.i, p.j});
  return {{"grid", grid_json(c.grid)},
          {"params", params_json(c.params)},
          {"dt", c.dt},
          {"t_end", c.t_end},
          {"seed", c.seed},
          {"snapshot_times", c.snapshot_times},
          {"probes", probes},
          {"probe_stride", c.probe_stride},
          {"mean_stride", c.mean_stride},
          {"noise_amplitude", c.noise_amplitude},
          {"positivity_clip", c.positivity_clip},
          {"positivity_budget_factor", c.positivity_budget_factor},
          {"enforce_positivity_budget", c.enforce_positivity_budget}};
}

void prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw error("cannot create output directory " + dir.string());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw error("cannot write " + path.string());
  os << text;
}

std::string stats_text(const pattern_stats& s) {
  return "mean=" + format_real(s.mean) + "\nstddev=" + format_real(s.stddev) +
         "\nhigh_fraction=" + format_real(s.high_fraction) +
         "\nboundary_share=" + format_real(s.boundary_share) + "\n";
}

std::string palette_text(const model_params& p) {
  return "# Gray levels of the emitted PGM rasters (0 = black, maxval = white)\n"
         "u: linear on [0, 1]; u = 1 is white, u = 0 is black\n"
         "v: linear on [0, " + format_real(p.c / p.e) + "] (the value c/e)\n"
         "Color renderings that show u near 1 as blue and u near 0 as black\n"
         "correspond to white and black here.\n";
}

}  // namespace

int cmd_simulate(const sim_config& input, const run_context& ctx) {
  sim_config config = input;
  auto& snaps = config.snapshot_times;
  std::sort(snaps.begin(), snaps.end());
  snaps.erase(std::unique(snaps.begin(), snaps.end()), snaps.end());
  config.validate();
  prepare_dir(ctx.out_dir);
  run_manifest manifest(ctx.command_line, sim_json(config).dump());

  const sim_run result = run(config);

  auto emit = [&](const std::string& name, auto&& writer) {
    writer(ctx.out_dir / name);
    manifest.add(name);
  };
  std::set<std::string> written;
  for (const auto& s : result.snapshots) {
    const std::string tag = time_tag(s.t);
    if (!written.insert(tag).second) continue;
    const double v_hi = config.params.c / config.params.e;
    emit("u_t" + tag + ".csv", [&](const fs::path& p) { write_field_csv(p, s.u); });
    emit("v_t" + tag + ".csv", [&](const fs::path& p) { write_field_csv(p, s.v); });
    emit("u_t" + tag + ".pgm", [&](const fs::path& p) { write_field_pgm(p, s.u, 0.0, 1.0); });
    emit("v_t" + tag + ".pgm", [&](const fs::path& p) { write_field_pgm(p, s.v, 0.0, v_hi); });
  }
  for (const auto& ps : result.probes) {
    emit("probe_" + std::to_string(ps.position.i) + "_" + std::to_string(ps.position.j) + ".csv",
         [&](const fs::path& p) { write_probe_csv(p, ps); });
  }
  emit("means.csv", [&](const fs::path& p) { write_means_csv(p, result.means); });
  const std::string label(to_string(result.outcome));
  const std::string summary =
      "outcome=" + label + "\n" + stats_text(result.stats) +
      "clipped_mass=" + format_real(result.clipped_mass) +
      "\npositivity_budget=" + format_real(config.positivity_budget()) +
      "\nwithin_positivity_budget=" + (result.within_positivity_budget ? "true" : "false") +
      "\nsteps=" + std::to_string(result.steps) + "\n";
  emit("outcome.txt", [&](const fs::path& p) { write_text(p, summary); });
  emit("palette.txt", [&](const fs::path& p) { write_text(p, palette_text(config.params)); });
  manifest.write(ctx.out_dir);

  ctx.out << summary;
  if (!result.within_positivity_budget) {
    ctx.err << "warning: clamped negative mass " << format_real(result.clipped_mass)
            << " exceeds the positivity budget " << format_real(config.positivity_budget())
            << "\n";
  }
  return exit_ok;
}

int cmd_sweep(const std::vector<double>& gammas, const sim_config& base,
              const run_context& ctx) {
  if (gammas.empty()) throw invalid_argument("no gamma values given");
  for (double g : gammas) {
    if (!(g > 0.0 && g < 1.0)) {
      throw invalid_argument("gamma " + format_real(g) + " outside (0, 1)");
    }
  }
  base.validate();
  prepare_dir(ctx.out_dir);
  json cfg = sim_json(base);
  cfg["gammas"] = gammas;
  run_manifest manifest(ctx.command_line, cfg.dump());

  const auto rows = sweep_gamma(gammas, base);
  std::vector<std::vector<std::string>> table;
  bool failed = false;
  for (const auto& r : rows) {
    failed = failed || !r.outcome;
    table.push_back({format_real(r.gamma),
                     r.outcome ? std::string(to_string(*r.outcome)) : "FAULT",
                     format_real(r.stats.mean), format_real(r.stats.stddev),
                     format_real(r.stats.high_fraction), format_real(r.stats.boundary_share),
                     format_real(r.clipped_mass),
                     r.within_positivity_budget ? "true" : "false",
                     '"' + r.error + '"'});
    ctx.out << "gamma=" << format_real(r.gamma) << " "
            << (r.outcome ? std::string(to_string(*r.outcome)) : "FAULT: " + r.error) << "\n";
  }
  write_csv(ctx.out_dir / "sweep.csv",
            {"gamma", "outcome", "mean", "stddev", "high_fraction", "boundary_share",
             "clipped_mass", "within_positivity_budget", "error"},
            table);
  manifest.add("sweep.csv");
  manifest.write(ctx.out_dir);
  return failed ? exit_runtime_fault : exit_ok;
}

std::vector<fs::path> collect_frames(const std::vector<fs::path>& inputs) {
  if (inputs.size() == 1 && fs::is_directory(inputs.front())) {
    std::vector<fs::path> frames;
    for (const auto& entry : fs::directory_iterator(inputs.front())) {
      if (!entry.is_regular_file()) continue;
      std::string ext = entry.path().extension().string();
      std::transform(ext.begin(), ext.end(), ext.begin(),
                     [](unsigned char ch) { return std::tolower(ch); });
      if (ext == ".png" || ext == ".pgm") frames.push_back(entry.path());
    }
    std::sort(frames.begin(), frames.end());
    return frames;
  }
  for (const auto& p : inputs) {
    if (fs::is_directory(p)) {
      throw invalid_argument("a directory must be the only input: " + p.string());
    }
  }
  return inputs;
}

int cmd_reconstruct(const reconstruct_settings& s, const run_context& ctx) {
  const auto frames = collect_frames(s.inputs);
  if (frames.size() < 2) {
    throw invalid_argument("reconstruction needs at least two frames, got " +
                           std::to_string(frames.size()));
  }
  s.grid.validate();
  s.params.validate();
  if (s.params.b == 0.0) throw invalid_argument("b must be nonzero");
  if (!(s.options.eps > 0.0)) throw invalid_argument("eps must be positive");
  if (!(s.options.time_step > 0.0)) throw invalid_argument("frame interval must be positive");
  prepare_dir(ctx.out_dir);

  json frame_list = json::array();
  for (const auto& f : frames) frame_list.push_back(f.generic_string());
  const json cfg = {{"frames", frame_list},
                    {"grid", grid_json(s.grid)},
                    {"params", params_json(s.params)},
                    {"eps", s.options.eps},
                    {"u_min", s.options.u_min},
                    {"max_iter", s.options.max_iter},
                    {"frame_interval", s.options.time_step}};
  run_manifest manifest(ctx.command_line, cfg.dump());

  std::vector<std::optional<scalar_field>> fields(frames.size());
  std::vector<std::string> ingest_errors(frames.size());
  for (std::size_t k = 0; k < frames.size(); ++k) {
    try {
      fields[k] = ingest_image(frames[k], s.grid, s.options.u_min);
    } catch (const error& ex) {
      ingest_errors[k] = ex.what();
      ctx.err << "frame " << frames[k].string() << ": " << ex.what() << "\n";
    }
  }

  std::vector<std::vector<std::string>> table;
  std::size_t failures = 0;
  char stem[32];
  for (std::size_t k = 0; k + 1 < frames.size(); ++k) {
    std::snprintf(stem, sizeof stem, "v_pair%02zu", k);
    const double t = static_cast<double>(k) * s.options.time_step;
    std::string status = "ok", message;
    std::optional<reconstruction> rec;
    if (!fields[k] || !fields[k + 1]) {
      status = "skipped";
      message = "unreadable frame " + frames[fields[k] ? k + 1 : k].filename().string();
    } else {
      try {
        rec = reconstruct_v(*fields[k], *fields[k + 1], s.params, s.options);
        if (!rec->converged) status = "not-converged";
      } catch (const error& ex) {
        status = "failed";
        message = ex.what();
      }
    }
    if (rec) {
      const std::string csv = std::string(stem) + ".csv", pgm = std::string(stem) + ".pgm";
      write_field_csv(ctx.out_dir / csv, rec->v);
      double lo = rec->v.min(), hi = rec->v.max();
      if (!(hi > lo)) hi = lo + 1.0;
      write_field_pgm(ctx.out_dir / pgm, rec->v, lo, hi);
      manifest.add(csv);
      manifest.add(pgm);
    }
    if (status != "ok") ++failures;
    std::replace(message.begin(), message.end(), '"', '\'');
    table.push_back({std::to_string(k), format_real(t), frames[k].filename().string(),
                     frames[k + 1].filename().string(), status,
                     rec ? std::to_string(rec->iterations) : "",
                     rec ? format_real(rec->residual) : "",
                     rec ? format_real(rec->discarded_mean) : "", '"' + message + '"'});
    ctx.out << stem << " " << status;
    if (rec) ctx.out << " iterations=" << rec->iterations << " residual=" << format_real(rec->residual);
    if (!message.empty()) ctx.out << " (" << message << ")";
    ctx.out << "\n";
  }
  write_csv(ctx.out_dir / "summary.csv",
            {"pair", "t", "frame_a", "frame_b", "status", "iterations", "residual",
             "discarded_mean", "error"},
            table);
  manifest.add("summary.csv");
  manifest.write(ctx.out_dir);
  return failures == 0 ? exit_ok : exit_runtime_fault;
}

namespace {

std::vector<std::string> state_cells(const reduced_state& s) {
  return {format_real(s.u1), format_real(s.v1), format_real(s.u2), format_real(s.v2)};
}

}  // namespace

int cmd_reduced_stationary(const model_params& p, const run_context& ctx) {
  p.validate();
  prepare_dir(ctx.out_dir);
  run_manifest manifest(ctx.command_line, json{{"params", params_json(p)}}.dump());
  const auto points = find_stationary(p);
  std::vector<std::vector<std::string>> table;
  char line[160];
  ctx.out << "label   u1          v1          u2          v2          stability\n";
  for (const auto& sp : points) {
    auto row = std::vector<std::string>{sp.label.empty() ? "-" : sp.label};
    for (auto& c : state_cells(sp.state)) row.push_back(c);
    row.push_back(std::string(to_string(sp.stability)));
    row.push_back(sp.mixed_signs ? "true" : "false");
    for (double re : sp.eigen_real_parts) row.push_back(format_real(re));
    row.push_back(format_real(sp.residual));
    table.push_back(std::move(row));
    // Display rounding only; the CSV keeps full precision.
    auto shown = [](double x) { return std::abs(x) < 5e-7 ? 0.0 : x; };
    std::snprintf(line, sizeof line, "%-7s %-11.6f %-11.6f %-11.6f %-11.6f %s\n",
                  sp.label.c_str(), shown(sp.state.u1), shown(sp.state.v1),
                  shown(sp.state.u2), shown(sp.state.v2),
                  std::string(to_string(sp.stability)).c_str());
    ctx.out << line;
  }
  write_csv(ctx.out_dir / "stationary.csv",
            {"label", "u1", "v1", "u2", "v2", "stability", "saddle", "re_lambda1",
             "re_lambda2", "re_lambda3", "re_lambda4", "residual"},
            table);
  manifest.add("stationary.csv");
  manifest.write(ctx.out_dir);
  return exit_ok;
}

int cmd_reduced_scan(const model_params& base, double b_from, double b_to,
                     std::size_t steps, const run_context& ctx) {
  if (steps < 2) throw invalid_argument("a scan needs at least two steps");
  if (!(b_to > b_from)) throw invalid_argument("b-to must exceed b-from");
  base.validate();
  prepare_dir(ctx.out_dir);
  run_manifest manifest(ctx.command_line,
                        json{{"params", params_json(base)}, {"b_from", b_from},
                             {"b_to", b_to}, {"steps", steps}}
                            .dump());
  std::vector<double> bs(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    bs[k] = b_from + (b_to - b_from) * static_cast<double>(k) / static_cast<double>(steps - 1);
  }
  const auto rows = bifurcation_scan(bs, base);
  std::vector<std::vector<std::string>> table;
  bool failed = false;
  for (const auto& r : rows) {
    failed = failed || !r.error.empty();
    table.push_back({format_real(r.b), std::to_string(r.count),
                     std::to_string(r.stable_count), '"' + r.error + '"'});
    ctx.out << "b=" << format_real(r.b) << " points=" << r.count
            << " stable=" << r.stable_count << "\n";
  }
  write_csv(ctx.out_dir / "scan.csv", {"b", "count", "stable_count", "error"}, table);
  manifest.add("scan.csv");
  manifest.write(ctx.out_dir);
  return failed ? exit_runtime_fault : exit_ok;
}

int cmd_reduced_orbits(const model_params& p, const orbit_options& opts,
                       const run_context& ctx) {
  p.validate();
  prepare_dir(ctx.out_dir);
  run_manifest manifest(ctx.command_line,
                        json{{"params", params_json(p)},
                             {"magnitude", opts.magnitude},
                             {"dt", opts.dt},
                             {"t_end", opts.t_end},
                             {"endpoint_tol", opts.endpoint_tol},
                             {"stride", opts.stride}}
                            .dump());
  const auto orbits = heteroclinic_orbits(p, opts);
  std::vector<std::vector<std::string>> summary;
  bool unresolved = false;
  for (const auto& o : orbits) {
    std::vector<std::vector<std::string>> rows;
    for (std::size_t k = 0; k < o.trajectory.t.size(); ++k) {
      auto row = std::vector<std::string>{format_real(o.trajectory.t[k])};
      for (auto& c : state_cells(o.trajectory.states[k])) row.push_back(c);
      rows.push_back(std::move(row));
    }
    const std::string name = "orbit_" + o.name + ".csv";
    write_csv(ctx.out_dir / name, {"t", "u1", "v1", "u2", "v2"}, rows);
    manifest.add(name);
    unresolved = unresolved || !o.endpoint;
    summary.push_back({o.name, o.endpoint.value_or(""), format_real(o.endpoint_distance)});
    ctx.out << o.name << " -> " << o.endpoint.value_or("unresolved")
            << " (distance " << format_real(o.endpoint_distance) << ")\n";
  }
  write_csv(ctx.out_dir / "orbits.csv", {"orbit", "endpoint", "distance"}, summary);
  manifest.add("orbits.csv");
  manifest.write(ctx.out_dir);
  return unresolved ? exit_runtime_fault : exit_ok;
}

int cmd_selftest(const selftest_hooks& hooks, std::uint64_t seed,
                 const run_context& ctx) {
  const auto results = run_selftest(hooks, seed);
  std::size_t failed = 0;
  for (const auto& r : results) {
    ctx.out << (r.passed ? "PASS " : "FAIL ") << r.name << "  " << r.detail << "\n";
    if (!r.passed) ++failed;
  }
  ctx.out << results.size() - failed << "/" << results.size() << " checks passed\n";
  return failed == 0 ? exit_ok : exit_runtime_fault;
}

}  // namespace kspattern::cli
