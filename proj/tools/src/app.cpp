#include "kspattern/cli/app.hpp"

#include <algorithm>
#include <cstdlib>
#include <ostream>

#include "CLI11.hpp"
#include "kspattern/cli/commands.hpp"
#include "kspattern/cli/config.hpp"
#include "kspattern/cli/formats.hpp"
#include "kspattern/errors.hpp"

namespace kspattern::cli {

namespace {

constexpr const char* footer = R"(Configuration:
  --config FILE reads flat "key = value" lines, where a key is any long
  option name of the selected command or of the top level without the
  leading dashes ('_' may stand for '-'). '#' starts a comment. Flags given
  on the command line take precedence over the file.

Output:
  Artifacts and manifest.json go to --out, which defaults to the
  KSPATTERN_OUT environment variable, else ./kspattern-out.

Exit status:
  0 success, 1 runtime fault (including failed pairs or checks),
  2 usage, configuration or validation error.)";

void add_model_options(CLI::App* app, model_params& p, bool with_gamma) {
  app->add_option("--a", p.a, "Reaction rate a")->capture_default_str();
  app->add_option("--b", p.b, "Chemotactic strength b")->capture_default_str();
  app->add_option("--c", p.c, "Attractant production rate c")->capture_default_str();
  app->add_option("--e", p.e, "Attractant decay rate e")->capture_default_str();
  app->add_option("--d-u", p.d_u, "Cell diffusivity d_u")->capture_default_str();
  app->add_option("--d-v", p.d_v, "Attractant diffusivity d_v")->capture_default_str();
  if (with_gamma) {
    app->add_option("--gamma", p.gamma, "Allee threshold gamma in (0, 1)")
        ->capture_default_str();
  }
}

struct sim_flags {
  double t_end = 180.0;
  std::string snapshots;
  std::string probes;
  std::size_t probe_stride = 10;
  std::size_t mean_stride = 10;
  double noise = 0.2;
  bool clip = true;
  bool enforce = false;
  double budget_factor = 1e-6;
};

void add_sim_options(CLI::App* app, sim_flags& f) {
  app->add_option("--t-end", f.t_end, "Final time")->capture_default_str();
  app->add_option("--snapshots", f.snapshots,
                  "Comma-separated snapshot times (default: 0 and t-end)");
  app->add_option("--probes", f.probes,
                  "Comma-separated i:j probe points (default: grid center)");
  app->add_option("--probe-stride", f.probe_stride, "Steps between probe samples")
      ->capture_default_str();
  app->add_option("--mean-stride", f.mean_stride, "Steps between mean samples")
      ->capture_default_str();
  app->add_option("--noise", f.noise, "Amplitude of the initial noise")->capture_default_str();
  app->add_option("--positivity-clip", f.clip, "Clamp negative values after each step")
      ->capture_default_str();
  app->add_flag("--enforce-positivity", f.enforce,
                "Abort when the clamped mass exceeds the budget");
  app->add_option("--budget-factor", f.budget_factor,
                  "Clamped-mass budget per grid point")
      ->capture_default_str();
}

struct shared_flags {
  std::uint64_t seed = 42;
  double eps = 0.1;
  double dt = 1e-3;
  std::string grid = "100";
  std::string config;
  std::string out;
};

sim_config make_sim_config(const shared_flags& s, const sim_flags& f,
                           const model_params& p) {
  sim_config c;
  c.grid = parse_grid(s.grid);
  c.params = p;
  c.dt = s.dt;
  c.t_end = f.t_end;
  c.seed = s.seed;
  c.snapshot_times = f.snapshots.empty() ? std::vector<double>{0.0, f.t_end}
                                         : parse_reals(f.snapshots);
  c.probes = f.probes.empty() ? std::vector<probe>{{c.grid.ny / 2, c.grid.nx / 2}}
                              : parse_probes(f.probes);
  c.probe_stride = f.probe_stride;
  c.mean_stride = f.mean_stride;
  c.noise_amplitude = f.noise;
  c.positivity_clip = f.clip;
  c.enforce_positivity_budget = f.enforce;
  c.positivity_budget_factor = f.budget_factor;
  return c;
}

/// Fills options not given on the command line from the config file,
/// searching the selected command chain from the innermost command out.
void apply_config(const std::filesystem::path& file,
                  const std::vector<CLI::App*>& chain) {
  for (const auto& entry : read_config(file)) {
    if (entry.key == "config") {
      throw config_error(file, entry.line, entry.key, "config files do not nest");
    }
    CLI::Option* opt = nullptr;
    for (auto it = chain.rbegin(); it != chain.rend() && !opt; ++it) {
      opt = (*it)->get_option_no_throw("--" + entry.key);
    }
    if (!opt) throw config_error(file, entry.line, entry.key, "unknown key");
    if (opt->count() != 0) continue;
    try {
      opt->add_result(entry.value);
      opt->run_callback();
    } catch (const CLI::ParseError& ex) {
      throw config_error(file, entry.line, entry.key,
                         "invalid value '" + entry.value + "' (" + ex.what() + ")");
    }
  }
}

std::string default_out() {
  const char* env = std::getenv("KSPATTERN_OUT");
  return env && *env ? env : "kspattern-out";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err, const selftest_hooks& hooks) {
  CLI::App app{"Keller-Segel pattern toolkit: simulation, attractant reconstruction "
               "and reduced two-node analysis.",
               "kspattern"};
  app.require_subcommand(1);
  app.footer(footer);

  shared_flags shared;
  shared.out = default_out();
  app.add_option("--seed", shared.seed, "Random seed")->capture_default_str();
  app.add_option("--eps", shared.eps, "GMRES residual tolerance")->capture_default_str();
  app.add_option("--dt", shared.dt, "Time step")->capture_default_str();
  app.add_option("--grid", shared.grid, "Grid size N or NxM")->capture_default_str();
  app.add_option("--config", shared.config, "key = value configuration file");
  app.add_option("--out", shared.out, "Output directory")->capture_default_str();

  model_params sim_params, sweep_params, rec_params, red_params;
  sim_flags sim_f, sweep_f;

  auto* simulate = app.add_subcommand("simulate", "Run one simulation and write its artifacts");
  add_model_options(simulate, sim_params, true);
  add_sim_options(simulate, sim_f);

  auto* sweep = app.add_subcommand("sweep", "Run one simulation per gamma; write sweep.csv");
  std::string gammas;
  sweep->add_option("--gammas", gammas, "Comma-separated gamma values");
  add_model_options(sweep, sweep_params, false);
  add_sim_options(sweep, sweep_f);

  auto* reconstruct = app.add_subcommand(
      "reconstruct", "Recover the attractant field from consecutive density frames");
  std::vector<std::string> inputs;
  reconstruct->add_option("inputs", inputs, "Frame files (PNG/PGM) or one directory");
  add_model_options(reconstruct, rec_params, true);
  reconstruct_options rec_opts;
  reconstruct->add_option("--u-min", rec_opts.u_min, "Density floor")->capture_default_str();
  reconstruct->add_option("--max-iter", rec_opts.max_iter, "GMRES iteration cap")
      ->capture_default_str();
  reconstruct->add_option("--frame-interval", rec_opts.time_step,
                          "Model time between consecutive frames")
      ->capture_default_str();

  auto* reduced = app.add_subcommand("reduced", "Two-node reduced model");
  reduced->require_subcommand(1);
  add_model_options(reduced, red_params, true);
  auto* stationary = reduced->add_subcommand("stationary", "Rest states and their stability");
  auto* scan = reduced->add_subcommand("scan", "Count rest states over a range of b");
  double b_from = 10.0, b_to = 25.0;
  std::size_t scan_steps = 31;
  scan->add_option("--b-from", b_from, "First b")->capture_default_str();
  scan->add_option("--b-to", b_to, "Last b")->capture_default_str();
  scan->add_option("--steps", scan_steps, "Number of b values")->capture_default_str();
  auto* orbits = reduced->add_subcommand("orbits", "Trajectories leaving the middle rest state");
  orbit_options orbit_opts;
  orbits->add_option("--t-end", orbit_opts.t_end, "Final time")->capture_default_str();
  orbits->add_option("--magnitude", orbit_opts.magnitude, "Seed perturbation size")
      ->capture_default_str();
  orbits->add_option("--stride", orbit_opts.stride, "Steps between stored samples")
      ->capture_default_str();
  orbits->add_option("--endpoint-tol", orbit_opts.endpoint_tol,
                     "Distance that counts as reaching a rest state")
      ->capture_default_str();

  auto* selftest = app.add_subcommand("selftest", "Check the kernels against dense oracles");

  for (auto* sub : {simulate, sweep, reconstruct, reduced, stationary, scan, orbits, selftest}) {
    sub->fallthrough();
    sub->footer(footer);
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& ex) {
    return app.exit(ex, out, err) == 0 ? exit_ok : exit_usage_error;
  }

  std::string command_line = "kspattern";
  for (const auto& a : args) command_line += " " + a;

  try {
    std::vector<CLI::App*> chain{&app};
    for (CLI::App* cur = &app; !cur->get_subcommands().empty();) {
      cur = cur->get_subcommands().front();
      chain.push_back(cur);
    }
    if (!shared.config.empty()) apply_config(shared.config, chain);
    const run_context ctx{command_line, shared.out, out, err};

    if (simulate->parsed()) {
      if (simulate->get_option("--gamma")->count() == 0) {
        throw invalid_argument("simulate requires --gamma");
      }
      return cmd_simulate(make_sim_config(shared, sim_f, sim_params), ctx);
    }
    if (sweep->parsed()) {
      if (gammas.empty()) throw invalid_argument("sweep requires --gammas");
      return cmd_sweep(parse_reals(gammas), make_sim_config(shared, sweep_f, sweep_params), ctx);
    }
    if (reconstruct->parsed()) {
      reconstruct_settings s;
      s.inputs.assign(inputs.begin(), inputs.end());
      s.grid = parse_grid(shared.grid);
      s.params = rec_params;
      s.options = rec_opts;
      s.options.eps = shared.eps;
      return cmd_reconstruct(s, ctx);
    }
    if (stationary->parsed()) return cmd_reduced_stationary(red_params, ctx);
    if (scan->parsed()) return cmd_reduced_scan(red_params, b_from, b_to, scan_steps, ctx);
    if (orbits->parsed()) {
      orbit_opts.dt = shared.dt;
      return cmd_reduced_orbits(red_params, orbit_opts, ctx);
    }
    if (selftest->parsed()) return cmd_selftest(hooks, shared.seed, ctx);
    throw invalid_argument("no command given");
  } catch (const config_error& ex) {
    err << "config error: " << ex.what() << "\n";
    return exit_usage_error;
  } catch (const invalid_argument& ex) {
    err << "error: " << ex.what() << "\n";
    return exit_usage_error;
  } catch (const dimension_error& ex) {
    err << "error: " << ex.what() << "\n";
    return exit_usage_error;
  } catch (const instability_fault& ex) {
    err << "runtime fault at t = " << format_real(ex.time()) << ": " << ex.what() << "\n";
    return exit_runtime_fault;
  } catch (const positivity_fault& ex) {
    err << "runtime fault at t = " << format_real(ex.time()) << ": " << ex.what() << "\n";
    return exit_runtime_fault;
  } catch (const std::exception& ex) {
    err << "runtime fault: " << ex.what() << "\n";
    return exit_runtime_fault;
  }
}

}  // namespace kspattern::cli
