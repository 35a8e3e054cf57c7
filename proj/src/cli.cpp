#include "dpl/cli.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "dpl/checks.hpp"
#include "dpl/config.hpp"
#include "dpl/output.hpp"

namespace dpl {

namespace {

struct InputOptions {
  std::string config_path;
  std::string preset_name;
  std::string grid;
  std::string out_dir;
  std::vector<std::string> overrides;
  std::string dump_stiffness;
};

void add_input_options(CLI::App* cmd, InputOptions& o) {
  cmd->add_option("-c,--config", o.config_path, "INI configuration file");
  cmd->add_option("-p,--preset", o.preset_name, "built-in preset");
  cmd->add_option("-g,--grid", o.grid, "grid as NXxNY");
  cmd->add_option("-o,--out", o.out_dir, "output directory");
  cmd->add_option("-s,--set", o.overrides, "override, e.g. time.dt=5e-4")
      ->take_all();
}

ExperimentConfig load(const InputOptions& o, std::ostream& err) {
  ExperimentConfig config;
  if (!o.config_path.empty()) {
    if (!o.preset_name.empty()) {
      throw ConfigError("--config and --preset are exclusive; use "
                        "'preset = name' inside the file");
    }
    std::ifstream is(o.config_path);
    if (!is) throw ConfigError("cannot open config " + o.config_path);
    std::stringstream ss;
    ss << is.rdbuf();
    try {
      config = parse_config(ss.str());
    } catch (const ConfigError& e) {
      throw ConfigError(o.config_path + ": " + e.what());
    }
  } else if (!o.preset_name.empty()) {
    config = preset(o.preset_name);
  } else {
    throw ConfigError("one of --config or --preset is required");
  }
  for (const std::string& s : o.overrides) apply_override(config, s);
  if (!o.grid.empty()) std::tie(config.nx, config.ny) = parse_grid(o.grid);
  if (!o.out_dir.empty()) config.output_dir = o.out_dir;
  for (const std::string& w : validate(config)) err << "warning: " << w << '\n';
  return config;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

int do_run(const InputOptions& o, std::ostream& out, std::ostream& err) {
  ExperimentConfig config = load(o, err);
  const int steps = config.solver.step_count();
  config.solver.keep_every =
      config.snapshot_every > 0 ? config.snapshot_every : std::max(1, steps);

  const auto start = std::chrono::steady_clock::now();
  const Problem problem = make_problem(config);
  const CascadeMember member{config.solver.epsilon, config.solver.lambda,
                             config.solver.dt, config.nx, config.ny};
  const Trajectory traj = run_member(problem, member);
  const double wall = seconds_since(start);

  write_run_outputs(config.output_dir, config, traj, wall);
  if (!o.dump_stiffness.empty()) {
    std::ofstream os(o.dump_stiffness);
    if (!os) throw ConfigError("cannot write " + o.dump_stiffness);
    OperatorSet(config.grid()).write_stiffness_coo(os);
  }
  for (const std::string& w : traj.warnings) err << "warning: " << w << '\n';
  int worst = 0;
  for (int it : traj.newton_iterations) worst = std::max(worst, it);
  out << "run " << (config.preset.empty() ? "custom" : config.preset) << ": "
      << traj.step_count() << " steps on " << config.nx << "x" << config.ny
      << ", max Newton iterations " << worst << ", max mass drift "
      << traj.max_mass_drift << "\n"
      << "wrote " << config.output_dir << "/summary.json\n";
  return kExitOk;
}

int do_cascade(const InputOptions& o, int threads, std::ostream& out,
               std::ostream& err) {
  const ExperimentConfig config = load(o, err);
  if (config.cascade.empty()) {
    throw ConfigError("no cascade members; set [cascade] members");
  }
  const auto start = std::chrono::steady_clock::now();
  const CascadeReport report =
      cascade_study(make_problem(config), config.cascade,
                    threads > 0 ? threads : default_thread_count());
  write_cascade_outputs(config.output_dir, config, report,
                        seconds_since(start));
  for (std::size_t k = 0; k < report.members.size(); ++k) {
    for (const std::string& w : report.members[k].warnings) {
      err << "warning: member " << k << ": " << w << '\n';
    }
  }
  out << format_cascade_table(report) << "wrote " << config.output_dir
      << "/cascade.json\n";
  return kExitOk;
}

int do_check(std::uint64_t seed, const std::string& grid, std::ostream& out) {
  int nx = 8, ny = 5;
  if (!grid.empty()) std::tie(nx, ny) = parse_grid(grid);
  bool ok = true;
  for (const CheckResult& r : run_invariant_checks(seed, nx, ny)) {
    out << (r.passed ? "PASS " : "FAIL ") << r.name << " (" << r.detail
        << ")\n";
    ok = ok && r.passed;
  }
  return ok ? kExitOk : kExitInternal;
}

int do_presets(const std::string& show, std::ostream& out) {
  if (!show.empty()) {
    out << serialize(preset(show));
    return kExitOk;
  }
  for (const std::string& name : preset_names()) {
    out << name << "  " << preset_description(name) << '\n';
  }
  return kExitOk;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out,
             std::ostream& err) {
  CLI::App app{"Degenerate parabolic problems with dynamic boundary "
               "conditions via the viscous Cahn-Hilliard approximation",
               "dpl"};
  app.require_subcommand(1);

  InputOptions run_opts, cascade_opts;
  int threads = 0;
  std::uint64_t seed = 0;
  std::string check_grid, show;

  CLI::App* run_cmd = app.add_subcommand("run", "integrate one configuration");
  add_input_options(run_cmd, run_opts);
  run_cmd->add_option("--dump-stiffness", run_opts.dump_stiffness,
                      "write the stiffness matrix as 'row col value' lines");
  CLI::App* cascade_cmd =
      app.add_subcommand("cascade", "run the [cascade] schedule");
  add_input_options(cascade_cmd, cascade_opts);
  cascade_cmd->add_option("-j,--threads", threads,
                          "worker threads (default: DPL_THREADS)");
  CLI::App* check_cmd =
      app.add_subcommand("check", "invariant suite on a small grid");
  check_cmd->add_option("--seed", seed, "random seed");
  check_cmd->add_option("-g,--grid", check_grid, "grid as NXxNY (default 8x5)");
  CLI::App* presets_cmd = app.add_subcommand("presets", "list built-in presets");
  presets_cmd->add_option("--show", show, "print a preset as config text");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (run_cmd->parsed()) return do_run(run_opts, out, err);
    if (cascade_cmd->parsed()) return do_cascade(cascade_opts, threads, out, err);
    if (check_cmd->parsed()) return do_check(seed, check_grid, out);
    return do_presets(show, out);
  } catch (const std::invalid_argument& e) {
    // ConfigError, CompatibilityViolated, PreconditionViolated and other
    // rejected inputs.
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace dpl
