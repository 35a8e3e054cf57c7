#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dpl/diagnostics.hpp"

namespace dpl {

/// Rejected configuration text. line() is 0 for semantic errors.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& what, int line = 0)
      : std::invalid_argument(line > 0 ? "line " + std::to_string(line) +
                                             ": " + what
                                       : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Named analytic profiles on the strip (x periodic over X, y in [0, Y]):
//   constant   mean
//   x-mode     mean + amplitude cos(2 pi k x/X)
//   y-ramp     mean + amplitude (2y/Y - 1)
//   two-phase  mean + amplitude tanh((y - Y/2)/width) + perturbation cos(2 pi k x/X)
//   layered    mean + amplitude S(y) + perturbation cos(2 pi k x/X)
//   xy-mode    mean + amplitude cos(2 pi k x/X) cos(pi y/Y)
//   csv        field file (see output.hpp)
// S is the odd eigenmode of the bulk-surface Laplacian in y, scaled to
// S(0) = -1, S(Y) = 1; its trace is compatible with the dynamic boundary
// condition, so the flow starts without a boundary layer.
struct ProfileSpec {
  std::string kind = "constant";
  double mean = 0.0;
  double amplitude = 0.0;
  double perturbation = 0.0;
  int wavenumber = 1;
  double width = 0.1;
  std::string path;

  bool operator==(const ProfileSpec&) const = default;
};

/// Source g: zero, x-mode or xy-mode (mean is always zero).
struct SourceSpec {
  std::string kind = "zero";
  double amplitude = 0.0;
  int wavenumber = 1;
  bool time_dependent = false;

  bool operator==(const SourceSpec&) const = default;
};

/// Graph selection by name: stefan, double-obstacle, power-law, cubic,
/// identity. Parameters not used by the kind are carried along unchanged.
struct GraphSpec {
  std::string kind = "identity";
  double k_solid = 1.0;
  double k_liquid = 1.0;
  double latent = 1.0;
  double exponent = 2.0;

  MonotoneGraph build() const;
  bool operator==(const GraphSpec&) const = default;
};

/// zero, neg-identity or stefan.
struct PiSpec {
  std::string kind = "zero";
  double latent = 1.0;

  PiFunction build() const;
  bool operator==(const PiSpec&) const = default;
};

struct ExperimentConfig {
  std::string preset;  // informational; empty for hand-written configs
  std::uint64_t seed = 0;

  GraphSpec graph;
  PiSpec pi;
  int nx = 32;
  int ny = 17;
  double period = 1.0;
  double height = 1.0;
  SolverConfig solver;

  ProfileSpec initial;
  SourceSpec source;

  std::string output_dir = "dpl-out";
  int snapshot_every = 0;  // 0: initial and final state only

  std::vector<CascadeMember> cascade;

  StripGrid grid() const { return StripGrid::make(nx, ny, period, height); }
  bool operator==(const ExperimentConfig&) const = default;
};

const std::vector<std::string>& preset_names();
/// Throws ConfigError for unknown names.
ExperimentConfig preset(std::string_view name);
/// One-line description for `dpl presets`.
std::string preset_description(std::string_view name);

/// Parses INI-style text. A top-level `preset = name` seeds the defaults;
/// every other key overrides them. Validates eagerly (see validate()).
ExperimentConfig parse_config(std::string_view text);

/// Applies one `section.key=value` (or `key=value` at top level) override.
void apply_override(ExperimentConfig& config, std::string_view assignment);

/// Checks the paper-level preconditions: parameter ranges, lambda = 0
/// admissibility, eps <= eps0, (A3) on the discretized initial datum and
/// the source. Throws ConfigError; returns soft warnings.
std::vector<std::string> validate(const ExperimentConfig& config);

/// Canonical text; parse_config(serialize(c)) == c.
std::string serialize(const ExperimentConfig& config);

/// "32x17" -> {32, 17}.
std::pair<int, int> parse_grid(std::string_view text);
/// "eps,lambda,dt,NXxNY; ..." (the [cascade] members syntax).
std::vector<CascadeMember> parse_members(std::string_view text);
std::string format_members(const std::vector<CascadeMember>& members);

/// Rate c of S(y) = sin(c (y - Y/2)): root of cot(c Y/2) = c in (0, pi/Y).
double layered_rate(double height);

BulkSurfaceField initial_field(const ExperimentConfig& config,
                               const StripGrid& grid);
Problem make_problem(const ExperimentConfig& config);

}  // namespace dpl
