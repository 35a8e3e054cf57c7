#include "dpl/config.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>

#include "dpl/output.hpp"

namespace dpl {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

double to_double(const std::string& key, const std::string& value) {
  const char* begin = value.c_str();
  char* end = nullptr;
  const double x = std::strtod(begin, &end);
  if (value.empty() || end != begin + value.size() || !std::isfinite(x)) {
    throw ConfigError("invalid number for " + key + ": '" + value + "'");
  }
  return x;
}

long long to_integer(const std::string& key, const std::string& value) {
  const char* begin = value.c_str();
  char* end = nullptr;
  const long long x = std::strtoll(begin, &end, 10);
  if (value.empty() || end != begin + value.size()) {
    throw ConfigError("invalid integer for " + key + ": '" + value + "'");
  }
  return x;
}

int to_int(const std::string& key, const std::string& value) {
  const long long x = to_integer(key, value);
  if (x < -1000000000LL || x > 1000000000LL) {
    throw ConfigError("integer out of range for " + key + ": '" + value + "'");
  }
  return static_cast<int>(x);
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true") return true;
  if (value == "false") return false;
  throw ConfigError("expected true or false for " + key + ": '" + value + "'");
}

std::string one_of(const std::string& key, const std::string& value,
                   std::initializer_list<const char*> allowed) {
  std::string list;
  for (const char* a : allowed) {
    if (value == a) return value;
    list += list.empty() ? a : std::string(", ") + a;
  }
  throw ConfigError("unknown value for " + key + ": '" + value +
                    "' (expected one of " + list + ")");
}

void set_key(ExperimentConfig& c, const std::string& section,
             const std::string& key, const std::string& value) {
  const std::string name = section.empty() ? key : section + "." + key;
  auto num = [&] { return to_double(name, value); };
  auto integer = [&] { return to_int(name, value); };

  if (section.empty()) {
    if (key == "preset") {
      c.preset = value;
      return;
    }
    if (key == "seed") {
      const long long s = to_integer(name, value);
      if (s < 0) throw ConfigError("seed must be non-negative");
      c.seed = static_cast<std::uint64_t>(s);
      return;
    }
  } else if (section == "graph") {
    if (key == "kind") {
      c.graph.kind = one_of(name, value, {"stefan", "double-obstacle",
                                          "power-law", "cubic", "identity"});
      return;
    }
    if (key == "k_solid") return void(c.graph.k_solid = num());
    if (key == "k_liquid") return void(c.graph.k_liquid = num());
    if (key == "latent") return void(c.graph.latent = num());
    if (key == "exponent") return void(c.graph.exponent = num());
  } else if (section == "pi") {
    if (key == "kind") {
      c.pi.kind = one_of(name, value, {"zero", "neg-identity", "stefan"});
      return;
    }
    if (key == "latent") return void(c.pi.latent = num());
  } else if (section == "grid") {
    if (key == "nx") return void(c.nx = integer());
    if (key == "ny") return void(c.ny = integer());
    if (key == "period") return void(c.period = num());
    if (key == "height") return void(c.height = num());
  } else if (section == "time") {
    if (key == "dt") return void(c.solver.dt = num());
    if (key == "horizon") return void(c.solver.horizon = num());
    if (key == "newton_tol") return void(c.solver.newton_tol = num());
    if (key == "newton_max") return void(c.solver.newton_max = integer());
    if (key == "keep_every") return void(c.solver.keep_every = integer());
  } else if (section == "regularization") {
    if (key == "epsilon") return void(c.solver.epsilon = num());
    if (key == "lambda") return void(c.solver.lambda = num());
    if (key == "monitor") {
      return void(c.solver.monitor_estimates = to_bool(name, value));
    }
  } else if (section == "initial") {
    if (key == "profile") {
      c.initial.kind =
          one_of(name, value, {"constant", "x-mode", "y-ramp", "two-phase",
                               "layered", "xy-mode", "csv"});
      return;
    }
    if (key == "mean") return void(c.initial.mean = num());
    if (key == "amplitude") return void(c.initial.amplitude = num());
    if (key == "perturbation") return void(c.initial.perturbation = num());
    if (key == "wavenumber") return void(c.initial.wavenumber = integer());
    if (key == "width") return void(c.initial.width = num());
    if (key == "path") return void(c.initial.path = value);
  } else if (section == "source") {
    if (key == "profile") {
      c.source.kind = one_of(name, value, {"zero", "x-mode", "xy-mode"});
      return;
    }
    if (key == "amplitude") return void(c.source.amplitude = num());
    if (key == "wavenumber") return void(c.source.wavenumber = integer());
    if (key == "time_dependent") {
      return void(c.source.time_dependent = to_bool(name, value));
    }
  } else if (section == "output") {
    if (key == "directory") return void(c.output_dir = value);
    if (key == "snapshot_every") return void(c.snapshot_every = integer());
  } else if (section == "cascade") {
    if (key == "members") return void(c.cascade = parse_members(value));
  } else {
    throw ConfigError("unknown section [" + section + "]");
  }
  throw ConfigError("unknown key '" + name + "'");
}

std::function<double(double, double)> profile_function(const ProfileSpec& p,
                                                        double X, double Y) {
  const double two_pi = 2.0 * std::numbers::pi;
  const double k = p.wavenumber;
  if (p.kind == "constant") {
    return [m = p.mean](double, double) { return m; };
  }
  if (p.kind == "x-mode") {
    return [=](double x, double) {
      return p.mean + p.amplitude * std::cos(two_pi * k * x / X);
    };
  }
  if (p.kind == "y-ramp") {
    return [=](double, double y) {
      return p.mean + p.amplitude * (2.0 * y / Y - 1.0);
    };
  }
  if (p.kind == "two-phase") {
    return [=](double x, double y) {
      return p.mean + p.amplitude * std::tanh((y - 0.5 * Y) / p.width) +
             p.perturbation * std::cos(two_pi * k * x / X);
    };
  }
  if (p.kind == "layered") {
    const double c = layered_rate(Y);
    const double scale = 1.0 / std::sin(0.5 * c * Y);
    return [=](double x, double y) {
      return p.mean + p.amplitude * scale * std::sin(c * (y - 0.5 * Y)) +
             p.perturbation * std::cos(two_pi * k * x / X);
    };
  }
  if (p.kind == "xy-mode") {
    return [=](double x, double y) {
      return p.mean + p.amplitude * std::cos(two_pi * k * x / X) *
                          std::cos(std::numbers::pi * y / Y);
    };
  }
  return {};
}

std::function<double(double, double)> source_function(const SourceSpec& s,
                                                       double X, double Y) {
  const double two_pi = 2.0 * std::numbers::pi;
  const double k = s.wavenumber;
  if (s.kind == "x-mode") {
    return [=](double x, double) {
      return s.amplitude * std::cos(two_pi * k * x / X);
    };
  }
  if (s.kind == "xy-mode") {
    return [=](double x, double y) {
      return s.amplitude * std::cos(two_pi * k * x / X) *
             std::cos(std::numbers::pi * y / Y);
    };
  }
  return [](double, double) { return 0.0; };
}

struct PresetEntry {
  const char* name;
  const char* description;
  ExperimentConfig (*make)();
};

ExperimentConfig base_preset(const char* name) {
  ExperimentConfig c;
  c.preset = name;
  c.output_dir = std::string("dpl-") + name;
  c.solver.dt = 1e-3;
  c.solver.horizon = 0.1;
  return c;
}

std::vector<CascadeMember> joint_sweep() {
  return {{0.2, 0.04, 4e-3, 16, 9},
          {0.1, 0.01, 2e-3, 32, 17},
          {0.05, 0.0025, 1e-3, 64, 33}};
}

ExperimentConfig stefan_preset() {
  ExperimentConfig c = base_preset("stefan");
  c.graph = {"stefan", 1.0, 1.0, 1.0, 2.0};
  c.pi = {"stefan", 1.0};
  c.solver.epsilon = 0.1;
  c.solver.lambda = 0.01;
  c.initial = {"layered", 0.5, 1.2, 0.015, 1, 0.1, ""};
  c.cascade = joint_sweep();
  return c;
}

ExperimentConfig hele_shaw_preset() {
  ExperimentConfig c = base_preset("hele-shaw");
  c.graph = {"double-obstacle", 1.0, 1.0, 1.0, 2.0};
  c.pi = {"neg-identity", 1.0};
  c.solver.epsilon = 0.1;
  c.solver.lambda = 1e-3;
  c.initial = {"layered", 0.5, 0.4, 0.015, 1, 0.1, ""};
  c.cascade = {{0.1, 1e-2, 1e-3, 32, 17},
               {0.1, 1e-3, 1e-3, 32, 17},
               {0.1, 1e-4, 1e-3, 32, 17}};
  return c;
}

ExperimentConfig power_preset(const char* name, double m) {
  ExperimentConfig c = base_preset(name);
  c.graph = {"power-law", 1.0, 1.0, 1.0, m};
  c.pi = {"zero", 1.0};
  c.solver.epsilon = 0.05;
  c.solver.lambda = 0.01;
  c.initial = {"layered", 1.0, 0.5, 0.015, 1, 0.1, ""};
  c.cascade = joint_sweep();
  return c;
}

ExperimentConfig heat_preset() {
  ExperimentConfig c = base_preset("heat");
  c.graph = {"identity", 1.0, 1.0, 1.0, 2.0};
  c.pi = {"zero", 1.0};
  c.solver.epsilon = 0.0;
  c.solver.lambda = 0.0;
  c.initial = {"xy-mode", 1.0, 0.5, 0.0, 1, 0.1, ""};
  c.cascade = {{0.0, 0.0, 4e-3, 16, 9},
               {0.0, 0.0, 2e-3, 32, 17},
               {0.0, 0.0, 1e-3, 64, 33}};
  return c;
}

const std::vector<PresetEntry>& preset_table() {
  static const std::vector<PresetEntry> table = {
      {"stefan", "two-phase Stefan problem, k_s = k_l = L = 1",
       stefan_preset},
      {"hele-shaw", "Hele-Shaw: double obstacle with pi(r) = -r",
       hele_shaw_preset},
      {"porous-medium", "porous medium, beta(r) = |r| r (m = 2)",
       [] { return power_preset("porous-medium", 2.0); }},
      {"fast-diffusion", "fast diffusion, beta(r) = |r|^(-1/2) r (m = 0.5)",
       [] { return power_preset("fast-diffusion", 0.5); }},
      {"heat", "linear heat equation, eps = lambda = 0", heat_preset},
  };
  return table;
}

std::string format_int(long long x) { return std::to_string(x); }

}  // namespace

MonotoneGraph GraphSpec::build() const {
  if (kind == "stefan") return MonotoneGraph::stefan(k_solid, k_liquid, latent);
  if (kind == "double-obstacle") return MonotoneGraph::double_obstacle();
  if (kind == "power-law") return MonotoneGraph::power_law(exponent);
  if (kind == "cubic") return MonotoneGraph::cubic();
  if (kind == "identity") return MonotoneGraph::identity();
  throw ConfigError("unknown graph kind '" + kind + "'");
}

PiFunction PiSpec::build() const {
  if (kind == "zero") return PiFunction::zero();
  if (kind == "neg-identity") return PiFunction::neg_identity();
  if (kind == "stefan") return PiFunction::stefan(latent);
  throw ConfigError("unknown pi kind '" + kind + "'");
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& e : preset_table()) n.emplace_back(e.name);
    return n;
  }();
  return names;
}

ExperimentConfig preset(std::string_view name) {
  for (const auto& e : preset_table()) {
    if (name == e.name) return e.make();
  }
  throw ConfigError("unknown preset '" + std::string(name) + "'");
}

std::string preset_description(std::string_view name) {
  for (const auto& e : preset_table()) {
    if (name == e.name) return e.description;
  }
  throw ConfigError("unknown preset '" + std::string(name) + "'");
}

double layered_rate(double height) {
  // cos(cY/2) - c sin(cY/2) falls from 1 to -pi/Y on (0, pi/Y).
  auto g = [height](double c) {
    return std::cos(0.5 * c * height) - c * std::sin(0.5 * c * height);
  };
  double lo = 0.0;
  double hi = std::numbers::pi / height;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::pair<int, int> parse_grid(std::string_view text) {
  const std::string s = trim(text);
  const auto x = s.find('x');
  if (x == std::string::npos) {
    throw ConfigError("grid must look like NXxNY, got '" + s + "'");
  }
  return {to_int("grid", s.substr(0, x)), to_int("grid", s.substr(x + 1))};
}

std::vector<CascadeMember> parse_members(std::string_view text) {
  std::vector<CascadeMember> members;
  std::string rest(text);
  std::stringstream ss(rest);
  std::string item;
  while (std::getline(ss, item, ';')) {
    item = trim(item);
    if (item.empty()) continue;
    std::vector<std::string> parts;
    std::stringstream is(item);
    std::string part;
    while (std::getline(is, part, ',')) parts.push_back(trim(part));
    if (parts.size() != 4) {
      throw ConfigError("cascade member must be 'eps,lambda,dt,NXxNY', got '" +
                        item + "'");
    }
    CascadeMember m;
    m.epsilon = to_double("cascade.members", parts[0]);
    m.lambda = to_double("cascade.members", parts[1]);
    m.dt = to_double("cascade.members", parts[2]);
    std::tie(m.nx, m.ny) = parse_grid(parts[3]);
    members.push_back(m);
  }
  return members;
}

std::string format_members(const std::vector<CascadeMember>& members) {
  std::string out;
  for (const auto& m : members) {
    if (!out.empty()) out += "; ";
    out += format_double(m.epsilon) + "," + format_double(m.lambda) + "," +
           format_double(m.dt) + "," + format_int(m.nx) + "x" +
           format_int(m.ny);
  }
  return out;
}

void apply_override(ExperimentConfig& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("override must be 'section.key=value', got '" +
                      std::string(assignment) + "'");
  }
  const std::string lhs = trim(assignment.substr(0, eq));
  const std::string value = trim(assignment.substr(eq + 1));
  const auto dot = lhs.find('.');
  if (dot == std::string::npos) {
    if (lhs == "preset") {
      config = preset(value);
      return;
    }
    set_key(config, "", lhs, value);
  } else {
    set_key(config, lhs.substr(0, dot), lhs.substr(dot + 1), value);
  }
}

ExperimentConfig parse_config(std::string_view text) {
  struct Entry {
    std::string section, key, value;
    int line;
  };
  std::vector<Entry> entries;
  std::map<std::string, int> seen;
  std::string section;
  std::optional<Entry> preset_entry;

  std::stringstream ss{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(ss, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos
                                   ? std::string_view(raw)
                                   : std::string_view(raw).substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']' || s.size() < 3) {
        throw ConfigError("malformed section header '" + s + "'", line);
      }
      section = trim(std::string_view(s).substr(1, s.size() - 2));
      static const char* known[] = {"graph",          "pi",      "grid",
                                    "time",           "regularization",
                                    "initial",        "source",  "output",
                                    "cascade"};
      bool ok = false;
      for (const char* k : known) ok = ok || section == k;
      if (!ok) throw ConfigError("unknown section [" + section + "]", line);
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("expected 'key = value', got '" + s + "'", line);
    }
    Entry e{section, trim(std::string_view(s).substr(0, eq)),
            trim(std::string_view(s).substr(eq + 1)), line};
    if (e.key.empty()) throw ConfigError("missing key before '='", line);
    const std::string full = section.empty() ? e.key : section + "." + e.key;
    if (auto [it, fresh] = seen.emplace(full, line); !fresh) {
      throw ConfigError("duplicate key '" + full + "' (first set on line " +
                            std::to_string(it->second) + ")",
                        line);
    }
    if (section.empty() && e.key == "preset") {
      preset_entry = e;
    } else {
      entries.push_back(std::move(e));
    }
  }

  ExperimentConfig config;
  if (preset_entry) {
    try {
      config = preset(preset_entry->value);
    } catch (const ConfigError& err) {
      throw ConfigError(err.what(), preset_entry->line);
    }
  } else {
    config.preset.clear();
  }
  for (const Entry& e : entries) {
    try {
      set_key(config, e.section, e.key, e.value);
    } catch (const ConfigError& err) {
      throw ConfigError(err.what(), e.line);
    }
  }
  validate(config);
  return config;
}

BulkSurfaceField initial_field(const ExperimentConfig& config,
                               const StripGrid& grid) {
  if (config.initial.kind == "csv") {
    BulkSurfaceField u0 =
        load_field_csv(config.initial.path, config.period, config.height);
    if (!(u0.grid() == grid)) {
      throw ConfigError("initial datum " + config.initial.path + " is " +
                        std::to_string(u0.grid().nx) + "x" +
                        std::to_string(u0.grid().ny) + ", expected " +
                        std::to_string(grid.nx) + "x" +
                        std::to_string(grid.ny));
    }
    return u0;
  }
  return BulkSurfaceField::from_function(
      grid, profile_function(config.initial, config.period, config.height));
}

Problem make_problem(const ExperimentConfig& config) {
  Problem p;
  p.graph = config.graph.build();
  p.pi = config.pi.build();
  p.period = config.period;
  p.height = config.height;
  p.base = config.solver;
  if (config.initial.kind == "csv") {
    p.initial_field = initial_field(config, config.grid());
  } else {
    p.initial = profile_function(config.initial, config.period, config.height);
  }
  p.source = source_function(config.source, config.period, config.height);
  return p;
}

std::vector<std::string> validate(const ExperimentConfig& config) {
  std::vector<std::string> warnings;
  try {
    const MonotoneGraph graph = config.graph.build();
    const PiFunction pi = config.pi.build();
    const StripGrid grid = config.grid();
    if (config.initial.kind == "two-phase" && !(config.initial.width > 0.0)) {
      throw ConfigError("initial.width must be positive");
    }
    if (config.initial.kind == "csv" && config.initial.path.empty()) {
      throw ConfigError("initial.path is required for the csv profile");
    }
    if (config.source.time_dependent) {
      throw ConfigError(
          "time-dependent sources are not implemented; g must be static");
    }
    if (config.snapshot_every < 0) {
      throw ConfigError("output.snapshot_every must be non-negative");
    }
    if (config.output_dir.empty()) {
      throw ConfigError("output.directory must not be empty");
    }

    auto check_on = [&](const SolverConfig& solver, const StripGrid& g,
                        const std::string& where) {
      for (auto& w : validate_config(solver, graph, pi)) {
        warnings.push_back(where + w);
      }
      const BulkSurfaceField u0 = initial_field(config, g);
      check_initial_data(g, graph, u0);
      source_field(g, source_function(config.source, config.period,
                                      config.height),
                   &warnings);
    };
    check_on(config.solver, grid, "");

    for (std::size_t k = 0; k < config.cascade.size(); ++k) {
      const CascadeMember& m = config.cascade[k];
      SolverConfig s = config.solver;
      s.epsilon = m.epsilon;
      s.lambda = m.lambda;
      s.dt = m.dt;
      const std::string where = "cascade member " + std::to_string(k) + ": ";
      try {
        const StripGrid g =
            StripGrid::make(m.nx, m.ny, config.period, config.height);
        if (config.initial.kind == "csv" && !(g == grid)) {
          throw ConfigError("imported initial datum does not match its grid");
        }
        check_on(s, g, where);
      } catch (const ConfigError& e) {
        throw ConfigError(where + e.what());
      } catch (const std::invalid_argument& e) {
        throw ConfigError(where + e.what());
      }
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return warnings;
}

std::string serialize(const ExperimentConfig& c) {
  std::ostringstream os;
  auto d = [](double x) { return format_double(x); };
  auto b = [](bool x) { return x ? "true" : "false"; };
  if (!c.preset.empty()) os << "preset = " << c.preset << "\n";
  os << "seed = " << c.seed << "\n";
  os << "\n[graph]\nkind = " << c.graph.kind
     << "\nk_solid = " << d(c.graph.k_solid)
     << "\nk_liquid = " << d(c.graph.k_liquid)
     << "\nlatent = " << d(c.graph.latent)
     << "\nexponent = " << d(c.graph.exponent) << "\n";
  os << "\n[pi]\nkind = " << c.pi.kind << "\nlatent = " << d(c.pi.latent)
     << "\n";
  os << "\n[grid]\nnx = " << c.nx << "\nny = " << c.ny
     << "\nperiod = " << d(c.period) << "\nheight = " << d(c.height) << "\n";
  os << "\n[time]\ndt = " << d(c.solver.dt)
     << "\nhorizon = " << d(c.solver.horizon)
     << "\nnewton_tol = " << d(c.solver.newton_tol)
     << "\nnewton_max = " << c.solver.newton_max
     << "\nkeep_every = " << c.solver.keep_every << "\n";
  os << "\n[regularization]\nepsilon = " << d(c.solver.epsilon)
     << "\nlambda = " << d(c.solver.lambda)
     << "\nmonitor = " << b(c.solver.monitor_estimates) << "\n";
  os << "\n[initial]\nprofile = " << c.initial.kind
     << "\nmean = " << d(c.initial.mean)
     << "\namplitude = " << d(c.initial.amplitude)
     << "\nperturbation = " << d(c.initial.perturbation)
     << "\nwavenumber = " << c.initial.wavenumber
     << "\nwidth = " << d(c.initial.width)
     << "\npath = " << c.initial.path << "\n";
  os << "\n[source]\nprofile = " << c.source.kind
     << "\namplitude = " << d(c.source.amplitude)
     << "\nwavenumber = " << c.source.wavenumber
     << "\ntime_dependent = " << b(c.source.time_dependent) << "\n";
  os << "\n[output]\ndirectory = " << c.output_dir
     << "\nsnapshot_every = " << c.snapshot_every << "\n";
  os << "\n[cascade]\nmembers = " << format_members(c.cascade) << "\n";
  return os.str();
}

}  // namespace dpl
