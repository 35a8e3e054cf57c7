#include "dpl/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace dpl {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_field_csv(std::ostream& os, const BulkSurfaceField& field) {
  const StripGrid& g = field.grid();
  os << "nx,ny,hx,hy\n"
     << g.nx << ',' << g.ny << ',' << format_double(g.hx()) << ','
     << format_double(g.hy()) << '\n';
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (i) os << ',';
      os << format_double(field(i, j));
    }
    os << '\n';
  }
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

double cell_value(const std::string& cell, int line) {
  char* end = nullptr;
  const double x = std::strtod(cell.c_str(), &end);
  if (cell.empty() || *end != '\0' || !std::isfinite(x)) {
    throw std::invalid_argument("field csv line " + std::to_string(line) +
                                ": bad value '" + cell + "'");
  }
  return x;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  return os;
}

json record_json(const EstimateRecord& r) {
  json j;
  j["step"] = r.step;
  j["t"] = r.t;
  const auto names = EstimateRecord::field_names();
  const auto values = r.field_values();
  for (std::size_t k = 0; k < names.size(); ++k) {
    j[std::string(names[k])] = values[k];
  }
  return j;
}

json ratios_json(const std::vector<FieldRatio>& ratios) {
  json j = json::object();
  for (const auto& r : ratios) j[r.field] = r.ratio;
  return j;
}

json newton_json(const std::vector<int>& its, int refactorizations) {
  long total = 0;
  int worst = 0;
  for (int it : its) {
    total += it;
    worst = std::max(worst, it);
  }
  return {{"steps", its.size()},
          {"total_iterations", total},
          {"max_iterations", worst},
          {"mean_iterations",
           its.empty() ? 0.0 : static_cast<double>(total) / its.size()},
          {"refactorizations", refactorizations}};
}

}  // namespace

BulkSurfaceField read_field_csv(std::istream& is, double period,
                                double height) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("nx,ny,hx,hy", 0) != 0) {
    throw std::invalid_argument("field csv line 1: expected header nx,ny,hx,hy");
  }
  if (!std::getline(is, line)) {
    throw std::invalid_argument("field csv line 2: missing grid line");
  }
  const auto dims = split(line);
  if (dims.size() != 4) {
    throw std::invalid_argument("field csv line 2: expected nx,ny,hx,hy values");
  }
  const int nx = static_cast<int>(cell_value(dims[0], 2));
  const int ny = static_cast<int>(cell_value(dims[1], 2));
  const StripGrid grid = StripGrid::make(nx, ny, period, height);
  const double hx = cell_value(dims[2], 2);
  const double hy = cell_value(dims[3], 2);
  if (std::abs(hx - grid.hx()) > 1e-12 || std::abs(hy - grid.hy()) > 1e-12) {
    throw std::invalid_argument(
        "field csv line 2: spacings do not match a " + std::to_string(nx) +
        "x" + std::to_string(ny) + " grid on the configured strip");
  }
  BulkSurfaceField field(grid);
  for (int j = 0; j < ny; ++j) {
    const int lineno = j + 3;
    if (!std::getline(is, line)) {
      throw std::invalid_argument("field csv line " + std::to_string(lineno) +
                                  ": missing row");
    }
    const auto cells = split(line);
    if (static_cast<int>(cells.size()) != nx) {
      throw std::invalid_argument("field csv line " + std::to_string(lineno) +
                                  ": expected " + std::to_string(nx) +
                                  " values");
    }
    for (int i = 0; i < nx; ++i) {
      field.values()[grid.index(i, j)] = cell_value(cells[i], lineno);
    }
  }
  return field;
}

BulkSurfaceField load_field_csv(const fs::path& path, double period,
                                double height) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("cannot open " + path.string());
  return read_field_csv(is, period, height);
}

std::string estimates_header(bool member) {
  std::string h = member ? "member,step,t" : "step,t";
  for (auto name : EstimateRecord::field_names()) {
    h += ',';
    h += name;
  }
  return h + ",newton_iterations";
}

void write_estimates_rows(std::ostream& os,
                          const std::vector<EstimateRecord>& records,
                          const std::vector<int>& newton, int member) {
  for (const EstimateRecord& r : records) {
    if (member >= 0) os << member << ',';
    os << r.step << ',' << format_double(r.t);
    for (double x : r.field_values()) os << ',' << format_double(x);
    const int its = r.step > 0 && r.step <= static_cast<int>(newton.size())
                        ? newton[r.step - 1]
                        : 0;
    os << ',' << its << '\n';
  }
}

void write_run_outputs(const fs::path& dir, const ExperimentConfig& config,
                       const Trajectory& traj, double wall_time_s) {
  fs::create_directories(dir / "snapshots");
  {
    auto os = open_out(dir / "estimates.csv");
    os << estimates_header(false) << '\n';
    write_estimates_rows(os, traj.records, traj.newton_iterations);
  }
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "u_%06d.csv", traj.state_steps[k]);
    auto os = open_out(dir / "snapshots" / name);
    write_field_csv(os, traj.states[k].u);
  }

  const State& last = traj.final_state();
  const StripGrid& grid = last.u.grid();
  const OperatorSet ops(grid);
  json j;
  j["preset"] = config.preset;
  j["graph"] = traj.graph.name();
  j["pi"] = traj.pi.name();
  j["grid"] = {{"nx", grid.nx}, {"ny", grid.ny}};
  j["epsilon"] = traj.config.epsilon;
  j["epsilon0"] = epsilon0(traj.pi);
  j["lambda"] = traj.config.lambda;
  j["dt"] = traj.config.dt;
  j["horizon"] = traj.config.horizon;
  j["m0"] = traj.m0;
  j["final"] = {{"t", last.t},
                {"h0_norm_v", norm_h(grid, last.v)},
                {"v0star_norm_v", ops.norm_v0star(last.v)},
                {"h_norm_u", norm_h(grid, last.u)},
                {"h_norm_mu", norm_h(grid, last.mu)},
                {"mean_u", mean(grid, last.u)}};
  if (!traj.records.empty()) j["final"]["estimates"] = record_json(traj.records.back());
  j["newton"] = newton_json(traj.newton_iterations, traj.refactorizations);
  j["max_mass_drift"] = traj.max_mass_drift;
  j["warnings"] = traj.warnings;
  j["wall_time_s"] = wall_time_s;
  auto os = open_out(dir / "summary.json");
  os << j.dump(2) << '\n';
}

void write_cascade_outputs(const fs::path& dir, const ExperimentConfig& config,
                           const CascadeReport& report, double wall_time_s) {
  fs::create_directories(dir);
  {
    auto os = open_out(dir / "estimates.csv");
    os << estimates_header(true) << '\n';
    for (std::size_t k = 0; k < report.members.size(); ++k) {
      const MemberResult& m = report.members[k];
      write_estimates_rows(os, m.records, m.newton_iterations,
                           static_cast<int>(k));
    }
  }

  json members = json::array();
  for (const MemberResult& m : report.members) {
    members.push_back({{"epsilon", m.member.epsilon},
                       {"lambda", m.member.lambda},
                       {"dt", m.member.dt},
                       {"grid", std::to_string(m.member.nx) + "x" +
                                    std::to_string(m.member.ny)},
                       {"terminal", record_json(m.terminal)},
                       {"weak_residual", m.weak_residual},
                       {"max_mass_drift", m.max_mass_drift},
                       {"newton_total", m.total_newton_iterations},
                       {"newton_max", m.max_newton_iterations},
                       {"warnings", m.warnings}});
  }
  json lambda_groups = json::array();
  for (const LambdaGroup& g : report.lambda_uniformity) {
    lambda_groups.push_back({{"epsilon", g.epsilon},
                             {"members", g.members},
                             {"ratios", ratios_json(g.ratios)}});
  }
  json j;
  j["preset"] = config.preset;
  j["epsilon0"] = report.epsilon0;
  j["members"] = members;
  j["lambda_uniformity"] = lambda_groups;
  j["epsilon_uniformity"] = ratios_json(report.epsilon_uniformity);
  j["scaled_uniformity"] = ratios_json(report.scaled_uniformity);
  j["cauchy_h0"] = report.cauchy_h0;
  j["cauchy_v0star"] = report.cauchy_v0star;
  {
    auto os = open_out(dir / "cascade.json");
    os << j.dump(2) << '\n';
  }
  json summary = {{"preset", config.preset},
                  {"members", report.members.size()},
                  {"wall_time_s", wall_time_s}};
  auto os = open_out(dir / "summary.json");
  os << summary.dump(2) << '\n';
}

}  // namespace dpl
