#include "dpl/diagnostics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

namespace dpl {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Integer k with a * k == b up to rounding, or 0.
int integer_ratio(double a, double b) {
  const double q = b / a;
  const double k = std::round(q);
  if (k < 1.0 || std::abs(q - k) > 1e-9 * k) return 0;
  return static_cast<int>(k);
}

}  // namespace

std::vector<BulkSurfaceField> weak_test_basis(const StripGrid& grid) {
  const double two_pi = 2.0 * std::numbers::pi / grid.period;
  const std::array<std::function<double(double)>, 8> x_factors = {
      [](double) { return 1.0; },
      [=](double x) { return std::cos(two_pi * x); },
      [=](double x) { return std::sin(two_pi * x); },
      [=](double x) { return std::cos(2.0 * two_pi * x); },
      [=](double x) { return std::sin(2.0 * two_pi * x); },
      [=](double x) { return std::cos(3.0 * two_pi * x); },
      [=](double x) { return std::sin(3.0 * two_pi * x); },
      [=](double x) { return std::cos(4.0 * two_pi * x); }};
  std::vector<BulkSurfaceField> basis;
  basis.reserve(24);
  for (const auto& fx : x_factors) {
    for (int power = 0; power < 3; ++power) {
      basis.push_back(BulkSurfaceField::from_function(
          grid, [&](double x, double y) {
            const double s = 2.0 * y / grid.height - 1.0;
            return fx(x) * std::pow(s, power);
          }));
    }
  }
  return basis;
}

double weak_residual(const OperatorSet& ops, const Trajectory& trajectory,
                     const BulkSurfaceField& f) {
  const StripGrid& grid = ops.grid();
  const int steps = trajectory.step_count();
  if (static_cast<int>(trajectory.states.size()) != steps + 1) {
    throw std::invalid_argument(
        "weak residual needs every step of the trajectory (keep_every = 1)");
  }
  if (steps == 0) return 0.0;
  const BulkSurfaceField g = ops.apply_subdiff_phi(f);
  const auto& a = ops.stiffness();
  const Eigen::VectorXd& mass = ops.mass();

  struct TestPair {
    Eigen::VectorXd mass_z;  // M z
    Eigen::VectorXd stiff_z;  // A z
    double source;            // (g, z)_H
    double norm_v;
  };
  std::vector<TestPair> tests;
  for (const BulkSurfaceField& z : weak_test_basis(grid)) {
    TestPair t;
    t.mass_z = mass.cwiseProduct(z.values());
    t.stiff_z = a * z.values();
    t.source = g.values().dot(t.mass_z);
    t.norm_v = std::sqrt(z.values().dot(t.mass_z) + z.values().dot(t.stiff_z));
    tests.push_back(std::move(t));
  }

  double worst = 0.0;
  for (int n = 1; n <= steps; ++n) {
    const State& prev = trajectory.states[n - 1];
    const State& cur = trajectory.states[n];
    const double dt = cur.t - prev.t;
    const Eigen::VectorXd rate = (cur.u.values() - prev.u.values()) / dt;
    for (const TestPair& t : tests) {
      const double r =
          rate.dot(t.mass_z) + cur.xi.values().dot(t.stiff_z) - t.source;
      worst = std::max(worst, std::abs(r) / t.norm_v);
    }
  }
  return worst;
}

BulkSurfaceField source_field(const StripGrid& grid,
                              const std::function<double(double, double)>& g,
                              std::vector<std::string>* warnings) {
  if (!g) return BulkSurfaceField(grid);
  const BulkSurfaceField raw = BulkSurfaceField::from_function(grid, g);
  BulkSurfaceField projected = project(grid, raw);
  const double shift = std::abs(mean(grid, raw));
  if (shift > 1e-12 && warnings) {
    std::ostringstream os;
    os << "(A2): source g had mean " << shift
       << " and was projected onto zero mean";
    warnings->push_back(os.str());
  }
  return projected;
}

Trajectory run_member(const Problem& problem, const CascadeMember& member,
                      std::vector<std::string>* warnings) {
  const StripGrid grid =
      StripGrid::make(member.nx, member.ny, problem.period, problem.height);
  const OperatorSet ops(grid);
  SolverConfig config = problem.base;
  config.epsilon = member.epsilon;
  config.lambda = member.lambda;
  config.dt = member.dt;

  BulkSurfaceField u0;
  if (problem.initial_field) {
    if (!(problem.initial_field->grid() == grid)) {
      throw std::invalid_argument(
          "imported initial datum does not match the member grid");
    }
    u0 = *problem.initial_field;
  } else if (problem.initial) {
    u0 = BulkSurfaceField::from_function(grid, problem.initial);
  } else {
    throw std::invalid_argument("problem has no initial datum");
  }
  std::vector<std::string> source_warnings;
  const BulkSurfaceField g = source_field(grid, problem.source, &source_warnings);
  Trajectory traj = run(ops, problem.graph, problem.pi, g, u0, config);
  traj.warnings.insert(traj.warnings.begin(), source_warnings.begin(),
                       source_warnings.end());
  if (warnings) {
    warnings->insert(warnings->end(), traj.warnings.begin(),
                     traj.warnings.end());
  }
  return traj;
}

double cauchy_distance(const Trajectory& a, const Trajectory& b,
                       CauchyNorm norm) {
  if (a.states.empty() || b.states.empty()) return kNaN;
  const StripGrid& ga = a.states.front().u.grid();
  const StripGrid& gb = b.states.front().u.grid();
  const bool a_coarse = ga.size() <= gb.size();
  const Trajectory& coarse = a_coarse ? a : b;
  const Trajectory& fine = a_coarse ? b : a;
  const StripGrid& gc = coarse.states.front().u.grid();
  const StripGrid& gf = fine.states.front().u.grid();
  if (gc.period != gf.period || gc.height != gf.height) return kNaN;
  if (gf.nx % gc.nx != 0 || (gf.ny - 1) % (gc.ny - 1) != 0) return kNaN;
  const int sx = gf.nx / gc.nx;
  const int sy = (gf.ny - 1) / (gc.ny - 1);

  const double dt_a = a.config.dt;
  const double dt_b = b.config.dt;
  const double big = std::max(dt_a, dt_b);
  const int ka = integer_ratio(dt_a, big);
  const int kb = integer_ratio(dt_b, big);
  if (ka == 0 || kb == 0) return kNaN;
  const int ra = a.step_count() / ka;
  const int rb = b.step_count() / kb;
  const int common = std::min(ra, rb);
  if (static_cast<int>(a.states.size()) != a.step_count() + 1 ||
      static_cast<int>(b.states.size()) != b.step_count() + 1) {
    return kNaN;
  }
  const int kc = a_coarse ? ka : kb;
  const int kf = a_coarse ? kb : ka;

  const OperatorSet ops(gc);
  double worst = 0.0;
  for (int q = 0; q <= common; ++q) {
    const BulkSurfaceField& uc = coarse.states[q * kc].u;
    const BulkSurfaceField& uf = fine.states[q * kf].u;
    BulkSurfaceField diff(gc);
    for (int j = 0; j < gc.ny; ++j) {
      for (int i = 0; i < gc.nx; ++i) diff(i, j) = uc(i, j) - uf(i * sx, j * sy);
    }
    diff = project(gc, diff);
    const double d = norm == CauchyNorm::H0 ? norm_h(gc, diff)
                                            : ops.norm_v0star(diff);
    worst = std::max(worst, d);
  }
  return worst;
}

double spread_ratio(const std::vector<double>& values) {
  if (values.empty()) return 1.0;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*hi == 0.0) return 1.0;
  if (*lo <= 0.0) return std::numeric_limits<double>::infinity();
  return *hi / *lo;
}

double record_field(const EstimateRecord& rec, std::string_view name) {
  const auto& names = EstimateRecord::field_names();
  const auto values = rec.field_values();
  for (std::size_t k = 0; k < names.size(); ++k) {
    if (names[k] == name) return values[k];
  }
  throw std::invalid_argument("unknown estimate field " + std::string(name));
}

int default_thread_count() {
  int threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  if (const char* env = std::getenv("DPL_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1) threads = static_cast<int>(cap);
  }
  return threads;
}

CascadeReport cascade_study(const Problem& problem,
                            const std::vector<CascadeMember>& schedule,
                            int threads) {
  if (schedule.empty()) throw std::invalid_argument("empty cascade schedule");
  const int count = static_cast<int>(schedule.size());
  Problem shared = problem;
  shared.base.keep_every = 1;
  shared.base.monitor_estimates = true;

  std::vector<std::optional<Trajectory>> trajectories(count);
  std::vector<MemberResult> results(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int k = next.fetch_add(1); k < count; k = next.fetch_add(1)) {
      try {
        MemberResult res;
        res.member = schedule[k];
        Trajectory traj = run_member(shared, schedule[k], &res.warnings);
        const OperatorSet ops(traj.states.front().u.grid());
        res.records = traj.records;
        res.terminal = traj.records.back();
        res.weak_residual = weak_residual(ops, traj, traj.f);
        res.max_mass_drift = traj.max_mass_drift;
        res.newton_iterations = traj.newton_iterations;
        for (int it : traj.newton_iterations) {
          res.total_newton_iterations += it;
          res.max_newton_iterations = std::max(res.max_newton_iterations, it);
        }
        results[k] = std::move(res);
        trajectories[k] = std::move(traj);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const int workers = std::clamp(threads, 1, count);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (int k = 0; k < count; ++k) {
    if (!errors[k]) continue;
    try {
      std::rethrow_exception(errors[k]);
    } catch (const std::exception& e) {
      throw CascadeMemberFailed(k, e.what());
    }
  }

  CascadeReport report;
  report.epsilon0 = epsilon0(problem.pi);
  report.members = std::move(results);

  auto ratios_over = [&](const std::vector<int>& idx, auto fields, bool scaled) {
    std::vector<FieldRatio> out;
    for (std::string_view name : fields) {
      std::vector<double> values;
      for (int k : idx) {
        const MemberResult& m = report.members[k];
        double value = record_field(m.terminal, name);
        if (scaled && m.member.epsilon > 0.0) {
          value /= 1.0 + m.member.lambda / m.member.epsilon;
        }
        values.push_back(value);
      }
      out.push_back({std::string(name), spread_ratio(values)});
    }
    return out;
  };

  for (int k = 0; k < count; ++k) {
    const double eps = schedule[k].epsilon;
    auto it = std::find_if(
        report.lambda_uniformity.begin(), report.lambda_uniformity.end(),
        [&](const LambdaGroup& g) { return g.epsilon == eps; });
    if (it == report.lambda_uniformity.end()) {
      report.lambda_uniformity.push_back({eps, {k}, {}});
    } else {
      it->members.push_back(k);
    }
  }
  for (LambdaGroup& group : report.lambda_uniformity) {
    group.ratios = ratios_over(group.members, kUniformFields, false);
  }
  std::vector<int> below_eps0;
  std::vector<int> all;
  for (int k = 0; k < count; ++k) {
    all.push_back(k);
    if (schedule[k].epsilon <= report.epsilon0) below_eps0.push_back(k);
  }
  report.epsilon_uniformity = ratios_over(below_eps0, kUniformFields, false);
  report.scaled_uniformity = ratios_over(all, kScaledFields, true);

  for (int k = 0; k + 1 < count; ++k) {
    report.cauchy_h0.push_back(
        cauchy_distance(*trajectories[k], *trajectories[k + 1], CauchyNorm::H0));
    report.cauchy_v0star.push_back(cauchy_distance(
        *trajectories[k], *trajectories[k + 1], CauchyNorm::V0Star));
  }
  return report;
}

std::string format_cascade_table(const CascadeReport& report) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-4s %-9s %-9s %-9s %-7s", "#", "eps",
                "lambda", "dt", "grid");
  os << line;
  for (std::string_view name : kUniformFields) {
    std::snprintf(line, sizeof line, " %12s", std::string(name).c_str());
    os << line;
  }
  std::snprintf(line, sizeof line, " %12s %12s\n", "weak_resid", "mass_drift");
  os << line;
  for (std::size_t k = 0; k < report.members.size(); ++k) {
    const MemberResult& m = report.members[k];
    const std::string grid =
        std::to_string(m.member.nx) + "x" + std::to_string(m.member.ny);
    std::snprintf(line, sizeof line, "%-4zu %-9.3g %-9.3g %-9.3g %-7s", k,
                  m.member.epsilon, m.member.lambda, m.member.dt, grid.c_str());
    os << line;
    for (std::string_view name : kUniformFields) {
      std::snprintf(line, sizeof line, " %12.5e", record_field(m.terminal, name));
      os << line;
    }
    std::snprintf(line, sizeof line, " %12.5e %12.5e\n", m.weak_residual,
                  m.max_mass_drift);
    os << line;
  }
  for (std::size_t k = 0; k < report.cauchy_v0star.size(); ++k) {
    std::snprintf(line, sizeof line,
                  "cauchy %zu-%zu: H0 %.5e  V0* %.5e\n", k, k + 1,
                  report.cauchy_h0[k], report.cauchy_v0star[k]);
    os << line;
  }
  return os.str();
}

}  // namespace dpl
