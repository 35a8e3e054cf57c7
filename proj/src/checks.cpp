#include "dpl/checks.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "dpl/dynamics.hpp"

namespace dpl {

namespace {

std::string sci(double x) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << x;
  return os.str();
}

BulkSurfaceField random_field(const StripGrid& grid, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  BulkSurfaceField z(grid);
  for (Eigen::Index k = 0; k < z.values().size(); ++k) z.values()[k] = dist(rng);
  return z;
}

CheckResult graph_check(const MonotoneGraph& graph, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> r_dist(-3.0, 3.0);
  std::uniform_real_distribution<double> l_dist(1e-3, 1.0);
  constexpr double slack = 1e-12;
  int violations = 0;
  for (int k = 0; k < 1000; ++k) {
    double r = r_dist(rng), s = r_dist(rng);
    if (r > s) std::swap(r, s);
    const double lambda = l_dist(rng);
    const double br = graph.yosida(lambda, r), bs = graph.yosida(lambda, s);
    if (br > bs + slack) ++violations;
    if (std::abs(bs - br) > (s - r) / lambda + slack) ++violations;
    if (std::abs(graph.resolvent(lambda, s) - graph.resolvent(lambda, r)) >
        (s - r) + slack) {
      ++violations;
    }
    const double env = graph.moreau_envelope(lambda, r);
    const double pot = graph.potential(r);
    if (env < -slack || (std::isfinite(pot) && env > pot + slack)) ++violations;
  }
  return {"graph " + graph.name(), violations == 0,
          std::to_string(violations) + " violations in 1000 samples"};
}

}  // namespace

std::vector<CheckResult> run_invariant_checks(std::uint64_t seed, int nx,
                                              int ny) {
  std::mt19937_64 rng(seed);
  std::vector<CheckResult> out;

  for (const MonotoneGraph& g :
       {MonotoneGraph::stefan(1, 1, 1), MonotoneGraph::double_obstacle(),
        MonotoneGraph::power_law(0.5), MonotoneGraph::cubic(),
        MonotoneGraph::identity()}) {
    out.push_back(graph_check(g, rng));
  }

  const StripGrid grid = StripGrid::make(nx, ny);
  const OperatorSet ops(grid);
  const BulkSurfaceField one = BulkSurfaceField::constant(grid, 1.0);

  {
    const Eigen::SparseMatrix<double>& a = ops.stiffness();
    const Eigen::SparseMatrix<double> at = a.transpose();
    const double asym = (a - at).norm();
    const double kernel = (a * one.values()).lpNorm<Eigen::Infinity>();
    double min_quad = 0.0;
    for (int k = 0; k < 100; ++k) {
      const BulkSurfaceField z = random_field(grid, rng);
      min_quad = std::min(min_quad, ops.apply_a(z, z));
    }
    out.push_back({"stiffness symmetric, A1 = 0, PSD",
                   asym == 0.0 && kernel <= 1e-13 * a.norm() &&
                       min_quad >= -1e-12,
                   "asym " + sci(asym) + ", |A1| " + sci(kernel)});
  }
  {
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      const BulkSurfaceField v = project(grid, random_field(grid, rng));
      const BulkSurfaceField z = random_field(grid, rng);
      const double lhs = inner_h(grid, ops.apply_subdiff_phi(v), z);
      const double rhs = ops.apply_a(v, z);
      worst = std::max(worst, std::abs(lhs - rhs) /
                                  std::max(1e-300, std::abs(rhs)));
    }
    out.push_back({"duality (dphi v, z)_H = a(v, z)", worst <= 1e-11,
                   "max relative error " + sci(worst)});
  }
  {
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      const BulkSurfaceField g = project(grid, random_field(grid, rng));
      const BulkSurfaceField back = ops.apply_subdiff_phi(ops.lift_source(g));
      worst = std::max(worst, norm_h(grid, back - g) / norm_h(grid, g));
    }
    out.push_back({"dphi(lift_source(g)) = g", worst <= 1e-10,
                   "max relative error " + sci(worst)});
  }
  {
    const BulkSurfaceField u0 = BulkSurfaceField::from_function(
        grid, [](double x, double y) {
          return 0.5 + 0.8 * std::cos(2 * M_PI * x) * (2 * y - 1);
        });
    SolverConfig config;
    config.dt = 1e-3;
    config.horizon = 0.02;
    const BulkSurfaceField zero(grid);
    const Trajectory traj = run(ops, MonotoneGraph::stefan(1, 1, 1),
                                PiFunction::stefan(1), zero, u0, config);
    out.push_back({"mass conservation (stefan, 20 steps)",
                   traj.max_mass_drift <= 1e-11,
                   "max drift " + sci(traj.max_mass_drift)});
    double rise = 0.0;
    for (std::size_t n = 1; n < traj.records.size(); ++n) {
      rise = std::max(rise, traj.records[n].energy - traj.records[n - 1].energy);
    }
    out.push_back({"energy non-increasing (stefan, 20 steps)",
                   rise <= 10 * config.newton_tol,
                   "max increase " + sci(rise)});
  }
  {
    BulkSurfaceField u0 = BulkSurfaceField::constant(grid, 0.5);
    u0.values()[grid.index(1, 2)] = 1.5;
    bool rejected = false;
    std::string what;
    try {
      check_initial_data(grid, MonotoneGraph::double_obstacle(), u0);
    } catch (const CompatibilityViolated& e) {
      rejected = std::string(e.what()).find("(A3)") != std::string::npos;
      what = e.what();
    }
    out.push_back({"(A3) gate rejects u0 outside D(beta)", rejected,
                   rejected ? what : "accepted"});
  }
  return out;
}

}  // namespace dpl
