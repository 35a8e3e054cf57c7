#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "dpl/dynamics.hpp"
#include "oracles.hpp"

using namespace dpl;
using doctest::Approx;

namespace {

// Backward Euler step solved by fixed-point iteration on the dense system
//   (M + lambda A + dt eps A M^-1 A) v+ = M v + lambda A v + dt A (f - N(v+)),
// N(v) = beta_lambda(v + m0) + eps pi(v + m0), with damping theta.
struct DenseStep {
  Eigen::VectorXd v, mu;
  int iterations = 0;
};

DenseStep dense_step(const StripGrid& grid, const MonotoneGraph& graph,
                     const PiFunction& pi, const Eigen::VectorXd& f,
                     double eps, double lambda, double dt, double m0,
                     const Eigen::VectorXd& v) {
  const Eigen::MatrixXd a = oracle::stiffness(grid);
  const Eigen::VectorXd m = oracle::mass(grid);
  const Eigen::MatrixXd minv_a = m.cwiseInverse().asDiagonal() * a;
  const Eigen::MatrixXd lhs =
      Eigen::MatrixXd(m.asDiagonal()) + lambda * a + dt * eps * a * minv_a;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(lhs);
  auto nonlinear = [&](const Eigen::VectorXd& w) {
    Eigen::VectorXd out(w.size());
    for (Eigen::Index k = 0; k < w.size(); ++k) {
      out[k] = graph.yosida(lambda, w[k] + m0) + eps * pi.value(w[k] + m0);
    }
    return out;
  };
  const Eigen::VectorXd fixed = m.cwiseProduct(v) + lambda * a * v + dt * a * f;
  DenseStep out;
  Eigen::VectorXd x = v;
  const double theta = 0.7;
  for (; out.iterations < 10000; ++out.iterations) {
    const Eigen::VectorXd next =
        ldlt.solve(fixed - dt * a * nonlinear(x));
    const double change = (next - x).lpNorm<Eigen::Infinity>();
    x = theta * next + (1 - theta) * x;
    if (change < 1e-14) break;
  }
  out.v = x;
  out.mu = lambda * (x - v) / dt + eps * minv_a * x + nonlinear(x) - f;
  return out;
}

BulkSurfaceField wave(const StripGrid& g, double mean, double amp) {
  return BulkSurfaceField::from_function(g, [=](double x, double y) {
    return mean + amp * std::cos(2 * std::numbers::pi * x) * (2 * y - 1) +
           0.3 * amp * std::sin(std::numbers::pi * y);
  });
}

}  // namespace

TEST_CASE("one double-obstacle step matches the dense fixed-point oracle") {
  const StripGrid g = StripGrid::make(8, 5);
  const OperatorSet ops(g);
  std::mt19937_64 rng(21);
  const auto u0 = oracle::random_field(g, rng, 0.2, 0.8);
  const double m0 = mean(g, u0);
  const auto graph = MonotoneGraph::double_obstacle();
  const auto pi = PiFunction::neg_identity();
  const auto source = project(g, oracle::random_field(g, rng));
  const auto f = ops.lift_source(source);

  SolverConfig config;
  config.epsilon = 0.1;
  config.lambda = 0.1;
  config.dt = 5e-3;
  // Start away from [0, 1] in places so the Yosida branch is active.
  auto v = project(g, u0);
  v.values()[3] += 0.9;
  v.values()[g.index(5, 4)] -= 0.9;
  v = project(g, v);

  Stepper stepper(ops, graph, pi, f, config, m0);
  StepReport report;
  const State next = stepper.step(stepper.make_state(0.0, v), &report);
  const DenseStep ref = dense_step(g, graph, pi, f.values(), 0.1, 0.1,
                                   config.dt, m0, v.values());
  CHECK(ref.iterations < 10000);
  CHECK((next.v.values() - ref.v).lpNorm<Eigen::Infinity>() <= 1e-9);
  CHECK((next.mu.values() - ref.mu).lpNorm<Eigen::Infinity>() <= 1e-9);
  CHECK(report.residual <= config.newton_tol);
  CHECK(std::abs(mean(g, next.u) - m0) <= 1e-12);
  for (Eigen::Index k = 0; k < next.xi.values().size(); ++k) {
    CHECK(next.xi.values()[k] == graph.yosida(0.1, next.u.values()[k]));
  }
}

TEST_CASE("constant data is a fixed point of the identity graph") {
  const StripGrid g = StripGrid::make(8, 5);
  const OperatorSet ops(g);
  const auto u0 = BulkSurfaceField::constant(g, 0.7);
  SolverConfig config;
  config.horizon = 10 * config.dt;
  const Trajectory traj = run(ops, MonotoneGraph::identity(), PiFunction::zero(),
                              BulkSurfaceField(g), u0, config);
  for (const State& s : traj.states) {
    CHECK((s.u.values().array() - 0.7).abs().maxCoeff() <= 1e-14);
  }
}

TEST_CASE("zero data gives the zero trajectory") {
  const StripGrid g = StripGrid::make(8, 5);
  const OperatorSet ops(g);
  SolverConfig config;
  config.horizon = 5 * config.dt;
  const Trajectory traj =
      run(ops, MonotoneGraph::stefan(1, 1, 1), PiFunction::zero(),
          BulkSurfaceField(g), BulkSurfaceField(g), config);
  for (const State& s : traj.states) CHECK(s.u.values().norm() == 0.0);
  for (const EstimateRecord& r : traj.records) {
    for (double x : r.field_values()) CHECK(x == 0.0);
  }
}

TEST_CASE("mass is conserved on random data") {
  const StripGrid g = StripGrid::make(12, 7);
  const OperatorSet ops(g);
  std::mt19937_64 rng(8);
  for (const auto& [graph, pi] :
       {std::pair{MonotoneGraph::stefan(1, 1, 1), PiFunction::stefan(1)},
        std::pair{MonotoneGraph::double_obstacle(), PiFunction::neg_identity()},
        std::pair{MonotoneGraph::power_law(0.5), PiFunction::zero()}}) {
    CAPTURE(graph.name());
    const auto u0 = oracle::random_field(g, rng, 0.1, 0.9);
    SolverConfig config;
    config.horizon = 20 * config.dt;
    const Trajectory traj =
        run(ops, graph, pi, project(g, oracle::random_field(g, rng)), u0, config);
    CHECK(traj.max_mass_drift <= 1e-12);
    CHECK(std::abs(traj.m0 - mean(g, u0)) == 0.0);
    for (const State& s : traj.states) {
      CHECK(std::abs(mean(g, s.v)) <= 1e-11);
      CHECK((s.u - s.v).values().cwiseAbs().maxCoeff() ==
            Approx(traj.m0).epsilon(1e-15));
    }
  }
}

TEST_CASE("stefan run: Newton bound and the chemical-potential identity") {
  const StripGrid g = StripGrid::make(32, 17);
  const OperatorSet ops(g);
  const auto graph = MonotoneGraph::stefan(1, 1, 1);
  const auto pi = PiFunction::stefan(1);
  const auto u0 = wave(g, 0.5, 1.2);
  SolverConfig config;  // eps 0.1, lambda 0.01, dt 1e-3
  config.horizon = 100 * config.dt;
  const Trajectory traj = run(ops, graph, pi, BulkSurfaceField(g), u0, config);
  REQUIRE(traj.step_count() == 100);
  for (int it : traj.newton_iterations) CHECK(it <= 15);

  // (ii): mu = lambda delta + eps dphi(v) + beta_lambda(u) + eps pi(u) - f.
  for (std::size_t n = 1; n < traj.states.size(); ++n) {
    const State& prev = traj.states[n - 1];
    const State& s = traj.states[n];
    BulkSurfaceField rhs = s.v - prev.v;
    rhs *= config.lambda / config.dt;
    rhs += config.epsilon * ops.apply_subdiff_phi(s.v);
    for (Eigen::Index k = 0; k < rhs.values().size(); ++k) {
      const double u = s.u.values()[k];
      rhs.values()[k] += graph.yosida(config.lambda, u) +
                         config.epsilon * pi.value(u) - traj.f.values()[k];
    }
    CHECK(norm_h(g, s.mu - rhs) <= 10 * config.newton_tol);
    // (i): M delta + A mu = 0.
    const Eigen::VectorXd r1 =
        ops.mass().cwiseProduct((s.v - prev.v).values()) / config.dt +
        ops.stiffness() * s.mu.values();
    CHECK(std::sqrt(r1.cwiseAbs2().cwiseQuotient(ops.mass()).sum()) <=
          10 * config.newton_tol / config.dt);
  }
}

TEST_CASE("energy does not increase without a source") {
  const StripGrid g = StripGrid::make(16, 9);
  const OperatorSet ops(g);
  for (const auto& [graph, pi, u0] :
       {std::tuple{MonotoneGraph::stefan(1, 1, 1), PiFunction::stefan(1),
                   wave(g, 0.5, 1.2)},
        std::tuple{MonotoneGraph::double_obstacle(), PiFunction::neg_identity(),
                   wave(g, 0.5, 0.35)}}) {
    SolverConfig config;
    config.horizon = 0.05;
    const Trajectory traj = run(ops, graph, pi, BulkSurfaceField(g), u0, config);
    for (std::size_t n = 1; n < traj.records.size(); ++n) {
      CHECK(traj.records[n].energy <=
            traj.records[n - 1].energy + 10 * config.newton_tol);
    }
  }
}

TEST_CASE("lambda = 0 runs for locally Lipschitz graphs only") {
  const StripGrid g = StripGrid::make(8, 5);
  const OperatorSet ops(g);
  SolverConfig config;
  config.lambda = 0.0;
  config.horizon = 5 * config.dt;
  const auto u0 = wave(g, 1.0, 0.5);
  CHECK_NOTHROW(run(ops, MonotoneGraph::power_law(2), PiFunction::zero(),
                    BulkSurfaceField(g), u0, config));
  CHECK_NOTHROW(run(ops, MonotoneGraph::cubic(), PiFunction::zero(),
                    BulkSurfaceField(g), u0, config));
  CHECK_THROWS_AS(run(ops, MonotoneGraph::stefan(1, 1, 1), PiFunction::zero(),
                      BulkSurfaceField(g), u0, config),
                  std::invalid_argument);
  CHECK_THROWS_AS(run(ops, MonotoneGraph::double_obstacle(), PiFunction::zero(),
                      BulkSurfaceField(g), wave(g, 0.5, 0.2), config),
                  std::invalid_argument);
}

TEST_CASE("configuration gates") {
  const auto stefan = MonotoneGraph::stefan(1, 1, 1);
  const auto pi = PiFunction::stefan(1);
  SolverConfig config;
  config.epsilon = 0.5;  // above eps0 = 1/4
  CHECK_THROWS_AS(validate_config(config, stefan, pi), std::invalid_argument);
  config.monitor_estimates = false;
  CHECK(validate_config(config, stefan, pi).size() == 1);
  config = SolverConfig{};
  config.dt = 0.0;
  CHECK_THROWS_AS(validate_config(config, stefan, pi), std::invalid_argument);
  config = SolverConfig{};
  config.lambda = 1.5;
  CHECK_THROWS_AS(validate_config(config, stefan, pi), std::invalid_argument);
}

TEST_CASE("compatibility (A3) is enforced") {
  const StripGrid g = StripGrid::make(8, 5);
  const auto obstacle = MonotoneGraph::double_obstacle();
  auto u0 = BulkSurfaceField::constant(g, 0.5);
  CHECK(check_initial_data(g, obstacle, u0) == Approx(0.5));
  u0.values()[g.index(2, 0)] = 1.5;
  try {
    check_initial_data(g, obstacle, u0);
    FAIL("accepted u0 outside D(beta)");
  } catch (const CompatibilityViolated& e) {
    CHECK(std::string(e.what()).find("(A3)") != std::string::npos);
  }
  try {
    check_initial_data(g, obstacle, BulkSurfaceField::constant(g, 1.0));
    FAIL("accepted m0 on the boundary of D(beta)");
  } catch (const CompatibilityViolated& e) {
    CHECK(std::string(e.what()).find("not interior") != std::string::npos);
  }
  CHECK_NOTHROW(check_initial_data(g, MonotoneGraph::stefan(1, 1, 1),
                                   BulkSurfaceField::constant(g, 7.0)));
}

TEST_CASE("Newton failure is reported with its last residual") {
  const StripGrid g = StripGrid::make(8, 5);
  const OperatorSet ops(g);
  SolverConfig config;
  config.newton_tol = 1e-300;
  config.newton_max = 2;
  try {
    run(ops, MonotoneGraph::stefan(1, 1, 1), PiFunction::stefan(1),
        BulkSurfaceField(g), wave(g, 0.5, 1.2), config);
    FAIL("no NewtonDiverged");
  } catch (const NewtonDiverged& e) {
    CHECK(e.last_residual() > 0.0);
    CHECK(e.iterations() == 2);
  }
}

TEST_CASE("kept states follow keep_every") {
  const StripGrid g = StripGrid::make(8, 5);
  const OperatorSet ops(g);
  SolverConfig config;
  config.horizon = 10 * config.dt;
  config.keep_every = 4;
  config.monitor_estimates = false;
  const Trajectory traj =
      run(ops, MonotoneGraph::identity(), PiFunction::zero(),
          BulkSurfaceField(g), wave(g, 1.0, 0.3), config);
  CHECK(traj.state_steps == std::vector<int>{0, 4, 8, 10});
  CHECK(traj.records.empty());
  CHECK(traj.final_state().t == Approx(0.01));
}
