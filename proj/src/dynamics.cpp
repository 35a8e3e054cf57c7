#include "dpl/dynamics.hpp"

#include <Eigen/SparseLU>
#include <cmath>
#include <sstream>

namespace dpl {

namespace {

constexpr double kLineSearchFloor = 1.0 / (1 << 20);

std::string describe(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

}  // namespace

int SolverConfig::step_count() const {
  return static_cast<int>(std::ceil(horizon / dt - 1e-9));
}

std::vector<std::string> validate_config(const SolverConfig& config,
                                         const MonotoneGraph& graph,
                                         const PiFunction& pi) {
  std::vector<std::string> warnings;
  if (!(config.epsilon >= 0.0 && config.epsilon <= 1.0)) {
    throw std::invalid_argument("epsilon must lie in [0, 1], got " +
                                describe(config.epsilon));
  }
  if (!(config.lambda >= 0.0 && config.lambda <= 1.0)) {
    throw std::invalid_argument("lambda must lie in [0, 1], got " +
                                describe(config.lambda));
  }
  if (!(config.dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(config.horizon > 0.0)) {
    throw std::invalid_argument("horizon T must be positive");
  }
  if (!(config.newton_tol > 0.0)) {
    throw std::invalid_argument("newton_tol must be positive");
  }
  if (config.newton_max < 1) {
    throw std::invalid_argument("newton_max must be at least 1");
  }
  if (config.keep_every < 1) {
    throw std::invalid_argument("keep_every must be at least 1");
  }
  if (config.lambda == 0.0 && !graph.admits_zero_lambda()) {
    throw std::invalid_argument("graph " + graph.name() +
                                " is not locally Lipschitz; lambda = 0 is "
                                "only allowed for identity, cubic and "
                                "power-law m >= 1");
  }
  const double eps0 = epsilon0(pi);
  if (config.epsilon > eps0) {
    const std::string msg = "epsilon = " + describe(config.epsilon) +
                            " exceeds eps0 = " + describe(eps0) +
                            "; the uniform estimates need eps in (0, eps0]";
    if (config.monitor_estimates) throw std::invalid_argument(msg);
    warnings.push_back(msg);
  }
  return warnings;
}

double check_initial_data(const StripGrid& grid, const MonotoneGraph& graph,
                          const BulkSurfaceField& u0) {
  if (!(u0.grid() == grid)) {
    throw std::invalid_argument("initial datum lives on a different grid");
  }
  const Interval dom = graph.domain();
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const double r = u0(i, j);
      if (!std::isfinite(r) || !std::isfinite(graph.potential(r))) {
        throw CompatibilityViolated(
            "(A3): beta_hat(u0) is not summable: u0 = " + describe(r) +
            " at node (" + std::to_string(i) + "," + std::to_string(j) +
            ") lies outside D(beta) = " + dom.to_string());
      }
    }
  }
  const double m0 = mean(grid, u0);
  if (!dom.interior(m0)) {
    throw CompatibilityViolated("(A3): m0 = " + describe(m0) +
                                " not interior to D(beta) = " +
                                dom.to_string());
  }
  return m0;
}

struct Stepper::Factorization {
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  Eigen::VectorXd slope;
  bool valid = false;
};

Stepper::Stepper(const OperatorSet& ops, const MonotoneGraph& graph,
                 const PiFunction& pi, const BulkSurfaceField& f,
                 const SolverConfig& config, double m0)
    : ops_(ops),
      graph_(graph),
      pi_(pi),
      f_(f),
      config_(config),
      m0_(m0),
      lu_(std::make_unique<Factorization>()) {
  if (!(f_.grid() == ops_.grid())) {
    throw std::invalid_argument("source lives on a different grid");
  }
}

Stepper::~Stepper() = default;
Stepper::Stepper(Stepper&&) noexcept = default;

Eigen::VectorXd Stepper::nonlinearity(const Eigen::VectorXd& v) const {
  Eigen::VectorXd out(v.size());
  const double lambda = config_.lambda;
  const double eps = config_.epsilon;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    const double u = v[k] + m0_;
    out[k] = graph_.regularized(lambda, u) + eps * pi_.value(u);
  }
  return out;
}

Eigen::VectorXd Stepper::nonlinearity_derivative(
    const Eigen::VectorXd& v) const {
  Eigen::VectorXd out(v.size());
  const double lambda = config_.lambda;
  const double eps = config_.epsilon;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    const double u = v[k] + m0_;
    out[k] = graph_.regularized_derivative(lambda, u) + eps * pi_.derivative(u);
  }
  return out;
}

Stepper::Residual Stepper::residual(const Eigen::VectorXd& v_prev,
                                    const Eigen::VectorXd& v,
                                    const Eigen::VectorXd& mu) const {
  const Eigen::VectorXd& mass = ops_.mass();
  const auto& a = ops_.stiffness();
  const double dt = config_.dt;
  const Eigen::VectorXd increment = v - v_prev;

  Residual res;
  res.r1 = mass.cwiseProduct(increment) + dt * (a * mu);
  Eigen::VectorXd rhs = (config_.lambda / dt) * mass.cwiseProduct(increment) +
                        config_.epsilon * (a * v) +
                        mass.cwiseProduct(nonlinearity(v) - f_.values());
  res.r2 = mass.cwiseProduct(mu) - rhs;
  res.norm = std::sqrt(res.r1.cwiseAbs2().cwiseQuotient(mass).sum() +
                       res.r2.cwiseAbs2().cwiseQuotient(mass).sum());
  return res;
}

bool Stepper::factorize(const Eigen::VectorXd& slope) {
  if (lu_->valid && lu_->slope.size() == slope.size() &&
      lu_->slope == slope) {
    return false;
  }
  const Eigen::VectorXd& mass = ops_.mass();
  const auto& a = ops_.stiffness();
  const Eigen::Index n = mass.size();
  const double dt = config_.dt;
  const double lambda = config_.lambda;
  const double eps = config_.epsilon;

  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(4 * n + 2 * a.nonZeros()));
  for (Eigen::Index k = 0; k < n; ++k) {
    entries.emplace_back(k, k, mass[k]);
    entries.emplace_back(n + k, n + k, mass[k]);
    entries.emplace_back(n + k, k,
                         -(lambda / dt) * mass[k] - mass[k] * slope[k]);
  }
  for (int col = 0; col < a.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(a, col); it; ++it) {
      entries.emplace_back(it.row(), n + it.col(), dt * it.value());
      entries.emplace_back(n + it.row(), it.col(), -eps * it.value());
    }
  }
  Eigen::SparseMatrix<double> jacobian(2 * n, 2 * n);
  jacobian.setFromTriplets(entries.begin(), entries.end());
  jacobian.makeCompressed();

  lu_->lu.compute(jacobian);
  if (lu_->lu.info() != Eigen::Success) {
    lu_->valid = false;
    throw LinearSolveFailed("Newton Jacobian factorization failed: " +
                            lu_->lu.lastErrorMessage());
  }
  lu_->slope = slope;
  lu_->valid = true;
  return true;
}

State Stepper::make_state(double t, BulkSurfaceField v) const {
  const StripGrid& grid = ops_.grid();
  const double eps = config_.epsilon;
  State s;
  s.t = t;
  s.u = v;
  s.u.values().array() += m0_;
  Eigen::VectorXd xi(v.values().size());
  for (Eigen::Index k = 0; k < xi.size(); ++k) {
    xi[k] = graph_.regularized(config_.lambda, s.u.values()[k]);
  }
  s.xi = BulkSurfaceField(grid, xi);
  Eigen::VectorXd mu = nonlinearity(v.values()) - f_.values();
  if (eps != 0.0) {
    mu += eps * (ops_.stiffness() * v.values()).cwiseQuotient(ops_.mass());
  }
  s.mu = BulkSurfaceField(grid, mu);
  s.v = std::move(v);
  return s;
}

State Stepper::step(const State& state, StepReport* report) {
  const Eigen::VectorXd& v_prev = state.v.values();
  const Eigen::Index n = v_prev.size();
  Eigen::VectorXd v = v_prev;
  Eigen::VectorXd mu = state.mu.values();
  if (mu.size() != n) mu = make_state(state.t, state.v).mu.values();

  StepReport local;
  Residual res = residual(v_prev, v, mu);
  int iteration = 0;
  while (res.norm > config_.newton_tol) {
    if (iteration == config_.newton_max) {
      throw NewtonDiverged("Newton did not converge in " +
                               std::to_string(iteration) +
                               " iterations; residual " + describe(res.norm),
                           res.norm, iteration);
    }
    if (factorize(nonlinearity_derivative(v))) ++local.refactorizations;
    Eigen::VectorXd rhs(2 * n);
    rhs << -res.r1, -res.r2;
    const Eigen::VectorXd direction = lu_->lu.solve(rhs);
    if (lu_->lu.info() != Eigen::Success || !direction.allFinite()) {
      throw LinearSolveFailed("Newton linear solve failed");
    }
    ++iteration;

    double step_length = 1.0;
    while (true) {
      Eigen::VectorXd v_trial = v + step_length * direction.head(n);
      Eigen::VectorXd mu_trial = mu + step_length * direction.tail(n);
      Residual trial = residual(v_prev, v_trial, mu_trial);
      if (trial.norm < res.norm || trial.norm <= config_.newton_tol) {
        v = std::move(v_trial);
        mu = std::move(mu_trial);
        res = std::move(trial);
        break;
      }
      step_length *= 0.5;
      if (step_length < kLineSearchFloor) {
        throw NewtonDiverged("line search stalled at residual " +
                                 describe(res.norm),
                             res.norm, iteration);
      }
    }
  }
  if (!v.allFinite() || !mu.allFinite()) {
    throw NumericalBreakdown("non-finite Newton iterate");
  }

  local.newton_iterations = iteration;
  local.residual = res.norm;
  if (report) *report = local;

  State next = make_state(state.t + config_.dt,
                          BulkSurfaceField(ops_.grid(), std::move(v)));
  next.mu = BulkSurfaceField(ops_.grid(), std::move(mu));
  return next;
}

State step(const OperatorSet& ops, const MonotoneGraph& graph,
           const PiFunction& pi, const BulkSurfaceField& f,
           const SolverConfig& config, double m0, const State& state,
           StepReport* report) {
  Stepper stepper(ops, graph, pi, f, config, m0);
  return stepper.step(state, report);
}

Trajectory run(const OperatorSet& ops, const MonotoneGraph& graph,
               const PiFunction& pi, const BulkSurfaceField& g,
               const BulkSurfaceField& u0, const SolverConfig& config) {
  const StripGrid& grid = ops.grid();
  Trajectory traj;
  traj.config = config;
  traj.graph = graph;
  traj.pi = pi;
  traj.warnings = validate_config(config, graph, pi);
  traj.m0 = check_initial_data(grid, graph, u0);
  traj.g = g;
  traj.f = ops.lift_source(g);

  BulkSurfaceField v0 = config.epsilon > 0.0
                            ? ops.regularize_initial(u0, config.epsilon)
                            : project(grid, u0);
  Stepper stepper(ops, graph, pi, traj.f, config, traj.m0);
  State current = stepper.make_state(0.0, std::move(v0));
  traj.states.push_back(current);
  traj.state_steps.push_back(0);

  const EstimateContext ctx{ops, graph, pi, traj.config, traj.f, traj.m0};
  const int steps = config.step_count();
  traj.newton_iterations.reserve(steps);
  if (config.monitor_estimates) traj.records.reserve(steps + 1);

  for (int n = 1; n <= steps; ++n) {
    StepReport report;
    State next = stepper.step(current, &report);
    next.t = n * config.dt;
    traj.newton_iterations.push_back(report.newton_iterations);
    traj.refactorizations += report.refactorizations;

    if (n == 1) {
      // mu(0) is taken from the first accepted step.
      current.mu = next.mu;
      traj.states.front().mu = next.mu;
      if (config.monitor_estimates) {
        traj.records.push_back(initial_record(ctx, traj.states.front()));
      }
    }
    if (config.monitor_estimates) {
      EstimateRecord rec = record(ctx, traj.records.back(), current, next);
      if (!rec.all_finite()) {
        throw NumericalBreakdown("non-finite estimate at step " +
                                 std::to_string(n));
      }
      traj.records.push_back(rec);
    }
    traj.max_mass_drift =
        std::max(traj.max_mass_drift, std::abs(mean(grid, next.u) - traj.m0));

    current = std::move(next);
    if (n % config.keep_every == 0 || n == steps) {
      traj.states.push_back(current);
      traj.state_steps.push_back(n);
    }
  }
  return traj;
}

}  // namespace dpl
