#pragma once

#include <Eigen/SparseCore>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpl/estimates.hpp"
#include "dpl/graphs.hpp"
#include "dpl/operators.hpp"
#include "dpl/state.hpp"

namespace dpl {

/// Semismooth Newton failed to bring the residual below tolerance.
class NewtonDiverged : public std::runtime_error {
 public:
  NewtonDiverged(const std::string& what, double last_residual, int iterations)
      : std::runtime_error(what),
        last_residual_(last_residual),
        iterations_(iterations) {}
  double last_residual() const { return last_residual_; }
  int iterations() const { return iterations_; }

 private:
  double last_residual_;
  int iterations_;
};

/// Initial data violates assumption (A3): m0 outside int D(beta), or
/// beta_hat(u0) not summable.
class CompatibilityViolated : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A NaN/Inf appeared in the state or its estimates.
class NumericalBreakdown : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Checks the SolverConfig against the graph and pi. Returns warnings for
/// soft violations (eps > eps0 without monitoring).
std::vector<std::string> validate_config(const SolverConfig& config,
                                         const MonotoneGraph& graph,
                                         const PiFunction& pi);

/// Enforces (A3) on the discrete initial datum and returns m0 = m(u0).
double check_initial_data(const StripGrid& grid, const MonotoneGraph& graph,
                          const BulkSurfaceField& u0);

struct StepReport {
  int newton_iterations = 0;
  double residual = 0.0;
  int refactorizations = 0;
};

/**
 * Backward Euler for the mixed system
 *
 *   M (v+ - v)/dt + A mu+ = 0,
 *   M mu+ = lambda M (v+ - v)/dt + eps A v+ + M (b(u+) + eps pi(u+) - f),
 *
 * with u+ = v+ + m0 1 and b = beta_lambda. The pair (v+, mu+) is found by
 * semismooth Newton on the block system with a residual-monotone halving
 * line search. The LU factorization of the Jacobian is reused while the
 * generalized derivative of b + eps pi is unchanged.
 */
class Stepper {
 public:
  Stepper(const OperatorSet& ops, const MonotoneGraph& graph,
          const PiFunction& pi, const BulkSurfaceField& f,
          const SolverConfig& config, double m0);
  ~Stepper();
  Stepper(Stepper&&) noexcept;
  Stepper& operator=(Stepper&&) = delete;
  Stepper(const Stepper&) = delete;
  Stepper& operator=(const Stepper&) = delete;

  State step(const State& state, StepReport* report = nullptr);

  /// State with the given v at time t; mu is the value (ii) gives for v+ = v.
  State make_state(double t, BulkSurfaceField v) const;

  double m0() const { return m0_; }

 private:
  struct Residual {
    Eigen::VectorXd r1;  // dt-scaled first equation
    Eigen::VectorXd r2;
    double norm;
  };

  Residual residual(const Eigen::VectorXd& v_prev, const Eigen::VectorXd& v,
                    const Eigen::VectorXd& mu) const;
  Eigen::VectorXd nonlinearity(const Eigen::VectorXd& v) const;
  Eigen::VectorXd nonlinearity_derivative(const Eigen::VectorXd& v) const;
  bool factorize(const Eigen::VectorXd& slope);

  const OperatorSet& ops_;
  MonotoneGraph graph_;
  PiFunction pi_;
  BulkSurfaceField f_;
  SolverConfig config_;
  double m0_;

  struct Factorization;
  std::unique_ptr<Factorization> lu_;
};

/// One backward Euler step without factorization reuse.
State step(const OperatorSet& ops, const MonotoneGraph& graph,
           const PiFunction& pi, const BulkSurfaceField& f,
           const SolverConfig& config, double m0, const State& state,
           StepReport* report = nullptr);

struct Trajectory {
  SolverConfig config;
  MonotoneGraph graph = MonotoneGraph::identity();
  PiFunction pi = PiFunction::zero();
  double m0 = 0.0;
  BulkSurfaceField f;
  BulkSurfaceField g;
  /// Kept states (index 0 is t = 0); see SolverConfig::keep_every.
  std::vector<State> states;
  /// Step number of each kept state.
  std::vector<int> state_steps;
  /// One record per step including step 0, empty without monitoring.
  std::vector<EstimateRecord> records;
  std::vector<int> newton_iterations;
  int refactorizations = 0;
  double max_mass_drift = 0.0;
  std::vector<std::string> warnings;

  int step_count() const { return static_cast<int>(newton_iterations.size()); }
  const State& final_state() const { return states.back(); }
};

/**
 * Lifts g to f, regularizes u0 to v0eps, and steps to the horizon.
 *
 * g must have zero mean (A2); u0 must satisfy (A3). With eps == 0 the
 * initial datum is used unregularized.
 */
Trajectory run(const OperatorSet& ops, const MonotoneGraph& graph,
               const PiFunction& pi, const BulkSurfaceField& g,
               const BulkSurfaceField& u0, const SolverConfig& config);

}  // namespace dpl
