#pragma once

#include "dpl/geometry.hpp"

namespace dpl {

/// Regularization and time-stepping controls for one run.
struct SolverConfig {
  double epsilon = 0.1;  // eps in [0, 1]; 0 is the formal eps -> 0 problem
  double lambda = 0.01;  // lambda in [0, 1]; 0 needs admits_zero_lambda()
  double dt = 1e-3;
  double horizon = 0.1;
  double newton_tol = 1e-10;
  int newton_max = 50;
  /// Record an EstimateRecord per step. Also turns eps <= eps0 from a
  /// warning into a hard requirement.
  bool monitor_estimates = true;
  /// Keep every k-th state in the trajectory (the initial and final states
  /// are always kept). Weak residuals and Cauchy studies need 1.
  int keep_every = 1;

  int step_count() const;

  bool operator==(const SolverConfig&) const = default;
};

/// Accepted state of the regularized evolution at time t.
struct State {
  double t = 0.0;
  BulkSurfaceField v;   // mean zero
  BulkSurfaceField u;   // v + m0 1
  BulkSurfaceField mu;  // chemical potential
  BulkSurfaceField xi;  // beta_lambda(u)
};

}  // namespace dpl
