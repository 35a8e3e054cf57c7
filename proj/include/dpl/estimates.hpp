#pragma once

#include <array>
#include <string_view>

#include "dpl/graphs.hpp"
#include "dpl/operators.hpp"
#include "dpl/state.hpp"

namespace dpl {

/**
 * Per-step values of the quantities bounded by the uniform estimates.
 *
 * Time integrals are cumulative and use left-endpoint quadrature: the step
 * from t_{n-1} to t_n adds dt times the integrand at t_{n-1}, except for
 * terms in v', which use the backward difference (v^n - v^{n-1}) / dt of the
 * stepper.
 */
struct EstimateRecord {
  int step = 0;
  double t = 0.0;
  /// lambda |v|^2_{H0} + |v|^2_{V0*}
  double lem31_a = 0.0;
  /// (eps/2) int |v|^2_{V0} + 2 int |bh_l(u)|_{L1(Omega)} + 2 int |bh_l(u_G)|_{L1(Gamma)}
  double lem31_b = 0.0;
  /// 2 lambda int |v'|^2_{H0} + int |v'|^2_{V0*} + eps |v|^2_{V0} + 2 |bh_l(u)|_{L1}
  /// + 2 |bh_l(u_G)|_{L1(Gamma)}
  double lem32_a = 0.0;
  /// int |P mu|^2_{V0}
  double lem32_b = 0.0;
  /// |u|^2_H
  double lem33_u = 0.0;
  /// |v|^2_{H0}
  double lem33_v = 0.0;
  /// lambda |v|^2_{V0} + eps int |d(phi)(v)|^2_{H0}
  double lem33_c = 0.0;
  /// lambda |v|^2_{V0} on its own
  double lem33_lambda_v0 = 0.0;
  /// eps int |d(phi)(v)|^2_{H0} on its own
  double lem33_dphi = 0.0;
  /// int |mu|^2_V
  double lem34_mu = 0.0;
  /// int |beta_lambda(u)|^2_H
  double lem34_beta = 0.0;
  double mass_drift = 0.0;
  /// eps phi(v) + int bh_l(u) + eps int pi_hat(u) - (f, v)_H
  double energy = 0.0;
  /// 2 lambda int |v'|^2_{H0} + int |v'|^2_{V0*}, the integral part of lem32_a
  double rate_integral = 0.0;

  static constexpr std::size_t kFieldCount = 13;
  static const std::array<std::string_view, kFieldCount>& field_names();
  std::array<double, kFieldCount> field_values() const;
  bool all_finite() const;
};

/// Fields that only accumulate nonnegative integrands.
inline constexpr std::array<std::string_view, 5> kCumulativeFields = {
    "lem31_b", "lem32_b", "lem33_dphi", "lem34_mu", "lem34_beta"};

/// Everything record() needs besides the two states.
struct EstimateContext {
  const OperatorSet& ops;
  const MonotoneGraph& graph;
  const PiFunction& pi;
  const SolverConfig& config;
  const BulkSurfaceField& f;
  double m0;
};

/// Free energy eps phi(v) + int beta_hat_lambda(u) + eps int pi_hat(u) - (f, v)_H.
double energy(const EstimateContext& ctx, const BulkSurfaceField& v);

/// Record at t = 0 (no time integrals yet).
EstimateRecord initial_record(const EstimateContext& ctx, const State& state);

/// Extends `previous` by the step prev_state -> state.
EstimateRecord record(const EstimateContext& ctx, const EstimateRecord& previous,
                      const State& prev_state, const State& state);

}  // namespace dpl
