#include "dpl/estimates.hpp"

#include <cmath>

namespace dpl {

const std::array<std::string_view, EstimateRecord::kFieldCount>&
EstimateRecord::field_names() {
  static const std::array<std::string_view, kFieldCount> names = {
      "lem31_a",         "lem31_b",    "lem32_a",   "lem32_b",  "lem33_u",
      "lem33_v",         "lem33_c",    "lem33_lambda_v0", "lem33_dphi",
      "lem34_mu",        "lem34_beta", "mass_drift", "energy"};
  return names;
}

std::array<double, EstimateRecord::kFieldCount> EstimateRecord::field_values()
    const {
  return {lem31_a, lem31_b,    lem32_a,   lem32_b,         lem33_u,
          lem33_v, lem33_c,    lem33_lambda_v0, lem33_dphi, lem34_mu,
          lem34_beta, mass_drift, energy};
}

bool EstimateRecord::all_finite() const {
  for (double x : field_values()) {
    if (!std::isfinite(x)) return false;
  }
  return std::isfinite(t);
}

double energy(const EstimateContext& ctx, const BulkSurfaceField& v) {
  const StripGrid& grid = ctx.ops.grid();
  const double lambda = ctx.config.lambda;
  const double eps = ctx.config.epsilon;
  double potential = 0.0;
  for (int j = 0; j < grid.ny; ++j) {
    const double w = grid.mass_weight(j);
    for (int i = 0; i < grid.nx; ++i) {
      const double u = v(i, j) + ctx.m0;
      potential += w * (ctx.graph.regularized_potential(lambda, u) +
                        eps * ctx.pi.primitive(u));
    }
  }
  return 0.5 * eps * ctx.ops.apply_a(v, v) + potential -
         inner_h(grid, ctx.f, v);
}

namespace {

// Pointwise-in-time terms of the state itself.
struct Pointwise {
  double h0_sq;      // |v|^2_{H0}
  double v0_sq;      // |v|^2_{V0}
  double v0star_sq;  // |v|^2_{V0*}
  double l1_bulk;
  double l1_surface;
  double u_sq;  // |u|^2_H
};

Pointwise pointwise(const EstimateContext& ctx, const State& s) {
  const StripGrid& grid = ctx.ops.grid();
  Pointwise p{};
  p.h0_sq = inner_h(grid, s.v, s.v);
  p.v0_sq = ctx.ops.apply_a(s.v, s.v);
  const double star = ctx.ops.norm_v0star(s.v);
  p.v0star_sq = star * star;
  const auto [bulk, surface] =
      l1_potential(grid, ctx.graph, ctx.config.lambda, s.u);
  p.l1_bulk = bulk;
  p.l1_surface = surface;
  p.u_sq = inner_h(grid, s.u, s.u);
  return p;
}

void fill_pointwise(const EstimateContext& ctx, const State& s,
                    const Pointwise& p, EstimateRecord& rec) {
  const double lambda = ctx.config.lambda;
  const double eps = ctx.config.epsilon;
  rec.t = s.t;
  rec.lem31_a = lambda * p.h0_sq + p.v0star_sq;
  rec.lem33_u = p.u_sq;
  rec.lem33_v = p.h0_sq;
  rec.lem33_lambda_v0 = lambda * p.v0_sq;
  rec.lem33_c = rec.lem33_lambda_v0 + rec.lem33_dphi;
  rec.mass_drift = std::abs(mean(ctx.ops.grid(), s.u) - ctx.m0);
  rec.energy = energy(ctx, s.v);
  // lem32_a without its time integrals; record() adds those.
  rec.lem32_a = eps * p.v0_sq + 2.0 * p.l1_bulk + 2.0 * p.l1_surface;
}

}  // namespace

EstimateRecord initial_record(const EstimateContext& ctx, const State& state) {
  EstimateRecord rec;
  rec.step = 0;
  fill_pointwise(ctx, state, pointwise(ctx, state), rec);
  return rec;
}

EstimateRecord record(const EstimateContext& ctx, const EstimateRecord& previous,
                      const State& prev_state, const State& state) {
  const StripGrid& grid = ctx.ops.grid();
  const double lambda = ctx.config.lambda;
  const double eps = ctx.config.epsilon;
  const double dt = state.t - prev_state.t;

  // Integrands at the left endpoint.
  const double prev_v0_sq = ctx.ops.apply_a(prev_state.v, prev_state.v);
  const auto [prev_l1_bulk, prev_l1_surface] =
      l1_potential(grid, ctx.graph, lambda, prev_state.u);
  const double prev_mu_a = ctx.ops.apply_a(prev_state.mu, prev_state.mu);
  const double prev_mu_h = inner_h(grid, prev_state.mu, prev_state.mu);
  const BulkSurfaceField dphi = ctx.ops.apply_subdiff_phi(prev_state.v);
  const double prev_dphi_sq = inner_h(grid, dphi, dphi);
  const double prev_beta_sq = inner_h(grid, prev_state.xi, prev_state.xi);

  // Backward difference of the stepper.
  BulkSurfaceField rate = state.v - prev_state.v;
  rate *= 1.0 / dt;
  const double rate_h0_sq = inner_h(grid, rate, rate);
  const double rate_star = ctx.ops.norm_v0star(project(grid, rate));

  EstimateRecord rec = previous;
  rec.step = previous.step + 1;

  const double integral_lem31 =
      0.5 * eps * prev_v0_sq + 2.0 * prev_l1_bulk + 2.0 * prev_l1_surface;
  const double integral_rate =
      2.0 * lambda * rate_h0_sq + rate_star * rate_star;

  rec.lem31_b = previous.lem31_b + dt * integral_lem31;
  rec.lem32_b = previous.lem32_b + dt * prev_mu_a;
  rec.lem33_dphi = previous.lem33_dphi + dt * eps * prev_dphi_sq;
  rec.lem34_mu = previous.lem34_mu + dt * (prev_mu_h + prev_mu_a);
  rec.lem34_beta = previous.lem34_beta + dt * prev_beta_sq;

  rec.rate_integral = previous.rate_integral + dt * integral_rate;

  fill_pointwise(ctx, state, pointwise(ctx, state), rec);
  rec.lem32_a += rec.rate_integral;
  return rec;
}

}  // namespace dpl
