#pragma once

#include <array>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpl/dynamics.hpp"

namespace dpl {

/// Fixed family of 24 test pairs: {1, cos 2pi x, sin 2pi x, cos 4pi x,
/// sin 4pi x, cos 6pi x, sin 6pi x, cos 8pi x} x {1, s, s^2}, s = 2y/Y - 1.
std::vector<BulkSurfaceField> weak_test_basis(const StripGrid& grid);

/**
 * Residual of the weak form of the limit problem along a trajectory:
 *
 *   max_n max_k |((u^n - u^{n-1})/dt, z_k)_H + a(xi^n, z_k) - (g, z_k)_H| / |z_k|_V
 *
 * with xi^n = beta_lambda(u^n) and g = d(phi)(f). Needs every step kept.
 */
double weak_residual(const OperatorSet& ops, const Trajectory& trajectory,
                     const BulkSurfaceField& f);

/// Grid-independent description of an experiment.
struct Problem {
  MonotoneGraph graph = MonotoneGraph::identity();
  PiFunction pi = PiFunction::zero();
  std::function<double(double, double)> initial;
  std::function<double(double, double)> source;
  /// Overrides `initial` when set; must match the member grid.
  std::optional<BulkSurfaceField> initial_field;
  double period = 1.0;
  double height = 1.0;
  /// Tolerances and horizon shared by all members; epsilon, lambda and dt
  /// are overridden per member.
  SolverConfig base;
};

struct CascadeMember {
  double epsilon = 0.1;
  double lambda = 0.01;
  double dt = 1e-3;
  int nx = 32;
  int ny = 17;

  bool operator==(const CascadeMember&) const = default;
};

/// Discretizes the problem on the member grid and runs it.
Trajectory run_member(const Problem& problem, const CascadeMember& member,
                      std::vector<std::string>* warnings = nullptr);

/// Evaluates the source profile on the grid and projects it onto zero mean.
/// A warning is appended when the projection moves it by more than 1e-12.
BulkSurfaceField source_field(const StripGrid& grid,
                              const std::function<double(double, double)>& g,
                              std::vector<std::string>* warnings);

enum class CauchyNorm { H0, V0Star };

/**
 * max over common times of |P(u_coarse - R u_fine)| on the coarser grid,
 * where R injects the finer grid onto the coarser one. Returns NaN when the
 * grids are not nested or the time steps are not integer multiples.
 */
double cauchy_distance(const Trajectory& a, const Trajectory& b,
                       CauchyNorm norm);

struct MemberResult {
  CascadeMember member;
  EstimateRecord terminal;
  std::vector<EstimateRecord> records;
  double weak_residual = 0.0;
  double max_mass_drift = 0.0;
  int total_newton_iterations = 0;
  int max_newton_iterations = 0;
  std::vector<int> newton_iterations;
  std::vector<std::string> warnings;
};

struct FieldRatio {
  std::string field;
  double ratio = 1.0;
};

struct LambdaGroup {
  double epsilon = 0.0;
  std::vector<int> members;
  std::vector<FieldRatio> ratios;
};

struct CascadeReport {
  double epsilon0 = 1.0;
  std::vector<MemberResult> members;
  /// Lemma 3.1/3.2 fields across members sharing eps.
  std::vector<LambdaGroup> lambda_uniformity;
  /// Lemma 3.1/3.2 fields across all members with eps <= eps0.
  std::vector<FieldRatio> epsilon_uniformity;
  /// Lemma 3.3/3.4 fields divided by (1 + lambda/eps), across all members.
  std::vector<FieldRatio> scaled_uniformity;
  /// Consecutive-member distances in C([0,T]; H0) and C([0,T]; V0*).
  std::vector<double> cauchy_h0;
  std::vector<double> cauchy_v0star;
};

/// A cascade member failed; what() names the member index.
class CascadeMemberFailed : public std::runtime_error {
 public:
  CascadeMemberFailed(int index, const std::string& what)
      : std::runtime_error("cascade member " + std::to_string(index) + ": " +
                           what),
        index_(index) {}
  int index() const { return index_; }

 private:
  int index_;
};

/// max/min over the values; 1 when all are zero, +inf when only some are.
double spread_ratio(const std::vector<double>& values);

/// Fields gated for lambda/eps uniformity.
inline constexpr std::array<std::string_view, 4> kUniformFields = {
    "lem31_a", "lem31_b", "lem32_a", "lem32_b"};
/// Fields gated after division by (1 + lambda/eps).
inline constexpr std::array<std::string_view, 5> kScaledFields = {
    "lem33_u", "lem33_v", "lem33_c", "lem34_mu", "lem34_beta"};

double record_field(const EstimateRecord& rec, std::string_view name);

/// Runs every member (up to `threads` at once) and assembles the report in
/// schedule order. Results do not depend on the thread count.
CascadeReport cascade_study(const Problem& problem,
                            const std::vector<CascadeMember>& schedule,
                            int threads = 1);

/// Member x estimate table for terminal display.
std::string format_cascade_table(const CascadeReport& report);

/// Thread cap from DPL_THREADS, falling back to the hardware concurrency.
int default_thread_count();

}  // namespace dpl
