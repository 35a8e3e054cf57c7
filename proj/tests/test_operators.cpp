#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "dpl/operators.hpp"
#include "oracles.hpp"

using namespace dpl;
using doctest::Approx;

namespace {

double rel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).norm() / std::max(1e-300, b.norm());
}

BulkSurfaceField mean_zero_random(const StripGrid& g, std::mt19937_64& rng) {
  return project(g, oracle::random_field(g, rng));
}

}  // namespace

TEST_CASE("assembly matches the dense difference-quotient oracle") {
  const StripGrid g = StripGrid::make(8, 5);
  const OperatorSet ops(g);
  const Eigen::MatrixXd a = Eigen::MatrixXd(ops.stiffness());
  CHECK((a - oracle::stiffness(g)).cwiseAbs().maxCoeff() <= 1e-13);
  CHECK((a - a.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a * Eigen::VectorXd::Ones(g.size())).cwiseAbs().maxCoeff() <=
        1e-13 * a.norm());
  CHECK(ops.mass().isApprox(oracle::mass(g), 1e-15));

  std::mt19937_64 rng(1);
  for (int k = 0; k < 100; ++k) {
    const auto z = oracle::random_field(g, rng);
    CHECK(ops.apply_a(z, z) >= -1e-12);
  }
  std::ostringstream coo;
  ops.write_stiffness_coo(coo);
  int lines = 0;
  for (char c : coo.str()) lines += c == '\n';
  CHECK(lines == ops.stiffness().nonZeros());
}

TEST_CASE("apply_a examples") {
  const StripGrid g = StripGrid::make(12, 7);
  const OperatorSet ops(g);
  std::mt19937_64 rng(2);
  const auto c = BulkSurfaceField::constant(g, 3.0);
  const auto u = oracle::random_field(g, rng);
  const auto w = oracle::random_field(g, rng);
  const auto z = oracle::random_field(g, rng);
  CHECK(std::abs(ops.apply_a(c, z)) <= 1e-12);
  CHECK(ops.apply_a(u, z) == Approx(ops.apply_a(z, u)).epsilon(1e-14));
  CHECK(ops.apply_a(2.0 * u + w, z) ==
        Approx(2.0 * ops.apply_a(u, z) + ops.apply_a(w, z)).epsilon(1e-12));
}

TEST_CASE("cos mode Dirichlet energy converges at second order") {
  // Bulk X Y (2 pi)^2 / 2 plus surface 2 X (2 pi)^2 / 2 with X = Y = 1.
  const double exact = 3.0 * 2.0 * std::numbers::pi * std::numbers::pi;
  std::vector<double> energy;
  for (int n : {8, 16, 32, 64}) {
    const StripGrid g = StripGrid::make(n, n / 2 + 1);
    const auto z = BulkSurfaceField::from_function(g, [](double x, double) {
      return std::cos(2 * std::numbers::pi * x);
    });
    energy.push_back(OperatorSet(g).apply_a(z, z));
  }
  for (std::size_t k = 1; k + 1 < energy.size(); ++k) {
    const double order = std::log2((energy[k - 1] - energy[k]) /
                                   (energy[k] - energy[k + 1]));
    CHECK(order == Approx(2.0).epsilon(0.05));
  }
  const double richardson = (4.0 * energy[3] - energy[2]) / 3.0;
  CHECK(std::abs(richardson - exact) < 1e-2 * std::abs(energy[3] - exact));
  CHECK(std::abs(richardson - exact) / exact < 1e-5);
}

TEST_CASE("subdifferential of phi") {
  const StripGrid g = StripGrid::make(8, 5);
  const OperatorSet ops(g);
  const Eigen::MatrixXd a = oracle::stiffness(g);
  const Eigen::VectorXd m = oracle::mass(g);
  std::mt19937_64 rng(3);
  CHECK(ops.apply_subdiff_phi(BulkSurfaceField(g)).values().norm() == 0.0);

  const auto mode = project(g, BulkSurfaceField::from_function(
                                   g, [](double x, double) {
                                     return std::cos(2 * std::numbers::pi * x);
                                   }));
  const Eigen::VectorXd dense = (a * mode.values()).cwiseQuotient(m);
  CHECK(rel(ops.apply_subdiff_phi(mode).values(), dense) <= 1e-13);

  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const auto v = mean_zero_random(g, rng);
    const auto z = oracle::random_field(g, rng);
    const double lhs = inner_h(g, ops.apply_subdiff_phi(v), z);
    const double rhs = ops.apply_a(v, z);
    worst = std::max(worst, std::abs(lhs - rhs) / std::abs(rhs));
  }
  CHECK(worst <= 1e-11);
  CHECK_THROWS_AS(ops.apply_subdiff_phi(BulkSurfaceField::constant(g, 1.0)),
                  PreconditionViolated);
}

TEST_CASE("F inverse against the dense pseudo-inverse") {
  const StripGrid g = StripGrid::make(8, 5);
  const OperatorSet ops(g);
  const oracle::Spectrum spectrum(g);
  std::mt19937_64 rng(4);
  CHECK(ops.solve_f_inverse(BulkSurfaceField(g)).values().norm() == 0.0);
  for (int k = 0; k < 20; ++k) {
    const auto w = mean_zero_random(g, rng);
    CgResult stats;
    const auto v = ops.solve_f_inverse(w, &stats);
    const Eigen::VectorXd expected = spectrum.f_inverse(w.values());
    CHECK((v.values() - expected).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(std::abs(mean(g, v)) <= 1e-13);
    CHECK(stats.relative_residual <= ops.cg_tolerance());

    const double norm_sq = w.values().dot(spectrum.mass.cwiseProduct(expected));
    CHECK(ops.norm_v0star(w) * ops.norm_v0star(w) ==
          Approx(norm_sq).epsilon(1e-10));
    CHECK(ops.norm_v0star(-2.5 * w) ==
          Approx(2.5 * ops.norm_v0star(w)).epsilon(1e-11));
    CHECK(rel(ops.solve_f_inverse(3.0 * w).values(), 3.0 * v.values()) <=
          1e-11);
    // F^-1 inverts F on H0.
    CHECK(rel(ops.solve_f_inverse(ops.apply_subdiff_phi(v)).values(),
              v.values()) <= 1e-10);
  }
  CHECK(ops.norm_v0star(BulkSurfaceField(g)) == 0.0);
  CHECK_THROWS_AS(ops.solve_f_inverse(BulkSurfaceField::constant(g, 1.0)),
                  PreconditionViolated);
}

TEST_CASE("source lifting") {
  const StripGrid g = StripGrid::make(8, 5);
  const OperatorSet ops(g);
  const oracle::Spectrum spectrum(g);
  std::mt19937_64 rng(5);
  CHECK(ops.lift_source(BulkSurfaceField(g)).values().norm() == 0.0);
  for (int k = 0; k < 20; ++k) {
    const auto gsrc = mean_zero_random(g, rng);
    const auto f = ops.lift_source(gsrc);
    CHECK(rel(ops.apply_subdiff_phi(f).values(), gsrc.values()) <= 1e-10);
    const auto v = mean_zero_random(g, rng);
    CHECK(rel(ops.lift_source(ops.apply_subdiff_phi(v)).values(), v.values()) <=
          1e-10);
  }
  const auto xmode = project(g, BulkSurfaceField::from_function(
                                    g, [](double x, double) {
                                      return std::sin(2 * std::numbers::pi * x);
                                    }));
  CHECK(rel(ops.lift_source(xmode).values(),
            spectrum.f_inverse(xmode.values())) <= 1e-10);
  try {
    ops.lift_source(BulkSurfaceField::constant(g, 0.5));
    FAIL("non-mean-zero source accepted");
  } catch (const PreconditionViolated& e) {
    CHECK(std::string(e.what()).find("(A2)") != std::string::npos);
  }
}

TEST_CASE("initial datum regularization") {
  const StripGrid g = StripGrid::make(8, 5);
  const OperatorSet ops(g);
  std::mt19937_64 rng(6);
  CHECK(ops.regularize_initial(BulkSurfaceField::constant(g, 0.3), 0.1)
            .values()
            .norm() <= 1e-14);

  const auto u0 = oracle::random_field(g, rng);
  const auto v0 = project(g, u0);
  // Dense solve of (M + eps A) v = M P u0.
  const Eigen::MatrixXd a = oracle::stiffness(g);
  const Eigen::VectorXd m = oracle::mass(g);
  const Eigen::MatrixXd lhs = Eigen::MatrixXd(m.asDiagonal()) + 0.1 * a;
  const Eigen::VectorXd dense = lhs.ldlt().solve(m.cwiseProduct(v0.values()));
  const auto v = ops.regularize_initial(u0, 0.1);
  CHECK(rel(v.values(), dense) <= 1e-10);
  CHECK(std::abs(mean(g, v)) <= 1e-13);
  CHECK(norm_h(g, v) <= norm_h(g, v0) + 1e-12);

  double previous = 1e300;
  for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const double gap = norm_h(g, ops.regularize_initial(u0, eps) - v0);
    CHECK(gap < previous);
    previous = gap;
  }
  CHECK_THROWS_AS(ops.regularize_initial(u0, 0.0), std::invalid_argument);
}

TEST_CASE("smallest nonzero eigenvalue") {
  const StripGrid g = StripGrid::make(8, 5);
  const double expected = oracle::Spectrum(g).smallest_nonzero();
  CHECK(OperatorSet(g).smallest_nonzero_eigenvalue() ==
        Approx(expected).epsilon(1e-8));
}
