#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <iosfwd>
#include <stdexcept>

#include "dpl/geometry.hpp"

namespace dpl {

/// A linear solve failed; for this package that means an assembly defect.
class LinearSolveFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller passed a field outside the subspace an operator is defined on.
class PreconditionViolated : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct CgResult {
  int iterations = 0;
  double relative_residual = 0.0;
};

/**
 * Discrete forms on the strip: the diagonal mass M realizing (.,.)_H and the
 * stiffness A realizing a(u, z) = u^T A z.
 *
 * A is assembled edge by edge from the quadratic form
 *   sum_edges c_e (z_a - z_b)^2,
 * with x-edges weighted hy * wy_j / hx in the bulk (wy = 1/2 on boundary
 * rows) plus 1/hx on the two boundary rows for the tangential surface term,
 * and y-edges weighted hx / hy. Symmetry and A 1 = 0 hold by construction.
 */
class OperatorSet {
 public:
  explicit OperatorSet(const StripGrid& grid);

  const StripGrid& grid() const { return grid_; }
  const Eigen::VectorXd& mass() const { return mass_; }
  const Eigen::SparseMatrix<double>& stiffness() const { return stiffness_; }

  double apply_a(const BulkSurfaceField& u, const BulkSurfaceField& z) const;

  /// M^-1 A v, the discrete pair (-Laplace v, d_nu v - Laplace_Gamma v).
  /// v must have zero mean.
  BulkSurfaceField apply_subdiff_phi(const BulkSurfaceField& v) const;

  /// The mean-zero v with a(v, z) = (w, z)_H for all z. w must have zero mean.
  BulkSurfaceField solve_f_inverse(const BulkSurfaceField& w,
                                   CgResult* stats = nullptr) const;

  /// |w|_{V0*} = sqrt((w, F^-1 w)_H).
  double norm_v0star(const BulkSurfaceField& w) const;

  /// f with d(phi)(f) = g and m(f) = 0.
  BulkSurfaceField lift_source(const BulkSurfaceField& g) const;

  /// Solves v + eps d(phi)(v) = P u0, i.e. (M + eps A) v = M P u0.
  BulkSurfaceField regularize_initial(const BulkSurfaceField& u0,
                                      double epsilon) const;

  /// Smallest nonzero eigenvalue of M^-1 A (power iteration on F^-1).
  double smallest_nonzero_eigenvalue(int max_iterations = 5000,
                                     double tolerance = 1e-12) const;

  /// Coordinate-format dump of A: "row col value" per line, 0-based.
  void write_stiffness_coo(std::ostream& os) const;

  double cg_tolerance() const { return cg_tolerance_; }
  int cg_max_iterations() const { return cg_max_iterations_; }

 private:
  void require_same_grid(const BulkSurfaceField& z) const;
  void require_mean_zero(const BulkSurfaceField& z, const char* what) const;
  BulkSurfaceField field(Eigen::VectorXd values) const;

  StripGrid grid_;
  Eigen::VectorXd mass_;
  Eigen::SparseMatrix<double> stiffness_;
  Eigen::VectorXd stiffness_diagonal_;
  double cg_tolerance_ = 1e-12;
  int cg_max_iterations_ = 0;
};

}  // namespace dpl
