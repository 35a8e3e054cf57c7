#pragma once

#include <Eigen/Core>
#include <functional>
#include <utility>

#include "dpl/graphs.hpp"

namespace dpl {

/**
 * Periodic strip (0, X)_per x (0, Y) sampled on nx x ny nodes.
 *
 * Rows j = 0 and j = ny - 1 form the boundary Gamma. Node (i, j) is stored
 * at index j * nx + i. Bulk quadrature is uniform in x and trapezoidal in y;
 * every boundary node additionally carries the surface weight hx, so the
 * diagonal mass of a node is its bulk weight plus its surface weight.
 */
struct StripGrid {
  int nx = 0;
  int ny = 0;
  double period = 1.0;
  double height = 1.0;

  static StripGrid make(int nx, int ny, double period = 1.0,
                        double height = 1.0);

  double hx() const { return period / nx; }
  double hy() const { return height / (ny - 1); }
  int size() const { return nx * ny; }
  int index(int i, int j) const { return j * nx + i; }
  bool on_surface(int j) const { return j == 0 || j == ny - 1; }
  double x(int i) const { return i * hx(); }
  double y(int j) const { return j * hy(); }

  double bulk_weight(int j) const;
  double surface_weight(int j) const { return on_surface(j) ? hx() : 0.0; }
  double mass_weight(int j) const { return bulk_weight(j) + surface_weight(j); }

  double bulk_measure() const { return period * height; }
  double surface_measure() const { return 2.0 * period; }
  double total_measure() const { return bulk_measure() + surface_measure(); }

  /// Diagonal of the mass operator realizing (.,.)_H.
  Eigen::VectorXd mass_diagonal() const;

  bool operator==(const StripGrid&) const = default;
};

/// Element of the discrete product space: bulk values with the boundary
/// rows doubling as the surface values, so z_Gamma = z|_Gamma always holds.
class BulkSurfaceField {
 public:
  BulkSurfaceField() = default;
  explicit BulkSurfaceField(const StripGrid& grid)
      : grid_(grid), values_(Eigen::VectorXd::Zero(grid.size())) {}
  BulkSurfaceField(const StripGrid& grid, Eigen::VectorXd values);

  static BulkSurfaceField constant(const StripGrid& grid, double c);
  static BulkSurfaceField from_function(
      const StripGrid& grid, const std::function<double(double, double)>& f);

  const StripGrid& grid() const { return grid_; }
  const Eigen::VectorXd& values() const { return values_; }
  Eigen::VectorXd& values() { return values_; }

  double operator()(int i, int j) const { return values_[grid_.index(i, j)]; }
  double& operator()(int i, int j) { return values_[grid_.index(i, j)]; }

  BulkSurfaceField& operator+=(const BulkSurfaceField& other);
  BulkSurfaceField& operator-=(const BulkSurfaceField& other);
  BulkSurfaceField& operator*=(double s);

 private:
  StripGrid grid_;
  Eigen::VectorXd values_;
};

BulkSurfaceField operator+(BulkSurfaceField a, const BulkSurfaceField& b);
BulkSurfaceField operator-(BulkSurfaceField a, const BulkSurfaceField& b);
BulkSurfaceField operator*(double s, BulkSurfaceField a);

/// Combined bulk + surface average m(z).
double mean(const StripGrid& grid, const BulkSurfaceField& z);

/// z - m(z) 1.
BulkSurfaceField project(const StripGrid& grid, const BulkSurfaceField& z);

double inner_h(const StripGrid& grid, const BulkSurfaceField& a,
               const BulkSurfaceField& b);

double norm_h(const StripGrid& grid, const BulkSurfaceField& z);

/// (|beta_hat_lambda(u)|_{L1(Omega)}, |beta_hat_lambda(u_Gamma)|_{L1(Gamma)}).
/// lambda == 0 uses beta_hat itself (see MonotoneGraph::regularized_potential).
std::pair<double, double> l1_potential(const StripGrid& grid,
                                       const MonotoneGraph& graph,
                                       double lambda,
                                       const BulkSurfaceField& u);

}  // namespace dpl
