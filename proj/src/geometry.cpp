#include "dpl/geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dpl {

namespace {

void require_same_grid(const BulkSurfaceField& a, const BulkSurfaceField& b) {
  if (!(a.grid() == b.grid())) {
    throw std::invalid_argument("fields live on different grids");
  }
}

}  // namespace

StripGrid StripGrid::make(int nx, int ny, double period, double height) {
  if (nx < 4) throw std::invalid_argument("grid needs nx >= 4");
  if (ny < 3) throw std::invalid_argument("grid needs ny >= 3");
  if (!(period > 0.0) || !(height > 0.0)) {
    throw std::invalid_argument("grid extents must be positive");
  }
  return StripGrid{nx, ny, period, height};
}

double StripGrid::bulk_weight(int j) const {
  const double w = hx() * hy();
  return on_surface(j) ? 0.5 * w : w;
}

Eigen::VectorXd StripGrid::mass_diagonal() const {
  Eigen::VectorXd m(size());
  for (int j = 0; j < ny; ++j) {
    const double w = mass_weight(j);
    for (int i = 0; i < nx; ++i) m[index(i, j)] = w;
  }
  return m;
}

BulkSurfaceField::BulkSurfaceField(const StripGrid& grid, Eigen::VectorXd values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw std::invalid_argument("field has " + std::to_string(values_.size()) +
                                " values, grid needs " +
                                std::to_string(grid_.size()));
  }
}

BulkSurfaceField BulkSurfaceField::constant(const StripGrid& grid, double c) {
  return BulkSurfaceField(grid, Eigen::VectorXd::Constant(grid.size(), c));
}

BulkSurfaceField BulkSurfaceField::from_function(
    const StripGrid& grid, const std::function<double(double, double)>& f) {
  BulkSurfaceField z(grid);
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) z(i, j) = f(grid.x(i), grid.y(j));
  }
  return z;
}

BulkSurfaceField& BulkSurfaceField::operator+=(const BulkSurfaceField& other) {
  require_same_grid(*this, other);
  values_ += other.values_;
  return *this;
}

BulkSurfaceField& BulkSurfaceField::operator-=(const BulkSurfaceField& other) {
  require_same_grid(*this, other);
  values_ -= other.values_;
  return *this;
}

BulkSurfaceField& BulkSurfaceField::operator*=(double s) {
  values_ *= s;
  return *this;
}

BulkSurfaceField operator+(BulkSurfaceField a, const BulkSurfaceField& b) {
  a += b;
  return a;
}

BulkSurfaceField operator-(BulkSurfaceField a, const BulkSurfaceField& b) {
  a -= b;
  return a;
}

BulkSurfaceField operator*(double s, BulkSurfaceField a) {
  a *= s;
  return a;
}

double mean(const StripGrid& grid, const BulkSurfaceField& z) {
  double sum = 0.0;
  for (int j = 0; j < grid.ny; ++j) {
    const double w = grid.mass_weight(j);
    double row = 0.0;
    for (int i = 0; i < grid.nx; ++i) row += z(i, j);
    sum += w * row;
  }
  return sum / grid.total_measure();
}

BulkSurfaceField project(const StripGrid& grid, const BulkSurfaceField& z) {
  BulkSurfaceField out = z;
  out.values().array() -= mean(grid, z);
  return out;
}

double inner_h(const StripGrid& grid, const BulkSurfaceField& a,
               const BulkSurfaceField& b) {
  require_same_grid(a, b);
  double sum = 0.0;
  for (int j = 0; j < grid.ny; ++j) {
    const double w = grid.mass_weight(j);
    double row = 0.0;
    for (int i = 0; i < grid.nx; ++i) row += a(i, j) * b(i, j);
    sum += w * row;
  }
  return sum;
}

double norm_h(const StripGrid& grid, const BulkSurfaceField& z) {
  return std::sqrt(inner_h(grid, z, z));
}

std::pair<double, double> l1_potential(const StripGrid& grid,
                                       const MonotoneGraph& graph,
                                       double lambda,
                                       const BulkSurfaceField& u) {
  double bulk = 0.0;
  double surface = 0.0;
  for (int j = 0; j < grid.ny; ++j) {
    const double wb = grid.bulk_weight(j);
    const double ws = grid.surface_weight(j);
    for (int i = 0; i < grid.nx; ++i) {
      const double p = graph.regularized_potential(lambda, u(i, j));
      bulk += wb * p;
      if (ws > 0.0) surface += ws * p;
    }
  }
  return {bulk, surface};
}

}  // namespace dpl
