#include "dpl/operators.hpp"

#include <cmath>
#include <ostream>
#include <vector>

namespace dpl {

namespace {

constexpr double kMeanTolerance = 1e-10;

// Jacobi-preconditioned CG. With project_range set, the residual is kept
// orthogonal to the constants, which is the range of a singular A with
// kernel span{1}.
template <typename Apply>
CgResult preconditioned_cg(const Apply& apply, const Eigen::VectorXd& diagonal,
                           const Eigen::VectorXd& rhs, Eigen::VectorXd& x,
                           double tolerance, int max_iterations,
                           bool project_range) {
  CgResult result;
  const double rhs_norm = rhs.norm();
  x.setZero(rhs.size());
  if (rhs_norm == 0.0) return result;

  Eigen::VectorXd r = rhs;
  if (project_range) r.array() -= r.mean();
  Eigen::VectorXd z = r.cwiseQuotient(diagonal);
  Eigen::VectorXd p = z;
  Eigen::VectorXd q(rhs.size());
  double rz = r.dot(z);
  for (int it = 1; it <= max_iterations; ++it) {
    apply(p, q);
    const double pq = p.dot(q);
    if (!(pq > 0.0)) break;
    const double alpha = rz / pq;
    x.noalias() += alpha * p;
    r.noalias() -= alpha * q;
    if (project_range) r.array() -= r.mean();
    result.iterations = it;
    result.relative_residual = r.norm() / rhs_norm;
    if (result.relative_residual <= tolerance) return result;
    z = r.cwiseQuotient(diagonal);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  throw LinearSolveFailed("CG did not converge: relative residual " +
                          std::to_string(result.relative_residual) +
                          " after " + std::to_string(result.iterations) +
                          " iterations");
}

}  // namespace

OperatorSet::OperatorSet(const StripGrid& grid)
    : grid_(grid), mass_(grid.mass_diagonal()) {
  const int n = grid_.size();
  const double hx = grid_.hx();
  const double hy = grid_.hy();

  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(n) * 5);
  auto add_edge = [&](int a, int b, double c) {
    entries.emplace_back(a, a, c);
    entries.emplace_back(b, b, c);
    entries.emplace_back(a, b, -c);
    entries.emplace_back(b, a, -c);
  };

  for (int j = 0; j < grid_.ny; ++j) {
    const double wy = grid_.on_surface(j) ? 0.5 : 1.0;
    double c = hy * wy / hx;
    if (grid_.on_surface(j)) c += 1.0 / hx;
    for (int i = 0; i < grid_.nx; ++i) {
      add_edge(grid_.index(i, j), grid_.index((i + 1) % grid_.nx, j), c);
    }
  }
  const double cy = hx / hy;
  for (int j = 0; j + 1 < grid_.ny; ++j) {
    for (int i = 0; i < grid_.nx; ++i) {
      add_edge(grid_.index(i, j), grid_.index(i, j + 1), cy);
    }
  }

  stiffness_.resize(n, n);
  stiffness_.setFromTriplets(entries.begin(), entries.end());
  stiffness_.makeCompressed();
  stiffness_diagonal_ = stiffness_.diagonal();
  cg_max_iterations_ = 10 * n;
}

void OperatorSet::require_same_grid(const BulkSurfaceField& z) const {
  if (!(z.grid() == grid_)) {
    throw std::invalid_argument("field grid does not match operator grid");
  }
}

void OperatorSet::require_mean_zero(const BulkSurfaceField& z,
                                    const char* what) const {
  require_same_grid(z);
  const double m = mean(grid_, z);
  const double scale = std::max(1.0, z.values().cwiseAbs().maxCoeff());
  if (std::abs(m) > kMeanTolerance * scale) {
    throw PreconditionViolated(std::string(what) +
                               " requires a mean-zero field, got mean " +
                               std::to_string(m));
  }
}

BulkSurfaceField OperatorSet::field(Eigen::VectorXd values) const {
  return BulkSurfaceField(grid_, std::move(values));
}

double OperatorSet::apply_a(const BulkSurfaceField& u,
                            const BulkSurfaceField& z) const {
  require_same_grid(u);
  require_same_grid(z);
  return u.values().dot(stiffness_ * z.values());
}

BulkSurfaceField OperatorSet::apply_subdiff_phi(
    const BulkSurfaceField& v) const {
  require_mean_zero(v, "subdifferential of phi");
  Eigen::VectorXd w = stiffness_ * v.values();
  return field(w.cwiseQuotient(mass_));
}

BulkSurfaceField OperatorSet::solve_f_inverse(const BulkSurfaceField& w,
                                              CgResult* stats) const {
  require_mean_zero(w, "F^-1");
  const Eigen::VectorXd rhs = mass_.cwiseProduct(w.values());
  Eigen::VectorXd x;
  auto apply = [this](const Eigen::VectorXd& p, Eigen::VectorXd& q) {
    q.noalias() = stiffness_ * p;
  };
  const CgResult result =
      preconditioned_cg(apply, stiffness_diagonal_, rhs, x, cg_tolerance_,
                        cg_max_iterations_, /*project_range=*/true);
  if (stats) *stats = result;
  return project(grid_, field(std::move(x)));
}

double OperatorSet::norm_v0star(const BulkSurfaceField& w) const {
  const BulkSurfaceField y = solve_f_inverse(w);
  return std::sqrt(std::max(0.0, inner_h(grid_, w, y)));
}

BulkSurfaceField OperatorSet::lift_source(const BulkSurfaceField& g) const {
  require_same_grid(g);
  const double m = mean(grid_, g);
  const double scale = std::max(1.0, g.values().cwiseAbs().maxCoeff());
  if (std::abs(m) > kMeanTolerance * scale) {
    throw PreconditionViolated("(A2): source g must have zero mean, got " +
                               std::to_string(m));
  }
  return solve_f_inverse(g);
}

BulkSurfaceField OperatorSet::regularize_initial(const BulkSurfaceField& u0,
                                                 double epsilon) const {
  require_same_grid(u0);
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("initial regularization needs epsilon > 0");
  }
  const BulkSurfaceField v0 = project(grid_, u0);
  const Eigen::VectorXd rhs = mass_.cwiseProduct(v0.values());
  const Eigen::VectorXd diagonal = mass_ + epsilon * stiffness_diagonal_;
  Eigen::VectorXd x;
  auto apply = [&](const Eigen::VectorXd& p, Eigen::VectorXd& q) {
    q.noalias() = stiffness_ * p;
    q *= epsilon;
    q += mass_.cwiseProduct(p);
  };
  preconditioned_cg(apply, diagonal, rhs, x, cg_tolerance_, cg_max_iterations_,
                    /*project_range=*/false);
  return project(grid_, field(std::move(x)));
}

double OperatorSet::smallest_nonzero_eigenvalue(int max_iterations,
                                                double tolerance) const {
  // F^-1 is self-adjoint in (.,.)_H on the mean-zero subspace; its largest
  // eigenvalue is the reciprocal of the smallest nonzero one of M^-1 A.
  BulkSurfaceField x(grid_);
  for (int k = 0; k < grid_.size(); ++k) {
    x.values()[k] = std::sin(1.0 + 0.7 * k) + 0.3 * std::cos(2.3 * k);
  }
  x = project(grid_, x);
  x *= 1.0 / norm_h(grid_, x);
  double rho = 0.0;
  for (int it = 0; it < max_iterations; ++it) {
    BulkSurfaceField y = solve_f_inverse(x);
    const double next = inner_h(grid_, x, y);
    y *= 1.0 / norm_h(grid_, y);
    x = std::move(y);
    if (it > 0 && std::abs(next - rho) <= tolerance * std::abs(next)) {
      return 1.0 / next;
    }
    rho = next;
  }
  return 1.0 / rho;
}

void OperatorSet::write_stiffness_coo(std::ostream& os) const {
  os.precision(17);
  for (int k = 0; k < stiffness_.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(stiffness_, k); it;
         ++it) {
      os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
    }
  }
}

}  // namespace dpl
