#include "dpl/graphs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace dpl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRootTol = 1e-14;
constexpr int kRootMaxIter = 200;

void require_positive_lambda(double lambda) {
  if (!(lambda > 0.0)) {
    throw std::invalid_argument("Yosida parameter lambda must be positive");
  }
}

double signed_power(double r, double m) {
  return std::copysign(std::pow(std::abs(r), m), r);
}

std::string format_number(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << x;
  return os.str();
}

}  // namespace

std::string Interval::to_string() const {
  return "[" + format_number(lower) + "," + format_number(upper) + "]";
}

MonotoneGraph MonotoneGraph::stefan(double k_solid, double k_liquid,
                                    double latent) {
  if (!(k_solid > 0.0) || !(k_liquid > 0.0) || !(latent > 0.0)) {
    throw std::invalid_argument(
        "Stefan graph needs positive conductivities and latent heat");
  }
  return MonotoneGraph(GraphKind::Stefan, k_solid, k_liquid, latent, 1.0);
}

MonotoneGraph MonotoneGraph::double_obstacle() {
  return MonotoneGraph(GraphKind::DoubleObstacle, 0.0, 0.0, 0.0, 1.0);
}

MonotoneGraph MonotoneGraph::power_law(double exponent) {
  if (!(exponent > 0.0)) {
    throw std::invalid_argument("power-law exponent must be positive");
  }
  return MonotoneGraph(GraphKind::PowerLaw, 0.0, 0.0, 0.0, exponent);
}

MonotoneGraph MonotoneGraph::cubic() {
  return MonotoneGraph(GraphKind::Cubic, 0.0, 0.0, 0.0, 3.0);
}

MonotoneGraph MonotoneGraph::identity() {
  return MonotoneGraph(GraphKind::Identity, 0.0, 0.0, 0.0, 1.0);
}

Interval MonotoneGraph::domain() const {
  if (kind_ == GraphKind::DoubleObstacle) return {0.0, 1.0};
  return {-kInf, kInf};
}

std::string MonotoneGraph::name() const {
  switch (kind_) {
    case GraphKind::Stefan:
      return "stefan";
    case GraphKind::DoubleObstacle:
      return "double-obstacle";
    case GraphKind::PowerLaw:
      return "power-law";
    case GraphKind::Cubic:
      return "cubic";
    case GraphKind::Identity:
      return "identity";
  }
  return "unknown";
}

bool MonotoneGraph::admits_zero_lambda() const {
  switch (kind_) {
    case GraphKind::Identity:
    case GraphKind::Cubic:
      return true;
    case GraphKind::PowerLaw:
      return exponent_ >= 1.0;
    case GraphKind::Stefan:
    case GraphKind::DoubleObstacle:
      return false;
  }
  return false;
}

double MonotoneGraph::value(double r) const {
  switch (kind_) {
    case GraphKind::Stefan:
      if (r < 0.0) return k_solid_ * r;
      if (r <= latent_) return 0.0;
      return k_liquid_ * (r - latent_);
    case GraphKind::DoubleObstacle:
      throw std::logic_error("double obstacle graph is multivalued");
    case GraphKind::PowerLaw:
    case GraphKind::Cubic:
      return signed_power(r, exponent_);
    case GraphKind::Identity:
      return r;
  }
  return 0.0;
}

double MonotoneGraph::value_derivative(double r) const {
  switch (kind_) {
    case GraphKind::Stefan:
      if (r < 0.0) return k_solid_;
      if (r < latent_) return 0.0;
      return k_liquid_;
    case GraphKind::DoubleObstacle:
      throw std::logic_error("double obstacle graph is multivalued");
    case GraphKind::PowerLaw:
    case GraphKind::Cubic:
      if (r == 0.0) {
        if (exponent_ > 1.0) return 0.0;
        if (exponent_ == 1.0) return 1.0;
        return kInf;
      }
      return exponent_ * std::pow(std::abs(r), exponent_ - 1.0);
    case GraphKind::Identity:
      return 1.0;
  }
  return 0.0;
}

// Solves p + lambda |p|^(m-1) p = r. The solution lies between 0 and r, so
// Newton steps that leave the bracket are replaced by bisection.
double MonotoneGraph::power_resolvent(double lambda, double r) const {
  if (r == 0.0) return 0.0;
  const double m = exponent_;
  double lo = std::min(0.0, r);
  double hi = std::max(0.0, r);
  auto residual = [&](double p) { return p + lambda * signed_power(p, m) - r; };
  double p = r / (1.0 + lambda);
  if (p <= lo || p >= hi) p = 0.5 * (lo + hi);
  const double scale = std::max(1.0, std::abs(r));
  for (int it = 0; it < kRootMaxIter; ++it) {
    const double h = residual(p);
    if (h == 0.0) return p;
    if (h > 0.0) {
      hi = p;
    } else {
      lo = p;
    }
    if (hi - lo <= kRootTol * scale) return 0.5 * (lo + hi);
    const double slope =
        1.0 + lambda * m * std::pow(std::abs(p), m - 1.0);
    double next = p - h / slope;
    if (!std::isfinite(next) || next <= lo || next >= hi) {
      next = 0.5 * (lo + hi);
    }
    if (std::abs(next - p) <= kRootTol * scale) return next;
    p = next;
  }
  throw ResolventError("power-law resolvent did not converge for r = " +
                       format_number(r));
}

double MonotoneGraph::resolvent(double lambda, double r) const {
  require_positive_lambda(lambda);
  switch (kind_) {
    case GraphKind::Stefan:
      if (r < 0.0) return r / (1.0 + lambda * k_solid_);
      if (r <= latent_) return r;
      return (r + lambda * k_liquid_ * latent_) / (1.0 + lambda * k_liquid_);
    case GraphKind::DoubleObstacle:
      return std::clamp(r, 0.0, 1.0);
    case GraphKind::PowerLaw:
    case GraphKind::Cubic:
      return power_resolvent(lambda, r);
    case GraphKind::Identity:
      return r / (1.0 + lambda);
  }
  return r;
}

double MonotoneGraph::yosida(double lambda, double r) const {
  return (r - resolvent(lambda, r)) / lambda;
}

double MonotoneGraph::yosida_derivative(double lambda, double r) const {
  require_positive_lambda(lambda);
  switch (kind_) {
    case GraphKind::Stefan:
      if (r < 0.0) return k_solid_ / (1.0 + lambda * k_solid_);
      if (r < latent_) return 0.0;
      return k_liquid_ / (1.0 + lambda * k_liquid_);
    case GraphKind::DoubleObstacle:
      return (r < 0.0 || r >= 1.0) ? 1.0 / lambda : 0.0;
    case GraphKind::PowerLaw:
    case GraphKind::Cubic: {
      // d/dr beta_lambda = beta'(p) / (1 + lambda beta'(p)) at p = J r.
      const double slope = value_derivative(resolvent(lambda, r));
      if (std::isinf(slope)) return 1.0 / lambda;
      return slope / (1.0 + lambda * slope);
    }
    case GraphKind::Identity:
      return 1.0 / (1.0 + lambda);
  }
  return 0.0;
}

double MonotoneGraph::potential(double r) const {
  switch (kind_) {
    case GraphKind::Stefan:
      if (r < 0.0) return 0.5 * k_solid_ * r * r;
      if (r <= latent_) return 0.0;
      return 0.5 * k_liquid_ * (r - latent_) * (r - latent_);
    case GraphKind::DoubleObstacle:
      return (r >= 0.0 && r <= 1.0) ? 0.0 : kInf;
    case GraphKind::PowerLaw:
    case GraphKind::Cubic:
      return std::pow(std::abs(r), exponent_ + 1.0) / (exponent_ + 1.0);
    case GraphKind::Identity:
      return 0.5 * r * r;
  }
  return 0.0;
}

double MonotoneGraph::moreau_envelope(double lambda, double r) const {
  const double p = resolvent(lambda, r);
  return (r - p) * (r - p) / (2.0 * lambda) + potential(p);
}

double MonotoneGraph::regularized(double lambda, double r) const {
  if (lambda > 0.0) return yosida(lambda, r);
  if (lambda == 0.0 && admits_zero_lambda()) return value(r);
  throw std::invalid_argument("graph " + name() + " requires lambda > 0");
}

double MonotoneGraph::regularized_derivative(double lambda, double r) const {
  if (lambda > 0.0) return yosida_derivative(lambda, r);
  if (lambda == 0.0 && admits_zero_lambda()) return value_derivative(r);
  throw std::invalid_argument("graph " + name() + " requires lambda > 0");
}

double MonotoneGraph::regularized_potential(double lambda, double r) const {
  if (lambda > 0.0) return moreau_envelope(lambda, r);
  if (lambda == 0.0 && admits_zero_lambda()) return potential(r);
  throw std::invalid_argument("graph " + name() + " requires lambda > 0");
}

PiFunction PiFunction::zero() { return PiFunction(PiKind::Zero, 0.0); }

PiFunction PiFunction::neg_identity() {
  return PiFunction(PiKind::NegIdentity, 0.0);
}

PiFunction PiFunction::stefan(double latent) {
  if (!(latent > 0.0)) {
    throw std::invalid_argument("Stefan pi needs a positive latent heat");
  }
  return PiFunction(PiKind::Stefan, latent);
}

std::string PiFunction::name() const {
  switch (kind_) {
    case PiKind::Zero:
      return "zero";
    case PiKind::NegIdentity:
      return "neg-identity";
    case PiKind::Stefan:
      return "stefan";
  }
  return "unknown";
}

double PiFunction::value(double r) const {
  switch (kind_) {
    case PiKind::Zero:
      return 0.0;
    case PiKind::NegIdentity:
      return -r;
    case PiKind::Stefan:
      if (r < 0.0) return 0.5 * latent_;
      if (r <= latent_) return 0.5 * latent_ - r;
      return -0.5 * latent_;
  }
  return 0.0;
}

double PiFunction::derivative(double r) const {
  switch (kind_) {
    case PiKind::Zero:
      return 0.0;
    case PiKind::NegIdentity:
      return -1.0;
    case PiKind::Stefan:
      return (r >= 0.0 && r < latent_) ? -1.0 : 0.0;
  }
  return 0.0;
}

double PiFunction::primitive(double r) const {
  switch (kind_) {
    case PiKind::Zero:
      return 0.0;
    case PiKind::NegIdentity:
      return -0.5 * r * r;
    case PiKind::Stefan:
      if (r < 0.0) return 0.5 * latent_ * r;
      if (r <= latent_) return 0.5 * latent_ * r - 0.5 * r * r;
      return -0.5 * latent_ * (r - latent_);
  }
  return 0.0;
}

double PiFunction::lipschitz_constant() const {
  return kind_ == PiKind::Zero ? 0.0 : 1.0;
}

double epsilon0(const PiFunction& pi) {
  const double lip = pi.lipschitz_constant();
  if (lip == 0.0) return 1.0;
  return std::min(1.0, 1.0 / (4.0 * lip * lip));
}

}  // namespace dpl
