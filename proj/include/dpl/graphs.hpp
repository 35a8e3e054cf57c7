#pragma once

#include <stdexcept>
#include <string>

namespace dpl {

/// Closed interval [lower, upper]; either end may be infinite.
struct Interval {
  double lower;
  double upper;

  bool contains(double r) const { return r >= lower && r <= upper; }
  bool interior(double r) const { return r > lower && r < upper; }
  std::string to_string() const;
};

/// Raised when the scalar root finder behind a resolvent fails to converge.
class ResolventError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class GraphKind { Stefan, DoubleObstacle, PowerLaw, Cubic, Identity };

/**
 * Scalar maximal monotone graph beta = d(beta_hat) with beta(0) = 0.
 *
 * The graph itself is never enumerated. Everything the solvers need goes
 * through the resolvent J_lambda = (I + lambda beta)^-1, the Yosida map
 * beta_lambda = (I - J_lambda) / lambda and the Moreau envelope
 * beta_hat_lambda. Stefan, DoubleObstacle and Identity have closed-form
 * resolvents; PowerLaw and Cubic use a safeguarded Newton/bisection.
 */
class MonotoneGraph {
 public:
  /// beta(r) = k_s r (r < 0), 0 (0 <= r <= L), k_l (r - L) (r > L).
  static MonotoneGraph stefan(double k_solid, double k_liquid, double latent);
  /// beta = subdifferential of the indicator of [0, 1].
  static MonotoneGraph double_obstacle();
  /// beta(r) = |r|^(m-1) r.
  static MonotoneGraph power_law(double exponent);
  static MonotoneGraph cubic();
  static MonotoneGraph identity();

  GraphKind kind() const { return kind_; }
  Interval domain() const;
  std::string name() const;

  double k_solid() const { return k_solid_; }
  double k_liquid() const { return k_liquid_; }
  double latent() const { return latent_; }
  double exponent() const { return exponent_; }

  /// True when beta is a single-valued, locally Lipschitz function without
  /// a plateau, so the stepper may run with lambda = 0.
  bool admits_zero_lambda() const;

  /// beta(r) for single-valued graphs. Throws std::logic_error for the
  /// double obstacle, whose graph is multivalued at 0 and 1.
  double value(double r) const;
  double value_derivative(double r) const;

  double resolvent(double lambda, double r) const;
  double yosida(double lambda, double r) const;
  /// Right-hand derivative of beta_lambda; always in [0, 1/lambda].
  double yosida_derivative(double lambda, double r) const;

  /// beta_hat(r), +inf outside D(beta).
  double potential(double r) const;
  double moreau_envelope(double lambda, double r) const;

  // lambda > 0 selects the Yosida regularization, lambda == 0 the graph
  // itself (only when admits_zero_lambda()).
  double regularized(double lambda, double r) const;
  double regularized_derivative(double lambda, double r) const;
  double regularized_potential(double lambda, double r) const;

  bool operator==(const MonotoneGraph&) const = default;

 private:
  MonotoneGraph(GraphKind kind, double k_solid, double k_liquid, double latent,
                double exponent)
      : kind_(kind),
        k_solid_(k_solid),
        k_liquid_(k_liquid),
        latent_(latent),
        exponent_(exponent) {}

  double power_resolvent(double lambda, double r) const;

  GraphKind kind_;
  double k_solid_ = 0.0;
  double k_liquid_ = 0.0;
  double latent_ = 0.0;
  double exponent_ = 1.0;
};

enum class PiKind { Zero, NegIdentity, Stefan };

/// Lipschitz perturbation pi that breaks the monotonicity of beta + eps pi.
class PiFunction {
 public:
  static PiFunction zero();
  /// pi(r) = -r.
  static PiFunction neg_identity();
  /// pi(r) = L/2 (r < 0), L/2 - r (0 <= r <= L), -L/2 (r > L).
  static PiFunction stefan(double latent);

  PiKind kind() const { return kind_; }
  double latent() const { return latent_; }
  std::string name() const;

  double value(double r) const;
  /// Right-hand derivative.
  double derivative(double r) const;
  /// Primitive pi_hat(r) = integral of pi over [0, r].
  double primitive(double r) const;
  double lipschitz_constant() const;

  bool operator==(const PiFunction&) const = default;

 private:
  PiFunction(PiKind kind, double latent) : kind_(kind), latent_(latent) {}

  PiKind kind_;
  double latent_ = 0.0;
};

/// Threshold min{1, 1/(4 L_pi^2)} below which the estimates are uniform.
double epsilon0(const PiFunction& pi);

}  // namespace dpl
