#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace stcontrol {

/// Value and the partial derivatives needed by the manufactured-solution
/// machinery of a scalar field at one point (x, t).
struct Jet {
  double value = 0.0;
  double dx = 0.0;
  double dt = 0.0;
  double dxx = 0.0;
};

using ScalarField = std::function<double(double x, double t)>;
using JetField = std::function<Jet(double x, double t)>;

/// A field defined by one smooth branch per subdomain. Branch 1 is used on
/// the moving band, branch 2 outside it. Both branches must agree on the
/// interface curves.
struct PiecewiseField {
  JetField branch1;
  JetField branch2;
};

struct ZeroVelocity {};

/// v(t) = amplitude * sin(angular_frequency * t)
struct SineVelocity {
  double amplitude = 0.0;
  double angular_frequency = 0.0;
};

/// Velocity given at knots, interpolated by a cubic Hermite (modified Akima)
/// spline. Displacement has no closed form and is integrated numerically.
class TabulatedVelocity {
 public:
  TabulatedVelocity(std::vector<double> times, std::vector<double> values);

  double operator()(double t) const;
  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> times_;
  std::vector<double> values_;
  std::shared_ptr<const std::function<double(double)>> spline_;
};

using Velocity = std::variant<ZeroVelocity, SineVelocity, TabulatedVelocity>;

double velocity_at(const Velocity& v, double t);

enum class Region { inside = 1, outside = 2, interface = 0 };

/// Complete description of one moving-interface control problem on the
/// space-time cylinder (x_min, x_max) x (0, T).
///
/// The band bounded by x = offsets.first + s(t) and x = offsets.second + s(t)
/// is subdomain 1 (diffusion kappa1); the rest of the cylinder is subdomain 2.
struct ProblemSpec {
  std::string name = "custom";
  double x_min = 0.0;
  double x_max = 1.0;
  double T = 1.0;
  double kappa1 = 1.0;
  double kappa2 = 1.0;
  double eta = 1.0;
  Velocity velocity = ZeroVelocity{};
  std::pair<double, double> interface_offsets{0.4, 0.6};
  ScalarField desired_state;
  std::optional<PiecewiseField> exact_state;
  std::optional<PiecewiseField> exact_adjoint;

  double kappa(int region) const { return region == 1 ? kappa1 : kappa2; }
  bool has_exact() const { return exact_state.has_value() && exact_adjoint.has_value(); }
};

/// Throws ConfigError / GeometryError if the invariants of ProblemSpec are
/// violated (positive coefficients, a < b, interface strictly interior,
/// desired state present).
void validate(const ProblemSpec& spec);

/// s(t) = integral of v over [0, t]. Throws DomainError for t outside [0, T].
double displacement(const ProblemSpec& spec, double t);

/// Left and right interface positions at time t.
std::pair<double, double> interface_positions(const ProblemSpec& spec, double t);

Region classify_point(const ProblemSpec& spec, double x, double t);

/// Evaluates a piecewise field using the branch of the true subdomain of (x, t).
Jet evaluate(const ProblemSpec& spec, const PiecewiseField& field, double x, double t);

enum class Example1Variant { static_interface, moving_interface };

struct ExactPair {
  PiecewiseField state;
  PiecewiseField adjoint;
};

/// Closed-form optimal state and adjoint of the 1D benchmark. The `eta`
/// scales the adjoint; the interface motion is taken from `variant`.
ExactPair example1_exact(Example1Variant variant, double eta);

/// u_d = u + dp/dt + v dp/dx + kappa d2p/dx2, branch chosen by true subdomain.
/// Requires exact_state and exact_adjoint.
ScalarField derive_desired_state(const ProblemSpec& spec);

/// Preset instance ("example1-static", "example1-moving") with desired state
/// already derived.
ProblemSpec example1_problem(Example1Variant variant);
ProblemSpec make_preset(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace stcontrol
