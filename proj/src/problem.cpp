#include "stcontrol/problem.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/interpolators/makima.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "stcontrol/errors.hpp"

namespace stcontrol {

namespace {

constexpr double pi = std::numbers::pi;

}  // namespace

TabulatedVelocity::TabulatedVelocity(std::vector<double> times, std::vector<double> values)
    : times_(std::move(times)), values_(std::move(values)) {
  if (times_.size() != values_.size()) throw ConfigError("velocity table: times and values differ in length");
  if (times_.size() < 4) throw ConfigError("velocity table needs at least 4 knots");
  if (!std::is_sorted(times_.begin(), times_.end()) ||
      std::adjacent_find(times_.begin(), times_.end()) != times_.end())
    throw ConfigError("velocity table: knot times must be strictly increasing");
  auto spline = std::make_shared<boost::math::interpolators::makima<std::vector<double>>>(
      std::vector<double>(times_), std::vector<double>(values_));
  const double lo = times_.front();
  const double hi = times_.back();
  spline_ = std::make_shared<const std::function<double(double)>>(
      [spline, lo, hi](double t) { return (*spline)(std::clamp(t, lo, hi)); });
}

double TabulatedVelocity::operator()(double t) const { return (*spline_)(t); }

double velocity_at(const Velocity& v, double t) {
  return std::visit(
      [t](const auto& vel) -> double {
        using V = std::decay_t<decltype(vel)>;
        if constexpr (std::is_same_v<V, ZeroVelocity>) {
          return 0.0;
        } else if constexpr (std::is_same_v<V, SineVelocity>) {
          return vel.amplitude * std::sin(vel.angular_frequency * t);
        } else {
          return vel(t);
        }
      },
      v);
}

double displacement(const ProblemSpec& spec, double t) {
  if (!(t >= 0.0 && t <= spec.T)) throw DomainError("displacement: t = " + std::to_string(t) + " outside [0, T]");
  return std::visit(
      [t](const auto& vel) -> double {
        using V = std::decay_t<decltype(vel)>;
        if constexpr (std::is_same_v<V, ZeroVelocity>) {
          return 0.0;
        } else if constexpr (std::is_same_v<V, SineVelocity>) {
          if (vel.angular_frequency == 0.0) return 0.0;
          return vel.amplitude / vel.angular_frequency * (1.0 - std::cos(vel.angular_frequency * t));
        } else {
          // The spline is a cubic between knots. One Gauss-Kronrod 15/31 pair per
          // knot interval is exact there; the Gauss/Kronrod gap is the error
          // estimate. Recursive bisection added nothing but noisy estimates.
          std::vector<double> breaks{0.0};
          for (double knot : vel.times())
            if (knot > 0.0 && knot < t) breaks.push_back(knot);
          breaks.push_back(t);
          double s = 0.0;
          for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
            double err = 0.0;
            s += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
                [&vel](double tau) { return vel(tau); }, breaks[k], breaks[k + 1], 0, 1e-12, &err);
            if (err > 1e-12) throw DomainError("displacement: quadrature did not reach 1e-12");
          }
          return s;
        }
      },
      spec.velocity);
}

std::pair<double, double> interface_positions(const ProblemSpec& spec, double t) {
  const double s = displacement(spec, t);
  return {spec.interface_offsets.first + s, spec.interface_offsets.second + s};
}

Region classify_point(const ProblemSpec& spec, double x, double t) {
  const auto [left, right] = interface_positions(spec, t);
  const double tol = 1e-12 * (spec.x_max - spec.x_min);
  if (std::abs(x - left) <= tol || std::abs(x - right) <= tol) return Region::interface;
  return (left < x && x < right) ? Region::inside : Region::outside;
}

Jet evaluate(const ProblemSpec& spec, const PiecewiseField& field, double x, double t) {
  return classify_point(spec, x, t) == Region::outside ? field.branch2(x, t) : field.branch1(x, t);
}

void validate(const ProblemSpec& spec) {
  if (!(spec.kappa1 > 0.0) || !(spec.kappa2 > 0.0)) throw ConfigError("diffusion coefficients must be positive");
  if (!(spec.eta > 0.0)) throw ConfigError("regularization parameter eta must be positive");
  if (!(spec.T > 0.0)) throw ConfigError("final time T must be positive");
  if (!(spec.x_min < spec.x_max)) throw ConfigError("x_min must be smaller than x_max");
  if (!(spec.interface_offsets.first < spec.interface_offsets.second))
    throw GeometryError("interface offsets must satisfy a < b");
  if (!spec.desired_state) throw ConfigError("desired state is missing");
  constexpr int samples = 2000;
  for (int k = 0; k <= samples; ++k) {
    const double t = spec.T * k / samples;
    const auto [left, right] = interface_positions(spec, t);
    if (!(spec.x_min < left && right < spec.x_max))
      throw GeometryError("interface leaves the spatial interval at t = " + std::to_string(t));
  }
}

ExactPair example1_exact(Example1Variant variant, double eta) {
  if (!(eta > 0.0)) throw ConfigError("eta must be positive");
  const bool moving = variant == Example1Variant::moving_interface;
  // v = 0.1 pi sin(2 pi t), s = 0.05 (1 - cos 2 pi t)
  auto s_of = [moving](double t) { return moving ? 0.05 * (1.0 - std::cos(2.0 * pi * t)) : 0.0; };
  auto v_of = [moving](double t) { return moving ? 0.1 * pi * std::sin(2.0 * pi * t) : 0.0; };

  // w = sin(k (x - s) - phase) + sin(10 pi s + 23 pi / 6); returns w, w_x, w_t, w_xx.
  auto make_w = [=](double k, double phase) {
    return [=](double x, double t) {
      const double s = s_of(t);
      const double v = v_of(t);
      const double a = k * (x - s) - phase;
      const double b = 10.0 * pi * s + 23.0 * pi / 6.0;
      Jet w;
      w.value = std::sin(a) + std::sin(b);
      w.dx = k * std::cos(a);
      w.dxx = -k * k * std::sin(a);
      w.dt = -k * v * std::cos(a) + 10.0 * pi * v * std::cos(b);
      return w;
    };
  };
  const auto w1 = make_w(20.0 * pi, 47.0 * pi / 6.0);
  const auto w2 = make_w(10.0 * pi, 23.0 * pi / 6.0);

  auto state = [](auto w) -> JetField {
    return [w](double x, double t) {
      const Jet wj = w(x, t);
      const double g = std::sin(pi * t / 2.0);
      const double gt = 0.5 * pi * std::cos(pi * t / 2.0);
      return Jet{wj.value * g, wj.dx * g, wj.dt * g + wj.value * gt, wj.dxx * g};
    };
  };
  // sin((pi - pi t) / 2) = cos(pi t / 2)
  auto adjoint = [eta](auto w) -> JetField {
    return [w, eta](double x, double t) {
      const Jet wj = w(x, t);
      const double g = std::sin((pi - pi * t) / 2.0);
      const double gt = -0.5 * pi * std::cos((pi - pi * t) / 2.0);
      return Jet{-eta * wj.value * g, -eta * wj.dx * g, -eta * (wj.dt * g + wj.value * gt), -eta * wj.dxx * g};
    };
  };
  return ExactPair{PiecewiseField{state(w1), state(w2)}, PiecewiseField{adjoint(w1), adjoint(w2)}};
}

ScalarField derive_desired_state(const ProblemSpec& spec) {
  if (!spec.has_exact()) throw ConfigError("derive_desired_state needs exact state and adjoint");
  // Captured by value: the returned field must outlive `spec`.
  const ProblemSpec geometry = [&] {
    ProblemSpec g = spec;
    g.desired_state = nullptr;
    return g;
  }();
  return [geometry](double x, double t) {
    const Region region = classify_point(geometry, x, t);
    const bool outside = region == Region::outside;
    const Jet u = outside ? geometry.exact_state->branch2(x, t) : geometry.exact_state->branch1(x, t);
    const Jet p = outside ? geometry.exact_adjoint->branch2(x, t) : geometry.exact_adjoint->branch1(x, t);
    const double kappa = outside ? geometry.kappa2 : geometry.kappa1;
    return u.value + p.dt + velocity_at(geometry.velocity, t) * p.dx + kappa * p.dxx;
  };
}

ProblemSpec example1_problem(Example1Variant variant) {
  ProblemSpec spec;
  const bool moving = variant == Example1Variant::moving_interface;
  spec.name = moving ? "example1-moving" : "example1-static";
  spec.x_min = 0.0;
  spec.x_max = 1.0;
  spec.T = 1.0;
  spec.kappa1 = 0.5;
  spec.kappa2 = 1.0;
  spec.eta = 1e-6;
  spec.interface_offsets = {0.4, 0.6};
  if (moving) spec.velocity = SineVelocity{0.1 * pi, 2.0 * pi};
  ExactPair exact = example1_exact(variant, spec.eta);
  spec.exact_state = std::move(exact.state);
  spec.exact_adjoint = std::move(exact.adjoint);
  spec.desired_state = derive_desired_state(spec);
  return spec;
}

std::vector<std::string> preset_names() { return {"example1-static", "example1-moving"}; }

ProblemSpec make_preset(const std::string& name) {
  if (name == "example1-static") return example1_problem(Example1Variant::static_interface);
  if (name == "example1-moving") return example1_problem(Example1Variant::moving_interface);
  throw ConfigError("unknown preset '" + name + "'");
}

}  // namespace stcontrol
