#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace stcontrol {

/// Quadrature on a triangle in barycentric coordinates. Weights sum to one
/// and are multiplied by the element area at use.
template <typename Scalar>
struct QuadratureRule {
  using Barycentric = Eigen::Matrix<Scalar, 3, 1>;

  std::vector<Barycentric> points;
  std::vector<Scalar> weights;
  int degree = 0;

  std::size_t size() const { return points.size(); }
};

/// Exact for degree 1.
template <typename Scalar = double>
QuadratureRule<Scalar> centroid_rule() {
  QuadratureRule<Scalar> rule;
  rule.points.push_back({Scalar(1) / 3, Scalar(1) / 3, Scalar(1) / 3});
  rule.weights.push_back(Scalar(1));
  rule.degree = 1;
  return rule;
}

/// Three interior points, exact for degree 2.
template <typename Scalar = double>
QuadratureRule<Scalar> degree2_rule() {
  QuadratureRule<Scalar> rule;
  const Scalar a = Scalar(2) / 3, b = Scalar(1) / 6;
  rule.points = {{a, b, b}, {b, a, b}, {b, b, a}};
  rule.weights = {Scalar(1) / 3, Scalar(1) / 3, Scalar(1) / 3};
  rule.degree = 2;
  return rule;
}

/// Seven-point rule exact for degree 5.
template <typename Scalar = double>
QuadratureRule<Scalar> degree5_rule() {
  using std::sqrt;
  QuadratureRule<Scalar> rule;
  const Scalar r15 = sqrt(Scalar(15));
  const Scalar a = (Scalar(6) - r15) / 21;
  const Scalar b = (Scalar(6) + r15) / 21;
  const Scalar wa = (Scalar(155) - r15) / 1200;
  const Scalar wb = (Scalar(155) + r15) / 1200;
  const Scalar third = Scalar(1) / 3;
  rule.points = {{third, third, third},
                 {a, a, 1 - 2 * a}, {a, 1 - 2 * a, a}, {1 - 2 * a, a, a},
                 {b, b, 1 - 2 * b}, {b, 1 - 2 * b, b}, {1 - 2 * b, b, b}};
  rule.weights = {Scalar(9) / 40, wa, wa, wa, wb, wb, wb};
  rule.degree = 5;
  return rule;
}

/// Composite rule over the 4^levels congruent sub-triangles obtained by
/// repeated midpoint refinement. Points stay in parent barycentrics.
template <typename Scalar>
QuadratureRule<Scalar> subdivided(const QuadratureRule<Scalar>& base, int levels) {
  if (levels < 0) throw std::invalid_argument("subdivided: negative level");
  using Bary = typename QuadratureRule<Scalar>::Barycentric;
  std::vector<std::array<Bary, 3>> cells{{Bary(1, 0, 0), Bary(0, 1, 0), Bary(0, 0, 1)}};
  for (int level = 0; level < levels; ++level) {
    std::vector<std::array<Bary, 3>> next;
    next.reserve(cells.size() * 4);
    for (const auto& c : cells) {
      const Bary m01 = (c[0] + c[1]) / 2, m12 = (c[1] + c[2]) / 2, m20 = (c[2] + c[0]) / 2;
      next.push_back({c[0], m01, m20});
      next.push_back({m01, c[1], m12});
      next.push_back({m20, m12, c[2]});
      next.push_back({m12, m20, m01});
    }
    cells = std::move(next);
  }
  QuadratureRule<Scalar> rule;
  rule.degree = base.degree;
  const Scalar scale = Scalar(1) / static_cast<Scalar>(cells.size());
  for (const auto& c : cells) {
    for (std::size_t q = 0; q < base.size(); ++q) {
      const Bary& l = base.points[q];
      rule.points.push_back(l[0] * c[0] + l[1] * c[1] + l[2] * c[2]);
      rule.weights.push_back(base.weights[q] * scale);
    }
  }
  return rule;
}

}  // namespace stcontrol
