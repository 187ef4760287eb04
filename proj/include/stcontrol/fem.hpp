#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "stcontrol/mesh.hpp"
#include "stcontrol/problem.hpp"
#include "stcontrol/quadrature.hpp"

namespace stcontrol {

/// Compressed row storage, sorted unique column indices per row.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;
using DenseVector = Eigen::VectorXd;
using Triplet = Eigen::Triplet<double, int>;

/// Constraint set applied to an assembled operator.
///  - none: raw operator, no boundary/initial constraints
///  - W:    zero on x = x_min and x = x_max
///  - U:    W plus zero initial values at t = 0
enum class Space { none, W, U };

/// One global dof per mesh vertex, with the constrained set of each space.
class DofMap {
 public:
  explicit DofMap(const SpaceTimeMesh& mesh);

  Eigen::Index size() const { return static_cast<Eigen::Index>(tags_.size()); }
  bool constrained(Space space, Eigen::Index i) const;
  std::vector<int> free_dofs(Space space) const;
  std::vector<int> constrained_dofs(Space space) const;
  Eigen::Index num_free(Space space) const;

  /// Zeroes the constrained entries of v in place.
  void zero_constrained(Space space, DenseVector& v) const;

 private:
  std::vector<std::uint8_t> tags_;
};

/// Affine P1 element: barycentric gradients (d/dx, d/dt) and area.
template <typename Scalar>
struct P1Element {
  using Vec2 = Eigen::Matrix<Scalar, 2, 1>;

  std::array<Vec2, 3> vertices;
  std::array<Vec2, 3> grad;
  Scalar area{};

  Vec2 map(const Eigen::Matrix<Scalar, 3, 1>& lambda) const {
    return lambda[0] * vertices[0] + lambda[1] * vertices[1] + lambda[2] * vertices[2];
  }

  /// Gradient of the P1 function with nodal values (v0, v1, v2).
  Vec2 gradient(const Eigen::Matrix<Scalar, 3, 1>& nodal) const {
    return nodal[0] * grad[0] + nodal[1] * grad[1] + nodal[2] * grad[2];
  }
};

template <typename Scalar = double>
P1Element<Scalar> p1_element(const SpaceTimeMesh& mesh, const Triangle& tri) {
  using Vec2 = typename P1Element<Scalar>::Vec2;
  P1Element<Scalar> el;
  for (int k = 0; k < 3; ++k) {
    const Point& p = mesh.vertices[tri.v[k]];
    el.vertices[k] = Vec2(Scalar(p.x), Scalar(p.t));
  }
  const Vec2 e1 = el.vertices[1] - el.vertices[0];
  const Vec2 e2 = el.vertices[2] - el.vertices[0];
  const Scalar det = e1.x() * e2.y() - e2.x() * e1.y();
  el.area = det / 2;
  // Rows of the inverse Jacobian give the gradients of lambda_1 and lambda_2.
  el.grad[1] = Vec2(e2.y(), -e2.x()) / det;
  el.grad[2] = Vec2(-e1.y(), e1.x()) / det;
  el.grad[0] = -el.grad[1] - el.grad[2];
  return el;
}

/// Nodal values of `v` on the three vertices of `tri`.
inline Eigen::Vector3d element_values(const Triangle& tri, const DenseVector& v) {
  return {v[tri.v[0]], v[tri.v[1]], v[tri.v[2]]};
}

struct AssemblyOptions {
  bool serial = true;   ///< serial mode is the bitwise reference
  int quad_subdiv = 1;  ///< 4^k sub-triangles for load/error quadrature
};

/// A[i][j] = a_h(psi_j, psi_i): time derivative, advection and kappa_h-weighted
/// spatial diffusion. Constrained rows/columns are replaced by the unit diagonal.
SparseMatrix assemble_state_matrix(const SpaceTimeMesh& mesh, const ProblemSpec& spec, const DofMap& dofs,
                                   Space space = Space::U, const AssemblyOptions& opts = {});

/// K[i][j] = sum over elements of kappa_h dpsi_j/dx dpsi_i/dx.
SparseMatrix assemble_spatial_stiffness(const SpaceTimeMesh& mesh, const ProblemSpec& spec, const DofMap& dofs,
                                        Space space = Space::W, const AssemblyOptions& opts = {});

/// Unweighted spatial stiffness (kappa = 1 everywhere).
SparseMatrix assemble_unweighted_stiffness(const SpaceTimeMesh& mesh, const DofMap& dofs, Space space = Space::W,
                                           const AssemblyOptions& opts = {});

SparseMatrix assemble_mass(const SpaceTimeMesh& mesh, const DofMap& dofs, Space space = Space::U,
                           const AssemblyOptions& opts = {});

/// b[i] = integral of field * psi_i by the degree-5 rule on 4^quad_subdiv
/// sub-triangles per element.
DenseVector assemble_load(const SpaceTimeMesh& mesh, const DofMap& dofs, const ScalarField& field,
                          Space space = Space::U, const AssemblyOptions& opts = {});

/// r[i] = sum over elements of (dw/dt)|_K * integral_K psi_i, for the P1 function w.
DenseVector assemble_time_weighted_load(const SpaceTimeMesh& mesh, const DofMap& dofs, const DenseVector& w,
                                        Space space = Space::W);

DenseVector lagrange_interpolate(const SpaceTimeMesh& mesh, const ScalarField& field);
/// Nodal values of the branch selected by the true subdomain of each vertex.
DenseVector lagrange_interpolate(const SpaceTimeMesh& mesh, const ProblemSpec& spec, const PiecewiseField& field);

/// Drops entries in constrained rows or columns and puts `diagonal` on
/// constrained diagonal positions. Masks index rows and columns respectively.
SparseMatrix apply_constraints(const SparseMatrix& raw, const DofMap& dofs, Space row_space, Space col_space,
                               double diagonal);

}  // namespace stcontrol
