#pragma once

#include <memory>

#include "stcontrol/fem.hpp"
#include "stcontrol/linalg.hpp"

namespace stcontrol {

/// Trial space of the adjoint (and test space of the state row).
enum class AdjointSpace { U_h, W_h };

struct SolverOptions {
  AdjointSpace adjoint_space = AdjointSpace::U_h;
  AssemblyOptions assembly;
  double residual_tolerance = 1e-8;
};

/// Coupled state-adjoint operator
///
///   [ A   K/eta ] [u]   [ 0  ]
///   [ M   -A^T  ] [p] = [ b_d]
///
/// with unknowns ordered [u; p] over the full vertex set of each field.
/// Row block 1 is tested with the adjoint space, row block 2 with U_h.
/// Constrained unknowns are pinned to zero by (signed) identity rows.
struct BlockSystem {
  std::shared_ptr<const SpaceTimeMesh> mesh;
  DofMap dofs;
  AdjointSpace adjoint_space = AdjointSpace::U_h;
  double eta = 1.0;

  SparseMatrix A;  ///< a_h with U_h rows/columns eliminated (unit diagonal)
  SparseMatrix K;  ///< kappa_h spatial stiffness, constrained rows/columns zeroed
  SparseMatrix M;  ///< mass, constrained rows/columns zeroed
  SparseMatrix op;
  DenseVector rhs;

  Eigen::Index n() const { return dofs.size(); }
  Space adjoint_constraints() const { return adjoint_space == AdjointSpace::U_h ? Space::U : Space::W; }
};

struct DiscreteSolution {
  std::shared_ptr<const SpaceTimeMesh> mesh;
  DenseVector u;
  DenseVector p;
  double residual = 0.0;
};

BlockSystem build_block_system(std::shared_ptr<const SpaceTimeMesh> mesh, const ProblemSpec& spec,
                               const SolverOptions& options = {});

/// Throws SolverError on a singular operator or a residual above tolerance.
DiscreteSolution solve_optimality(const BlockSystem& system, double residual_tolerance = 1e-8);

/// Riesz representative of the optimal control: z_f = -p / eta.
DenseVector recover_control_riesz(const DiscreteSolution& sol, const ProblemSpec& spec);

/// Solves the discrete Riesz problem K z = rhs on W_h.
DenseVector solve_riesz(const SpaceTimeMesh& mesh, const ProblemSpec& spec, const DenseVector& rhs,
                        double* relative_residual = nullptr);

/// ||(A u - K z_f)_free|| / ||(K z_f)_free|| over the free rows of block row 1.
/// Bounds the max-norm version of the same ratio from above.
double control_consistency(const BlockSystem& system, const DiscreteSolution& sol, const DenseVector& z_f);

}  // namespace stcontrol
