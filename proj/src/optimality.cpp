#include "stcontrol/optimality.hpp"

#include <cmath>

#include "stcontrol/errors.hpp"

namespace stcontrol {

namespace {

/// Appends `scale * block` restricted to free rows/columns, shifted to the
/// (row_offset, col_offset) position of the combined operator.
void append_block(std::vector<Triplet>& out, const SparseMatrix& block, double scale, const DofMap& dofs,
                  Space row_space, Space col_space, Eigen::Index row_offset, Eigen::Index col_offset) {
  for (int r = 0; r < block.outerSize(); ++r) {
    if (dofs.constrained(row_space, r)) continue;
    for (SparseMatrix::InnerIterator it(block, r); it; ++it)
      if (!dofs.constrained(col_space, it.col()))
        out.emplace_back(static_cast<int>(row_offset + r), static_cast<int>(col_offset + it.col()), scale * it.value());
  }
}

void append_pins(std::vector<Triplet>& out, const DofMap& dofs, Space space, double value, Eigen::Index row_offset,
                 Eigen::Index col_offset) {
  for (int i : dofs.constrained_dofs(space))
    out.emplace_back(static_cast<int>(row_offset + i), static_cast<int>(col_offset + i), value);
}

}  // namespace

BlockSystem build_block_system(std::shared_ptr<const SpaceTimeMesh> mesh, const ProblemSpec& spec,
                               const SolverOptions& options) {
  if (!mesh) throw ConfigError("build_block_system: null mesh");
  if (!spec.desired_state) throw ConfigError("build_block_system: problem has no desired state");
  BlockSystem sys{mesh, DofMap(*mesh), options.adjoint_space, spec.eta, {}, {}, {}, {}, {}};
  const SpaceTimeMesh& m = *mesh;
  const DofMap& dofs = sys.dofs;
  const Space adj = sys.adjoint_constraints();
  const Eigen::Index n = sys.n();

  const SparseMatrix A_raw = assemble_state_matrix(m, spec, dofs, Space::none, options.assembly);
  const SparseMatrix K_raw = assemble_spatial_stiffness(m, spec, dofs, Space::none, options.assembly);
  const SparseMatrix M_raw = assemble_mass(m, dofs, Space::none, options.assembly);

  sys.A = apply_constraints(A_raw, dofs, Space::U, Space::U, 1.0);
  sys.K = apply_constraints(K_raw, dofs, adj, adj, 0.0);
  sys.M = apply_constraints(M_raw, dofs, Space::U, Space::U, 0.0);

  std::vector<Triplet> entries;
  entries.reserve(2 * (A_raw.nonZeros() + K_raw.nonZeros() + M_raw.nonZeros()) + 2 * n);
  const SparseMatrix A_raw_t = A_raw.transpose();
  append_block(entries, A_raw, 1.0, dofs, adj, Space::U, 0, 0);
  append_block(entries, K_raw, 1.0 / spec.eta, dofs, adj, adj, 0, n);
  append_block(entries, M_raw, 1.0, dofs, Space::U, Space::U, n, 0);
  append_block(entries, A_raw_t, -1.0, dofs, Space::U, adj, n, n);
  if (options.adjoint_space == AdjointSpace::U_h) {
    // Identity pins on the diagonal blocks keep the exact [[A, K/eta], [M, -A^T]] form.
    append_pins(entries, dofs, Space::U, 1.0, 0, 0);
    append_pins(entries, dofs, Space::U, -1.0, n, n);
  } else {
    // Row block 1 loses only the W_h-constrained rows, which pin p; row block 2 pins u.
    append_pins(entries, dofs, Space::W, 1.0, 0, n);
    append_pins(entries, dofs, Space::U, 1.0, n, 0);
  }
  sys.op.resize(2 * n, 2 * n);
  sys.op.setFromTriplets(entries.begin(), entries.end());
  sys.op.makeCompressed();

  sys.rhs = DenseVector::Zero(2 * n);
  sys.rhs.tail(n) = assemble_load(m, dofs, spec.desired_state, Space::U, options.assembly);
  return sys;
}

DiscreteSolution solve_optimality(const BlockSystem& system, double residual_tolerance) {
  const Factorization F = factorize(system.op);
  const SolveResult r = solve(F, system.rhs);
  if (!(r.relative_residual <= residual_tolerance))
    throw SolverError("optimality system: relative residual " + std::to_string(r.relative_residual) + " exceeds " +
                      std::to_string(residual_tolerance));
  DiscreteSolution sol;
  sol.mesh = system.mesh;
  sol.u = r.x.head(system.n());
  sol.p = r.x.tail(system.n());
  sol.residual = r.relative_residual;
  // Pins are exact up to roundoff of a unit pivot; make them exact.
  system.dofs.zero_constrained(Space::U, sol.u);
  system.dofs.zero_constrained(system.adjoint_constraints(), sol.p);
  return sol;
}

DenseVector recover_control_riesz(const DiscreteSolution& sol, const ProblemSpec& spec) {
  // Adding +0.0 turns the -0.0 produced where p vanishes into +0.0, so files
  // print "0" rather than "-0".
  return (-sol.p / spec.eta).array() + 0.0;
}

DenseVector solve_riesz(const SpaceTimeMesh& mesh, const ProblemSpec& spec, const DenseVector& rhs,
                        double* relative_residual) {
  const DofMap dofs(mesh);
  if (rhs.size() != dofs.size()) throw SolverError("solve_riesz: right-hand side has wrong size");
  DenseVector b = rhs;
  dofs.zero_constrained(Space::W, b);
  const SparseMatrix K = assemble_spatial_stiffness(mesh, spec, dofs, Space::W);
  SolveResult r = solve_spd(K, b);
  if (!(r.relative_residual <= 1e-10))
    throw SolverError("solve_riesz: relative residual " + std::to_string(r.relative_residual) + " exceeds 1e-10");
  if (relative_residual) *relative_residual = r.relative_residual;
  dofs.zero_constrained(Space::W, r.x);
  return std::move(r.x);
}

double control_consistency(const BlockSystem& system, const DiscreteSolution& sol, const DenseVector& z_f) {
  const Space adj = system.adjoint_constraints();
  // Block (1,1) of the operator holds a_h on free adjoint-space rows.
  const DenseVector Au = SparseMatrix(system.op.topLeftCorner(system.n(), system.n())) * sol.u;
  const DenseVector Kz = system.K * z_f;
  double diff = 0.0, ref = 0.0;
  for (Eigen::Index i = 0; i < system.n(); ++i) {
    if (system.dofs.constrained(adj, i)) continue;
    diff += (Au[i] - Kz[i]) * (Au[i] - Kz[i]);
    ref += Kz[i] * Kz[i];
  }
  return ref > 0.0 ? std::sqrt(diff / ref) : std::sqrt(diff);
}

}  // namespace stcontrol
