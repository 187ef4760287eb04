#include "stcontrol/linalg.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "stcontrol/errors.hpp"

namespace stcontrol {

namespace {

using ColMajor = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using LU = Eigen::SparseLU<ColMajor, Eigen::COLAMDOrdering<int>>;

/// Column index embedded in Eigen's "... ZERO COLUMN AT n" message, or -1.
long pivot_from_message(const std::string& msg) {
  const auto pos = msg.find_last_not_of("0123456789");
  if (pos == std::string::npos || pos + 1 >= msg.size()) return -1;
  return std::stol(msg.substr(pos + 1));
}

}  // namespace

struct Factorization::Impl {
  LU lu;
};

Eigen::Index Factorization::dimension() const { return matrix_ ? matrix_->rows() : 0; }

double relative_residual(const SparseMatrix& A, const DenseVector& x, const DenseVector& b) {
  const double r = (A * x - b).norm();
  const double nb = b.norm();
  return nb > 0.0 ? r / nb : r;
}

Factorization factorize(const SparseMatrix& A) {
  if (A.rows() != A.cols()) throw SolverError("factorize: matrix is not square");
  auto impl = std::make_shared<Factorization::Impl>();
  ColMajor colmajor = A;
  colmajor.makeCompressed();
  colmajor.prune(0.0);
  // Empty rows or columns are structurally singular; SparseLU does not
  // always return on them, so they are rejected up front.
  {
    std::vector<char> row_used(static_cast<std::size_t>(A.rows()), 0);
    for (Eigen::Index c = 0; c < colmajor.outerSize(); ++c) {
      if (colmajor.outerIndexPtr()[c] == colmajor.outerIndexPtr()[c + 1])
        throw SolverError("singular matrix: empty column " + std::to_string(c), c);
      for (ColMajor::InnerIterator it(colmajor, c); it; ++it) row_used[it.row()] = 1;
    }
    for (std::size_t r = 0; r < row_used.size(); ++r)
      if (!row_used[r]) throw SolverError("singular matrix: empty row " + std::to_string(r), static_cast<long>(r));
  }
  impl->lu.analyzePattern(colmajor);
  impl->lu.factorize(colmajor);
  if (impl->lu.info() != Eigen::Success) {
    const std::string msg = impl->lu.lastErrorMessage();
    const long pivot = pivot_from_message(msg);
    throw SolverError("singular matrix: " + msg, pivot);
  }
  // SparseLU reports exact zero pivots as structural singularity; catch
  // numerically negligible pivots as well.
  const double max_a = A.nonZeros() > 0 ? A.coeffs().cwiseAbs().maxCoeff() : 0.0;
  const auto U = impl->lu.matrixU();
  double max_lu = 0.0;
  double min_pivot = std::numeric_limits<double>::infinity();
  long min_pivot_col = -1;
  {
    const auto& L = U.m_mapL;
    for (Eigen::Index k = 0; k <= L.nsuper(); ++k) {
      const Eigen::Index fsupc = L.supToCol()[k];
      const Eigen::Index nsupc = L.supToCol()[k + 1] - fsupc;
      const Eigen::Index lda = L.colIndexPtr()[fsupc + 1] - L.colIndexPtr()[fsupc];
      const Eigen::Index luptr = L.colIndexPtr()[fsupc];
      for (Eigen::Index c = 0; c < nsupc; ++c) {
        for (Eigen::Index r = 0; r < lda; ++r) max_lu = std::max(max_lu, std::abs(L.valuePtr()[luptr + c * lda + r]));
        const double d = std::abs(L.valuePtr()[luptr + c * lda + c]);
        if (d < min_pivot) {
          min_pivot = d;
          min_pivot_col = fsupc + c;
        }
      }
    }
    const auto& Umap = U.m_mapU;
    for (Eigen::Index i = 0; i < Umap.nonZeros(); ++i) max_lu = std::max(max_lu, std::abs(Umap.valuePtr()[i]));
  }
  if (A.rows() > 0 && !(min_pivot > std::numeric_limits<double>::epsilon() * max_a))
    throw SolverError("singular matrix: negligible pivot at column " + std::to_string(min_pivot_col), min_pivot_col);

  Factorization f;
  f.impl_ = std::move(impl);
  f.matrix_ = std::make_shared<const SparseMatrix>(A);
  f.growth_ = max_a > 0.0 ? max_lu / max_a : 1.0;
  return f;
}

SolveResult solve(const Factorization& F, const DenseVector& b) {
  if (!F.impl_) throw SolverError("solve: empty factorization");
  if (b.size() != F.dimension())
    throw SolverError("solve: dimension mismatch (" + std::to_string(b.size()) + " vs " +
                      std::to_string(F.dimension()) + ")");
  SolveResult out;
  out.x = F.impl_->lu.solve(b);
  out.relative_residual = relative_residual(*F.matrix_, out.x, b);
  return out;
}

DenseVector checked_solve(const Factorization& F, const DenseVector& b, double tolerance) {
  SolveResult r = solve(F, b);
  if (!(r.relative_residual <= tolerance))
    throw SolverError("solve: relative residual " + std::to_string(r.relative_residual) + " exceeds " +
                      std::to_string(tolerance));
  return std::move(r.x);
}

SolveResult solve_spd(const SparseMatrix& A, const DenseVector& b) {
  if (A.rows() != A.cols() || A.rows() != b.size()) throw SolverError("solve_spd: dimension mismatch");
  ColMajor colmajor = A;
  Eigen::SimplicialLDLT<ColMajor> ldlt(colmajor);
  if (ldlt.info() != Eigen::Success) throw SolverError("solve_spd: matrix is not positive definite");
  if (A.rows() > 0 && (ldlt.vectorD().array() <= 0.0).any())
    throw SolverError("solve_spd: matrix is not positive definite");
  SolveResult out;
  out.x = ldlt.solve(b);
  out.relative_residual = relative_residual(A, out.x, b);
  return out;
}

}  // namespace stcontrol
