#pragma once

#include <memory>

#include "stcontrol/fem.hpp"

namespace stcontrol {

struct SolveResult {
  DenseVector x;
  double relative_residual = 0.0;  ///< ||A x - b|| / ||b||, or ||A x|| when b = 0
};

/// Sparse LU with partial pivoting and COLAMD fill-reducing ordering.
/// Immutable once built; concurrent solves are allowed.
class Factorization {
 public:
  Eigen::Index dimension() const;
  /// max |entry of L or U| / max |entry of A|
  double pivot_growth() const { return growth_; }
  const SparseMatrix& matrix() const { return *matrix_; }

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
  std::shared_ptr<const SparseMatrix> matrix_;
  double growth_ = 1.0;

  friend Factorization factorize(const SparseMatrix& A);
  friend SolveResult solve(const Factorization& F, const DenseVector& b);
};

/// Throws SolverError on structural or numerical singularity.
Factorization factorize(const SparseMatrix& A);
SolveResult solve(const Factorization& F, const DenseVector& b);

/// Solves and throws SolverError if the relative residual exceeds `tolerance`.
DenseVector checked_solve(const Factorization& F, const DenseVector& b, double tolerance = 1e-8);

/// Symmetric positive definite solve (sparse LDL^T).
SolveResult solve_spd(const SparseMatrix& A, const DenseVector& b);

double relative_residual(const SparseMatrix& A, const DenseVector& x, const DenseVector& b);

}  // namespace stcontrol
