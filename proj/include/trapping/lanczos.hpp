#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "trapping/error.hpp"

namespace trapping {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Iteration budget exhausted. Carries the best Ritz pair seen so far.
class ConvergenceError : public NumericalFailure {
 public:
  ConvergenceError(const std::string& what, double value, Eigen::VectorXd vector, double residual)
      : NumericalFailure(what), best_value(value), best_vector(std::move(vector)),
        best_residual(residual) {}

  double best_value;
  Eigen::VectorXd best_vector;
  double best_residual;
};

struct LanczosResult {
  std::vector<double> values;       ///< ascending
  Eigen::MatrixXd vectors;          ///< one column per value
  std::vector<double> residuals;    ///< ||A y - theta y||
  int iterations = 0;
};

/// The k lowest eigenpairs of the symmetric matrix A.
///
/// Lanczos with full reorthogonalization. Converged Ritz pairs are locked and
/// the iteration restarts from a fresh random vector orthogonal to them; a
/// restart that turns up a value at or below the current k-th one means a
/// repeated eigenvalue was missed, so it is locked too. With
/// `verify_multiplicity` off a single sweep is trusted, which is right when the
/// wanted eigenvalues are known to be simple.
///
/// Ritz pairs count as converged once ||A y - theta y|| <= abs_tol. Throws
/// ConvergenceError when max_iter matrix-vector products do not suffice.
LanczosResult lanczos_lowest(const SparseMatrix& A, int k, double abs_tol, int max_iter,
                             std::uint64_t seed, bool verify_multiplicity = true);

/// Smallest eigenpair by inverse iteration with a shift below the spectrum of
/// the positive-semidefinite A.
LanczosResult inverse_iteration_lowest(const SparseMatrix& A, double abs_tol, int max_iter);

}  // namespace trapping
