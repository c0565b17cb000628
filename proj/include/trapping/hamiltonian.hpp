#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "trapping/lanczos.hpp"
#include "trapping/random_media.hpp"

namespace trapping {

enum class BoundaryCondition { kDirichlet, kNeumann };

std::string_view to_string(BoundaryCondition bc);
BoundaryCondition parse_boundary(std::string_view name);

/// H = -kappa Laplacian + V on the active (non hard-trap) sites of a window.
///
/// The quadratic form is
///   <f, H f> = J sum_{active edges} (f(x) - f(y))^2 + J sum_{killed edges} f(x)^2
///              + sum_x V(x) f(x)^2,
/// with jump rate J = kappa / h^2. An edge is killed when it leads to a hard
/// trap, or, under Dirichlet conditions, out of the window. Neumann conditions
/// drop edges leaving the window.
class OperatorHandle {
 public:
  OperatorHandle(PotentialField potential, BoundaryCondition bc, double kappa);

  const PotentialField& potential() const { return potential_; }
  const Window& window() const { return potential_.window(); }
  BoundaryCondition bc() const { return bc_; }
  double kappa() const { return kappa_; }
  double jump_rate() const { return jump_; }

  /// Number of active sites (matrix dimension).
  std::size_t dimension() const { return active_.size(); }
  /// Field index of each active site, increasing.
  const std::vector<std::size_t>& active_sites() const { return active_; }
  /// Active index of site x, or -1 when x is outside the window or hard.
  std::ptrdiff_t active_index(const Site& x) const;

  const SparseMatrix& matrix() const { return matrix_; }
  Eigen::VectorXd apply(const Eigen::VectorXd& f) const { return matrix_ * f; }
  double quadratic_form(const Eigen::VectorXd& f) const { return f.dot(matrix_ * f); }

  /// Connected components of the active set (active indices, each sorted),
  /// ordered by their smallest index.
  const std::vector<std::vector<int>>& components() const { return components_; }
  /// Restriction of the matrix to one component, in that component's order.
  SparseMatrix component_matrix(std::size_t c) const;
  /// Max absolute row sum.
  double norm_bound() const { return norm_bound_; }

  /// "%%MatrixMarket" banner, "rows cols nnz", then 1-based triples.
  void write_matrix_market(std::ostream& os) const;

 private:
  PotentialField potential_;
  BoundaryCondition bc_;
  double kappa_;
  double jump_;
  std::vector<std::size_t> active_;
  std::vector<std::ptrdiff_t> site_to_active_;
  SparseMatrix matrix_;
  std::vector<std::vector<int>> components_;
  double norm_bound_ = 0.0;
};

/// Throws FullyTrapped when every site is a hard trap.
OperatorHandle assemble(const PotentialField& potential, BoundaryCondition bc, double kappa);

struct Eigenpair {
  double value = 0.0;
  Eigen::VectorXd vector;  ///< over active sites, unit norm, nonnegative for principal pairs
  double residual = 0.0;   ///< ||H v - value v||
};

struct SolverOptions {
  enum class Method { kAuto, kDense, kLanczos };

  /// Residual tolerance relative to max(1, norm_bound()).
  double tol = 1e-9;
  /// Matrix-vector product budget; 0 means 10 * dimension.
  int max_iter = 0;
  /// Components up to this size are diagonalized densely under kAuto.
  std::size_t dense_limit = 256;
  Method method = Method::kAuto;
  std::uint64_t start_seed = 0x5eed;
};

/// Smallest eigenvalue and a nonnegative unit eigenvector. With several
/// components the global minimum wins; ties go to the lowest component.
/// Throws ConvergenceError on iteration exhaustion.
Eigenpair principal_eigenpair(const OperatorHandle& H, const SolverOptions& opts = {});

/// The k smallest eigenvalues, ascending, counted with multiplicity.
std::vector<double> lowest_eigenvalues(const OperatorHandle& H, int k,
                                       const SolverOptions& opts = {});

/// <f, H f> / <f, f>.
double rayleigh_quotient(const OperatorHandle& H, const Eigen::VectorXd& f);

struct DenseSpectrum {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

/// Full eigendecomposition of a symmetric sparse matrix.
DenseSpectrum dense_spectrum(const SparseMatrix& A, bool want_vectors = true);

/// Variational upper bound for the Dirichlet principal eigenvalue of the
/// window of `neumann`, from the trial function rho * phi where phi is the
/// Neumann principal eigenvector and rho is a per-axis product of ramps: 1 at
/// depth >= eps * side from the boundary, decreasing linearly to 0 at the
/// exterior sites.
double cutoff_transfer(const OperatorHandle& neumann, const Eigenpair& phi_neumann, double eps);

/// The ramp used by cutoff_transfer, evaluated on every site of `window`.
std::vector<double> cutoff_profile(const Window& window, double eps);

}  // namespace trapping
