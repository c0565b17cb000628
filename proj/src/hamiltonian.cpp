#include "trapping/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "trapping/error.hpp"
#include "trapping/io.hpp"

namespace trapping {

std::string_view to_string(BoundaryCondition bc) {
  return bc == BoundaryCondition::kDirichlet ? "dirichlet" : "neumann";
}

BoundaryCondition parse_boundary(std::string_view name) {
  if (name == "dirichlet" || name == "D") return BoundaryCondition::kDirichlet;
  if (name == "neumann" || name == "N") return BoundaryCondition::kNeumann;
  throw InvalidArgument("unknown boundary condition '" + std::string(name) +
                        "' (expected dirichlet or neumann)");
}

OperatorHandle::OperatorHandle(PotentialField potential, BoundaryCondition bc, double kappa)
    : potential_(std::move(potential)), bc_(bc), kappa_(kappa) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw InvalidArgument("kappa must be positive");
  const Window& w = potential_.window();
  jump_ = kappa / (w.h * w.h);
  const std::size_t n = w.site_count();
  site_to_active_.assign(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    if (potential_[i] != kInfinity) {
      site_to_active_[i] = static_cast<std::ptrdiff_t>(active_.size());
      active_.push_back(i);
    }
  }
  if (active_.empty()) throw FullyTrapped();

  const int m = static_cast<int>(active_.size());
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(m) * (2 * w.d + 1));
  std::vector<std::vector<int>> adj(m);
  for (int a = 0; a < m; ++a) {
    const Site x = w.site(active_[a]);
    double diag = potential_[active_[a]];
    for (int axis = 0; axis < w.d; ++axis) {
      for (int step : {-1, 1}) {
        Site y = x;
        y[axis] += step;
        if (!w.contains(y)) {
          if (bc_ == BoundaryCondition::kDirichlet) diag += jump_;
          continue;
        }
        const std::ptrdiff_t b = site_to_active_[w.index(y)];
        diag += jump_;
        if (b >= 0) {
          trips.emplace_back(a, static_cast<int>(b), -jump_);
          adj[a].push_back(static_cast<int>(b));
        }
      }
    }
    trips.emplace_back(a, a, diag);
  }
  matrix_.resize(m, m);
  matrix_.setFromTriplets(trips.begin(), trips.end());
  matrix_.makeCompressed();

  for (int r = 0; r < m; ++r) {
    double s = 0.0;
    for (SparseMatrix::InnerIterator it(matrix_, r); it; ++it) s += std::abs(it.value());
    norm_bound_ = std::max(norm_bound_, s);
  }

  std::vector<int> label(m, -1);
  for (int start = 0; start < m; ++start) {
    if (label[start] >= 0) continue;
    const int c = static_cast<int>(components_.size());
    std::vector<int> comp{start};
    label[start] = c;
    for (std::size_t head = 0; head < comp.size(); ++head) {
      for (int nb : adj[comp[head]]) {
        if (label[nb] < 0) {
          label[nb] = c;
          comp.push_back(nb);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    components_.push_back(std::move(comp));
  }
}

std::ptrdiff_t OperatorHandle::active_index(const Site& x) const {
  if (!window().contains(x)) return -1;
  return site_to_active_[window().index(x)];
}

SparseMatrix OperatorHandle::component_matrix(std::size_t c) const {
  const auto& comp = components_.at(c);
  if (components_.size() == 1) return matrix_;
  std::vector<int> local(active_.size(), -1);
  for (std::size_t i = 0; i < comp.size(); ++i) local[comp[i]] = static_cast<int>(i);
  std::vector<Eigen::Triplet<double>> trips;
  for (std::size_t i = 0; i < comp.size(); ++i) {
    for (SparseMatrix::InnerIterator it(matrix_, comp[i]); it; ++it) {
      trips.emplace_back(static_cast<int>(i), local[it.col()], it.value());
    }
  }
  SparseMatrix sub(static_cast<Eigen::Index>(comp.size()), static_cast<Eigen::Index>(comp.size()));
  sub.setFromTriplets(trips.begin(), trips.end());
  sub.makeCompressed();
  return sub;
}

void OperatorHandle::write_matrix_market(std::ostream& os) const {
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << matrix_.rows() << ' ' << matrix_.cols() << ' ' << matrix_.nonZeros() << '\n';
  for (int r = 0; r < matrix_.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(matrix_, r); it; ++it) {
      os << (it.row() + 1) << ' ' << (it.col() + 1) << ' ' << format_double(it.value()) << '\n';
    }
  }
}

OperatorHandle assemble(const PotentialField& potential, BoundaryCondition bc, double kappa) {
  return OperatorHandle(potential, bc, kappa);
}

DenseSpectrum dense_spectrum(const SparseMatrix& A, bool want_vectors) {
  Eigen::MatrixXd dense = Eigen::MatrixXd(A);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      dense, want_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalFailure("dense eigensolver failed");
  DenseSpectrum out;
  out.values = es.eigenvalues();
  if (want_vectors) out.vectors = es.eigenvectors();
  return out;
}

namespace {

bool use_dense(const SolverOptions& opts, std::size_t n) {
  switch (opts.method) {
    case SolverOptions::Method::kDense: return true;
    case SolverOptions::Method::kLanczos: return false;
    case SolverOptions::Method::kAuto: return n <= opts.dense_limit;
  }
  return true;
}

int iteration_budget(const SolverOptions& opts, std::size_t n) {
  return opts.max_iter > 0 ? opts.max_iter : static_cast<int>(10 * n);
}

struct ComponentPair {
  double value;
  Eigen::VectorXd vector;
};

ComponentPair component_principal(const SparseMatrix& A, const SolverOptions& opts, double abs_tol,
                                  std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(A.rows());
  if (use_dense(opts, n)) {
    DenseSpectrum s = dense_spectrum(A);
    return {s.values[0], s.vectors.col(0)};
  }
  const int budget = iteration_budget(opts, n);
  try {
    // Connected component: the principal eigenvalue is simple.
    LanczosResult r = lanczos_lowest(A, 1, abs_tol, budget, seed, false);
    return {r.values[0], r.vectors.col(0)};
  } catch (const ConvergenceError&) {
    LanczosResult r = inverse_iteration_lowest(A, abs_tol, budget);
    return {r.values[0], r.vectors.col(0)};
  }
}

}  // namespace

Eigenpair principal_eigenpair(const OperatorHandle& H, const SolverOptions& opts) {
  const double abs_tol = opts.tol * std::max(1.0, H.norm_bound());
  const auto& comps = H.components();
  double best = kInfinity;
  std::size_t best_c = 0;
  Eigen::VectorXd best_vec;
  for (std::size_t c = 0; c < comps.size(); ++c) {
    ComponentPair p = component_principal(H.component_matrix(c), opts, abs_tol,
                                          hash_combine(opts.start_seed, c));
    // Strict improvement beyond the tolerance keeps the lowest index on ties.
    if (p.value < best - abs_tol) {
      best = p.value;
      best_c = c;
      best_vec = std::move(p.vector);
    }
  }

  Eigenpair out;
  out.value = best;
  out.vector = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(H.dimension()));
  const auto& comp = comps[best_c];
  const double sign = best_vec.sum() < 0 ? -1.0 : 1.0;
  for (std::size_t i = 0; i < comp.size(); ++i) {
    out.vector[comp[i]] = std::abs(sign * best_vec[static_cast<Eigen::Index>(i)]);
  }
  out.vector /= out.vector.norm();
  out.residual = (H.apply(out.vector) - out.value * out.vector).norm();
  return out;
}

std::vector<double> lowest_eigenvalues(const OperatorHandle& H, int k, const SolverOptions& opts) {
  if (k < 1 || static_cast<std::size_t>(k) > H.dimension()) {
    throw InvalidArgument("requested " + std::to_string(k) + " eigenvalues of an operator of dimension " +
                          std::to_string(H.dimension()));
  }
  const double abs_tol = opts.tol * std::max(1.0, H.norm_bound());
  std::vector<double> all;
  const auto& comps = H.components();
  for (std::size_t c = 0; c < comps.size(); ++c) {
    const SparseMatrix A = H.component_matrix(c);
    const int kc = std::min<int>(k, static_cast<int>(comps[c].size()));
    if (use_dense(opts, comps[c].size())) {
      DenseSpectrum s = dense_spectrum(A, false);
      for (int i = 0; i < kc; ++i) all.push_back(s.values[i]);
    } else {
      LanczosResult r = lanczos_lowest(A, kc, abs_tol, iteration_budget(opts, comps[c].size()),
                                       hash_combine(opts.start_seed, c), true);
      all.insert(all.end(), r.values.begin(), r.values.end());
    }
  }
  std::sort(all.begin(), all.end());
  all.resize(static_cast<std::size_t>(k));
  return all;
}

double rayleigh_quotient(const OperatorHandle& H, const Eigen::VectorXd& f) {
  if (f.size() != static_cast<Eigen::Index>(H.dimension())) {
    throw InvalidArgument("trial vector length does not match the operator dimension");
  }
  const double nn = f.squaredNorm();
  if (nn == 0.0) throw InvalidArgument("rayleigh quotient of the zero vector");
  return H.quadratic_form(f) / nn;
}

std::vector<double> cutoff_profile(const Window& window, double eps) {
  if (!(eps > 0.0 && eps < 0.5)) throw InvalidArgument("cutoff eps must lie in (0, 1/2)");
  std::array<double, kMaxDim> collar{1.0, 1.0, 1.0};
  for (int i = 0; i < window.d; ++i) {
    collar[i] = eps * window.extent[i];
    if (collar[i] < 2.0) {
      throw InvalidArgument("cutoff collar eps*side = " + std::to_string(collar[i]) +
                            " is thinner than 2 lattice sites");
    }
  }
  std::vector<double> rho(window.site_count());
  for (std::size_t k = 0; k < rho.size(); ++k) {
    const Site x = window.site(k);
    double r = 1.0;
    for (int i = 0; i < window.d; ++i) {
      // distance to the nearest exterior site along this axis
      const int depth = std::min(x[i] - window.lo[i] + 1, window.lo[i] + window.extent[i] - x[i]);
      r *= std::min(1.0, depth / collar[i]);
    }
    rho[k] = r;
  }
  return rho;
}

double cutoff_transfer(const OperatorHandle& neumann, const Eigenpair& phi_neumann, double eps) {
  if (neumann.bc() != BoundaryCondition::kNeumann) {
    throw InvalidArgument("cutoff_transfer expects the Neumann operator of the cell");
  }
  if (phi_neumann.vector.size() != static_cast<Eigen::Index>(neumann.dimension())) {
    throw InvalidArgument("eigenvector does not belong to this operator");
  }
  const std::vector<double> rho = cutoff_profile(neumann.window(), eps);
  const OperatorHandle dirichlet(neumann.potential(), BoundaryCondition::kDirichlet, neumann.kappa());
  Eigen::VectorXd trial(static_cast<Eigen::Index>(neumann.dimension()));
  const auto& active = neumann.active_sites();
  for (std::size_t a = 0; a < active.size(); ++a) {
    trial[static_cast<Eigen::Index>(a)] = rho[active[a]] * phi_neumann.vector[static_cast<Eigen::Index>(a)];
  }
  return rayleigh_quotient(dirichlet, trial);
}

}  // namespace trapping
