#include "trapping/lanczos.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/SparseCholesky>

#include "trapping/rng.hpp"

namespace trapping {

namespace {

struct Sweep {
  std::vector<double> values;
  Eigen::MatrixXd vectors;
  std::vector<double> residuals;
  int converged = 0;  // consecutive converged pairs from the bottom
  int iterations = 0;
};

double gershgorin(const SparseMatrix& A) {
  double m = 0.0;
  for (int r = 0; r < A.outerSize(); ++r) {
    double s = 0.0;
    for (SparseMatrix::InnerIterator it(A, r); it; ++it) s += std::abs(it.value());
    m = std::max(m, s);
  }
  return m;
}

void orthogonalize(Eigen::VectorXd& w, const Eigen::MatrixXd& Q, int nq,
                   const Eigen::MatrixXd& V, int nv) {
  for (int pass = 0; pass < 2; ++pass) {
    if (nq > 0) w.noalias() -= Q.leftCols(nq) * (Q.leftCols(nq).transpose() * w);
    if (nv > 0) w.noalias() -= V.leftCols(nv) * (V.leftCols(nv).transpose() * w);
  }
}

// One Lanczos run in the orthogonal complement of the first nq columns of Q.
Sweep sweep(const SparseMatrix& A, const Eigen::MatrixXd& Q, int nq, int need, double tol,
            int budget, double scale, std::mt19937_64& eng) {
  const int n = static_cast<int>(A.rows());
  const int free_dim = n - nq;
  const int max_dim = std::min(free_dim, budget);
  Sweep out;
  if (max_dim <= 0) return out;

  Eigen::VectorXd v(n);
  for (int attempt = 0;; ++attempt) {
    for (int i = 0; i < n; ++i) v[i] = standard_normal(eng);
    orthogonalize(v, Q, nq, Eigen::MatrixXd(), 0);
    const double nv = v.norm();
    if (nv > 1e-8) {
      v /= nv;
      break;
    }
    if (attempt > 8) return out;
  }

  int capacity = std::min(max_dim, 64);
  Eigen::MatrixXd V(n, capacity);
  std::vector<double> alpha;
  std::vector<double> beta;
  Eigen::VectorXd w(n);
  const double breakdown = 1e-13 * std::max(scale, 1.0);
  int next_check = std::min(8, max_dim);

  for (int j = 0; j < max_dim; ++j) {
    if (j == capacity) {
      capacity = std::min(max_dim, 2 * capacity);
      V.conservativeResize(Eigen::NoChange, capacity);
    }
    V.col(j) = v;
    w.noalias() = A * v;
    const double a = v.dot(w);
    w -= a * v;
    if (j > 0) w -= beta.back() * V.col(j - 1);
    orthogonalize(w, Q, nq, V, j + 1);
    const double b = w.norm();
    alpha.push_back(a);
    beta.push_back(b);
    const int dim = j + 1;
    out.iterations = dim;

    const bool exhausted = b <= breakdown || dim == max_dim;
    if (dim < next_check && !exhausted) {
      v = w / b;
      continue;
    }
    next_check = dim + std::max(5, dim / 8);

    Eigen::VectorXd diag = Eigen::Map<Eigen::VectorXd>(alpha.data(), dim);
    Eigen::VectorXd sub(std::max(dim - 1, 0));
    for (int i = 0; i + 1 < dim; ++i) sub[i] = beta[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
    tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    const auto& theta = tri.eigenvalues();
    const auto& S = tri.eigenvectors();

    int converged = 0;
    std::vector<double> res(dim);
    for (int i = 0; i < dim; ++i) res[i] = b <= breakdown ? 0.0 : b * std::abs(S(dim - 1, i));
    while (converged < dim && res[converged] <= tol) ++converged;

    if (converged >= need || exhausted) {
      const int keep = std::max(converged, 1);
      out.converged = converged;
      out.values.assign(theta.data(), theta.data() + keep);
      out.residuals.assign(res.begin(), res.begin() + keep);
      out.vectors = V.leftCols(dim) * S.leftCols(keep);
      return out;
    }
    v = w / b;
  }
  return out;
}

}  // namespace

LanczosResult lanczos_lowest(const SparseMatrix& A, int k, double abs_tol, int max_iter,
                             std::uint64_t seed, bool verify_multiplicity) {
  const int n = static_cast<int>(A.rows());
  if (n == 0) throw InvalidArgument("lanczos on an empty matrix");
  k = std::min(k, n);
  if (k < 1) throw InvalidArgument("lanczos needs k >= 1");

  const double scale = gershgorin(A);
  Eigen::MatrixXd Q(n, std::min(n, 2 * k + 8));
  std::vector<double> locked;
  int nq = 0;
  int used = 0;
  std::mt19937_64 eng(seed);

  double best_value = 0.0;
  double best_res = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_vec;

  for (int round = 0;; ++round) {
    const bool verifying = nq >= k;
    const int need = verifying ? 1 : k - nq;
    if (nq >= n) break;
    const int budget = max_iter - used;
    if (budget <= 0) {
      throw ConvergenceError("lanczos: iteration budget exhausted", best_value, best_vec, best_res);
    }
    Sweep s = sweep(A, Q, nq, need, abs_tol, budget, scale, eng);
    used += s.iterations;
    if (!s.values.empty() && s.residuals[0] < best_res) {
      best_res = s.residuals[0];
      best_value = s.values[0];
      best_vec = s.vectors.col(0);
    }
    if (s.converged == 0) {
      if (s.iterations == 0) break;
      continue;
    }
    if (verifying) {
      std::vector<double> sorted = locked;
      std::sort(sorted.begin(), sorted.end());
      const double kth = sorted[static_cast<std::size_t>(k) - 1];
      if (s.values[0] > kth + abs_tol) break;
    }
    for (int i = 0; i < s.converged && nq < n; ++i) {
      if (nq == Q.cols()) Q.conservativeResize(Eigen::NoChange, std::min<Eigen::Index>(n, 2 * Q.cols()));
      Eigen::VectorXd y = s.vectors.col(i);
      orthogonalize(y, Q, nq, Eigen::MatrixXd(), 0);
      const double ny = y.norm();
      if (ny < 1e-8) continue;
      Q.col(nq++) = y / ny;
      locked.push_back(s.values[i]);
    }
    if (!verify_multiplicity && nq >= k) break;
  }

  // Final Rayleigh-Ritz on the locked space gives clean pairs and residuals.
  Eigen::MatrixXd Ql = Q.leftCols(nq);
  Eigen::MatrixXd AQ = A * Ql;
  Eigen::MatrixXd proj = Ql.transpose() * AQ;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(0.5 * (proj + proj.transpose()));
  const int keep = std::min(k, nq);
  LanczosResult out;
  out.iterations = used;
  out.vectors = Ql * small.eigenvectors().leftCols(keep);
  for (int i = 0; i < keep; ++i) {
    const double lam = small.eigenvalues()[i];
    out.values.push_back(lam);
    out.residuals.push_back((A * out.vectors.col(i) - lam * out.vectors.col(i)).norm());
  }
  if (keep < k) {
    throw ConvergenceError("lanczos: fewer converged eigenpairs than requested", best_value,
                           best_vec, best_res);
  }
  return out;
}

LanczosResult inverse_iteration_lowest(const SparseMatrix& A, double abs_tol, int max_iter) {
  const int n = static_cast<int>(A.rows());
  const double shift = -1e-6 * std::max(gershgorin(A), 1.0);
  Eigen::SparseMatrix<double> M = A;
  for (int i = 0; i < n; ++i) M.coeffRef(i, i) -= shift;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(M);
  if (solver.info() != Eigen::Success) throw NumericalFailure("inverse iteration: factorization failed");
  Eigen::VectorXd x = Eigen::VectorXd::Ones(n) / std::sqrt(static_cast<double>(n));
  double lam = 0.0;
  double res = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd y = solver.solve(x);
    x = y / y.norm();
    const Eigen::VectorXd Ax = A * x;
    lam = x.dot(Ax);
    res = (Ax - lam * x).norm();
    if (res <= abs_tol) {
      LanczosResult out;
      out.values = {lam};
      out.vectors = x;
      out.residuals = {res};
      out.iterations = it + 1;
      return out;
    }
  }
  throw ConvergenceError("inverse iteration: iteration budget exhausted", lam, x, res);
}

}  // namespace trapping
