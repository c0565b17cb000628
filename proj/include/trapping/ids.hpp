#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "trapping/hamiltonian.hpp"
#include "trapping/random_media.hpp"

namespace trapping {

/// Monte Carlo integrated density of states on one box size.
struct IdsEstimate {
  std::vector<double> lambda;  ///< increasing
  BoundaryCondition bc = BoundaryCondition::kDirichlet;
  BoxRegion box;
  int n_realizations = 0;
  std::vector<double> mean;    ///< mean eigenvalue count per site
  std::vector<double> std_error;  ///< standard error of `mean`
  /// The eigenvalue budget saturated at this lambda in some realization, so
  /// the mean is a lower bound.
  std::vector<bool> truncated;
  /// counts[r][j]: eigenvalues <= lambda[j] in realization r.
  std::vector<std::vector<int>> counts;
};

struct IdsOptions {
  int max_eigenvalues = 32;
  unsigned threads = 1;
  SolverOptions solver{};
};

/// Realizations r = 0..n-1 use seed.with_index(r), so Dirichlet and Neumann
/// runs sharing a seed see the same fields.
IdsEstimate estimate_ids(const ModelSpec& spec, BoundaryCondition bc, const BoxRegion& box,
                         std::span<const double> lambda, int n_realizations, const SeedPath& seed,
                         const IdsOptions& opts = {});

/// #{k : lambda_k <= lambda} for each grid value, using at most `budget`
/// eigenvalues. Sets `saturated` when the budget ran out below the grid top.
std::vector<int> count_eigenvalues(const OperatorHandle& H, std::span<const double> lambda,
                                   int budget, bool* saturated = nullptr,
                                   const SolverOptions& opts = {});

/// Free Neumann eigenvalues <= lambda on the box (jump rate kappa / h^2).
std::int64_t weyl_count(const BoxRegion& box, double kappa, double lambda);

struct BracketingResult {
  double lambda = 0.0;
  int n_realizations = 0;
  double p_dirichlet = 0.0;  ///< empirical P(lambda^D_1 <= lambda)
  double p_neumann = 0.0;    ///< empirical P(lambda^N_1 <= lambda)
  std::pair<double, double> ci_dirichlet;  ///< Wilson 95%
  std::pair<double, double> ci_neumann;
  double c4 = 0.0;           ///< weyl_count(box, kappa, 1) / site count
  double lower = 0.0;        ///< p_dirichlet / site count
  std::optional<double> upper;  ///< c4 * p_neumann, only for lambda in (0, 1)
  double joint_stderr = 0.0; ///< stderr of the per-realization upper - lower
  /// Realizations where the Dirichlet event held but the Neumann one did not.
  int bracketing_violations = 0;
};

/// Both probabilities are estimated on the same realizations.
BracketingResult bracketing_bounds(const ModelSpec& spec, const BoxRegion& box, double lambda,
                                   int n_realizations, const SeedPath& seed, unsigned threads = 1);

/// Exact IDS per site for d = 1 hard single-site traps of density p:
///   N(lambda) = sum_{l >= 1} p^2 (1-p)^l #{k <= l : 2 kappa (1 - cos(k pi / (l+1))) <= lambda}.
/// Summed in log space until the tail bound falls below rel_tol times the sum.
double ids_1d_hard_exact(double p, double kappa, double lambda, double rel_tol = 1e-14);
/// log N(lambda); -inf when N = 0.
double log_ids_1d_hard_exact(double p, double kappa, double lambda, double rel_tol = 1e-14);

/// E[#{k : lambda_k <= lambda}] / n for the Dirichlet path of n sites with the
/// same hard traps: the finite-box counterpart of ids_1d_hard_exact.
double ids_1d_hard_box(double p, double kappa, double lambda, int n);

/// phi(x) = c x^L (log x)^m, increasing for x >= x_min().
struct RateFunction {
  double c = 1.0;
  double L = 1.0;
  double m = 0.0;

  double operator()(double x) const;
  double x_min() const;
  void validate() const;
};

/// psi(y) with phi(psi(y)) = y, by bisection to relative tolerance tol.
double asymptotic_inverse(const RateFunction& phi, double y, double tol = 1e-14);

/// 1 / psi(d log t).
double predicted_decay_rate(const RateFunction& phi, int d, double t);

/// Principal Dirichlet eigenvalue of -kappa Laplacian on the unit ball of R^d.
double unit_ball_eigenvalue(int d, double kappa = 0.5);
/// Volume of the unit ball of R^d.
double unit_ball_volume(int d);
/// phi(x) = nu omega_d lambda_d^{d/2} x^{d/2}.
RateFunction poisson_rate_function(int d, double nu, double kappa = 0.5);
/// Closed form psi(y) = lambda_d^{-1} (nu omega_d)^{-2/d} y^{2/d}.
double poisson_psi(int d, double nu, double y, double kappa = 0.5);
/// Donsker-Varadhan constant c(d, nu) = lambda_d (nu omega_d / d)^{2/d}.
double poisson_dv_constant(int d, double nu, double kappa = 0.5);
/// Shape (amplitude 1) of the perturbed-lattice tail: d = 2 gives
/// x^{1+theta/2} (log x)^{-theta/2}, d >= 3 gives x^{d/2 + theta/d}.
RateFunction perturbed_lattice_rate_function(int d, double theta);

struct LifshitzFit {
  double L_hat = 0.0;
  double c_hat = 0.0;
  std::optional<double> m_hat;
  double L_stderr = 0.0;
  double c_stderr = 0.0;
  std::optional<double> m_stderr;
  double lambda_lo = 0.0;
  double lambda_hi = 0.0;
  int n_points = 0;
  bool weighted = false;
  double residual_norm = 0.0;
};

/// Least squares of log(-log N) on log(1/lambda) (and log log(1/lambda)).
/// Uses weights 1/sigma^2 with sigma = stderr / (N |log N|) when every stderr
/// in the window is positive, and ordinary least squares otherwise.
LifshitzFit fit_lifshitz(const IdsEstimate& ids, double lambda_lo, double lambda_hi,
                         bool with_log_correction);
/// Same fit from log N values (no weights); for series whose N underflows.
LifshitzFit fit_lifshitz_log(std::span<const double> lambda, std::span<const double> log_n,
                             double lambda_lo, double lambda_hi, bool with_log_correction);

/// n points per decade from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, int per_decade = 16);

/// Columns lambda,mean,stderr,n,bc,R,truncated.
void write_csv(std::ostream& os, const IdsEstimate& ids);
/// One-line JSON record.
void write_json(std::ostream& os, const LifshitzFit& fit);

}  // namespace trapping
