#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "trapping/hamiltonian.hpp"
#include "trapping/ids.hpp"
#include "trapping/random_media.hpp"

namespace trapping {

/// What a walk does when it steps off the stored field.
enum class ExitPolicy {
  kError,  ///< throw WalkEscaped: the field was generated too small
  kKill,   ///< absorbing walls at the field boundary
};

struct McResult {
  double estimate = 0.0;
  double std_error = 0.0;
  std::uint64_t paths = 0;
};

/// Paths per independently seeded block.
inline constexpr std::uint64_t kPathBlock = 1u << 14;

/// Feynman-Kac estimate of E_x[exp(-int_0^t V(X_s) ds)] for the continuous
/// time simple random walk with rate kappa / h^2 per neighbor.
///
/// One walk serves every t in `times` (increasing, >= 0). Holding times are
/// exact exponential clocks; a walk entering a hard trap, or a killing wall
/// under ExitPolicy::kKill, scores 0 from then on. Block b draws from
/// make_engine(seed, b) and blocks are merged in index order, so the result
/// does not depend on `threads`.
std::vector<McResult> mc_survival(const PotentialField& V, double kappa, std::span<const double> times,
                                  const Site& x, std::uint64_t n_paths, const SeedPath& seed,
                                  ExitPolicy exit = ExitPolicy::kError, unsigned threads = 1);
McResult mc_survival(const PotentialField& V, double kappa, double t, const Site& x,
                     std::uint64_t n_paths, const SeedPath& seed,
                     ExitPolicy exit = ExitPolicy::kError, unsigned threads = 1);

/// Half side (sites) of the generation box that covers a walk up to time t:
/// ceil(max(4 sqrt(2 d kappa t) / h, a / h) + 16).
int walk_box_half_side(const ModelSpec& spec, int d, double h, double t);

/// Survival of the walk killed by V and on leaving `sub`, from the Dirichlet
/// eigen-expansion sum_k exp(-lambda_k t) phi_k(x) <phi_k, 1>. Only the
/// connected component of x is diagonalized.
class DirichletSurvival {
 public:
  static constexpr std::size_t kMaxSites = 4096;

  DirichletSurvival(const PotentialField& V, const Window& sub, const Site& x, double kappa,
                    std::size_t max_sites = kMaxSites);

  /// 1 at t = 0; clamped to [0, 1].
  double operator()(double t) const;
  std::size_t component_size() const { return static_cast<std::size_t>(values_.size()); }

 private:
  Eigen::VectorXd values_;
  Eigen::VectorXd weights_;  // phi_k(x) <phi_k, 1>
};

double exact_survival_dirichlet(const PotentialField& V, const Window& sub, double t, const Site& x,
                                double kappa);

/// P_x(free walk leaves `box` before t), exact on the finite box: one minus
/// the product over axes of the 1D free Dirichlet survival.
double free_exit_probability(const Window& box, double kappa, double t, const Site& x);

struct SpectralBound {
  double value = 0.0;           ///< min(1, in_box + exit)
  double in_box = 0.0;          ///< sqrt(n_active) exp(-(lambda_1 - residual) t)
  double exit = 0.0;
  double lambda_1 = 0.0;
  double residual = 0.0;
  std::size_t n_active = 0;
};

/// Certified upper bound for u(t, x) from the principal Dirichlet eigenvalue
/// of `big` and the exact free exit probability.
SpectralBound spectral_upper_bound(const PotentialField& V, const Window& big, double t, const Site& x,
                                   double kappa, const SolverOptions& opts = {});

struct SubboxScan {
  std::size_t best_index = 0;
  Window best_cell;
  double lambda_n_min = 0.0;
  double lambda_d_at_best = 0.0;
  std::size_t n_cells = 0;
  std::vector<double> lambda_n;  ///< per cell, +inf for fully trapped cells
};

/// Grid of side^d cells with corners at lo + k * stride inside `big`; returns
/// the cell minimizing the Neumann principal eigenvalue (lowest index on ties)
/// and the Dirichlet principal eigenvalue of that cell.
SubboxScan best_subbox_scan(const PotentialField& V, const Window& big, int side, int stride,
                            double kappa);

struct Budget {
  double wall_seconds = std::numeric_limits<double>::infinity();
  std::uint64_t max_paths = std::numeric_limits<std::uint64_t>::max();
};

enum class PointStatus { kOk, kBudgetExhausted };
std::string_view to_string(PointStatus s);

struct CurveOptions {
  std::uint64_t n_paths = 1u << 16;
  Budget budget{};
  unsigned threads = 1;
  /// Cell side for the sub-box scan; 0 picks max(4, ceil(2 (d log t)^{1/d})).
  int cell_side = 0;
  /// Size cap for the exact windows behind the certified lower bound.
  std::size_t exact_sites = 1024;
  std::size_t hull_sites = 2048;
  SolverOptions solver{};
};

struct SurvivalCurve {
  std::vector<double> t;
  std::vector<double> mc;
  std::vector<double> mc_stderr;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<PointStatus> status;
  ModelSpec spec;
  SeedPath seed;
  Site x{0, 0, 0};
  int d = 1;
  double h = 1.0;
  int field_half_side = 0;  ///< half side of the generated field
  bool complete() const;
};

/// One quenched realization (seed) evaluated along `t_grid` (increasing,
/// positive). The field is generated once over a box covering both the walk
/// range at the largest t and the spectral box (-T, T)^d with
/// T = max(ceil(t / h), walk_box_half_side(t)); if a walk still escapes, the
/// box is doubled and regenerated from the same seed.
SurvivalCurve quenched_curve(const ModelSpec& spec, int d, double h, const SeedPath& seed, const Site& x,
                             std::span<const double> t_grid, const CurveOptions& opts = {});

struct ScalingResult {
  double slope = 0.0;
  double stderr_slope = 0.0;
  double intercept = 0.0;
  int n_points = 0;
};

/// Regression of log(t / (-log u)) on log log t. Needs t > 1, u in (0, 1)
/// and at least 4 points.
ScalingResult scaling_check(std::span<const double> t, std::span<const double> u);
/// Uses the MC column of the points with status ok.
ScalingResult scaling_check(const SurvivalCurve& curve);

struct TailProbability {
  double t = 0.0;
  double threshold = 0.0;  ///< (1 - eps) / psi(d log t)
  double p_hat = 0.0;
  std::pair<double, double> ci;  ///< Wilson 95%
  int n_realizations = 0;
};

/// P(lambda^D_1((-t, t)^d) <= (1 - eps) / psi(d log t)) by Monte Carlo over
/// realizations seed.with_index(r), on the box of half side ceil(t / h).
TailProbability eigenvalue_tail_probability(const ModelSpec& spec, int d, double h, double t, double eps,
                                            const RateFunction& phi, int n_realizations,
                                            const SeedPath& seed, unsigned threads = 1);

struct SupScanPoint {
  double t = 0.0;
  double bound = 0.0;      ///< (3 d log t)^{1/alpha}
  double frequency = 0.0;  ///< fraction of realizations with sup V > bound
  std::pair<double, double> ci;
  bool assumption_failure = false;  ///< frequency > 1/2
};

/// Exceedance of sup_{(-t, t)^d} V over (3 d log t)^{1/alpha}. Each
/// realization is generated once on the largest box; smaller boxes nest.
std::vector<SupScanPoint> sup_potential_scan(const ModelSpec& spec, int d, double h,
                                             std::span<const double> t_grid, double alpha,
                                             int n_realizations, const SeedPath& seed,
                                             unsigned threads = 1);

/// Columns t,mc,mc_stderr,lower,upper,status.
void write_csv(std::ostream& os, const SurvivalCurve& curve);
void write_json(std::ostream& os, const ScalingResult& r);

}  // namespace trapping
