#include "trapping/ids.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>

#include <boost/math/special_functions/bessel.hpp>
#include <Eigen/Dense>

#include "json.hpp"
#include "trapping/error.hpp"
#include "trapping/io.hpp"
#include "trapping/parallel.hpp"
#include "trapping/stats.hpp"

namespace trapping {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_grid(std::span<const double> lambda) {
  if (lambda.empty()) throw InvalidArgument("lambda grid is empty");
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    if (!std::isfinite(lambda[i])) throw InvalidArgument("lambda grid values must be finite");
    if (i > 0 && !(lambda[i] > lambda[i - 1])) throw InvalidArgument("lambda grid must be increasing");
  }
}

double count_slack(double lambda) { return 1e-12 * std::max(1.0, std::abs(lambda)); }

double principal_or_inf(const PotentialField& f, BoundaryCondition bc, double kappa) {
  try {
    return principal_eigenpair(assemble(f, bc, kappa)).value;
  } catch (const FullyTrapped&) {
    return kInfinity;
  }
}

}  // namespace

std::vector<int> count_eigenvalues(const OperatorHandle& H, std::span<const double> lambda,
                                   int budget, bool* saturated, const SolverOptions& opts) {
  if (budget < 1) throw InvalidArgument("eigenvalue budget must be >= 1");
  const int dim = static_cast<int>(H.dimension());
  const int k = std::min(budget, dim);
  const std::vector<double> values = lowest_eigenvalues(H, k, opts);
  std::vector<int> counts(lambda.size());
  for (std::size_t j = 0; j < lambda.size(); ++j) {
    const auto it = std::upper_bound(values.begin(), values.end(), lambda[j] + count_slack(lambda[j]));
    counts[j] = static_cast<int>(it - values.begin());
  }
  if (saturated) *saturated = k < dim && !counts.empty() && counts.back() == k;
  return counts;
}

IdsEstimate estimate_ids(const ModelSpec& spec, BoundaryCondition bc, const BoxRegion& box,
                         std::span<const double> lambda, int n_realizations, const SeedPath& seed,
                         const IdsOptions& opts) {
  spec.validate();
  box.validate();
  check_grid(lambda);
  if (n_realizations < 1) throw InvalidArgument("n_realizations must be >= 1");
  const Window window(box);
  const auto sites = static_cast<double>(window.site_count());

  IdsEstimate out;
  out.lambda.assign(lambda.begin(), lambda.end());
  out.bc = bc;
  out.box = box;
  out.n_realizations = n_realizations;
  out.counts.assign(static_cast<std::size_t>(n_realizations), std::vector<int>(lambda.size(), 0));
  std::vector<int> dims(static_cast<std::size_t>(n_realizations), 0);

  parallel_for(static_cast<std::size_t>(n_realizations), opts.threads, [&](std::size_t r) {
    const PotentialField f = generate(spec, window, seed.with_index(r));
    try {
      const OperatorHandle H = assemble(f, bc, spec.kappa);
      dims[r] = static_cast<int>(H.dimension());
      out.counts[r] = count_eigenvalues(H, lambda, opts.max_eigenvalues, nullptr, opts.solver);
    } catch (const FullyTrapped&) {
      dims[r] = 0;
    }
  });

  out.mean.resize(lambda.size());
  out.std_error.resize(lambda.size());
  out.truncated.assign(lambda.size(), false);
  for (std::size_t j = 0; j < lambda.size(); ++j) {
    Welford acc;
    for (std::size_t r = 0; r < out.counts.size(); ++r) {
      const int c = out.counts[r][j];
      acc.add(c / sites);
      if (c == opts.max_eigenvalues && opts.max_eigenvalues < dims[r]) out.truncated[j] = true;
    }
    out.mean[j] = acc.mean();
    out.std_error[j] = acc.stderr_of_mean();
  }
  return out;
}

std::int64_t weyl_count(const BoxRegion& box, double kappa, double lambda) {
  box.validate();
  if (!(kappa > 0.0)) throw InvalidArgument("kappa must be positive");
  if (lambda < 0.0) return 0;
  const int n = 2 * box.R;
  const double J = kappa / (box.h * box.h);
  std::vector<double> axis(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) axis[k] = 2.0 * J * (1.0 - std::cos(k * kPi / n));
  const double cap = lambda + count_slack(lambda);
  // axis[] is increasing, so each nested loop stops at the first miss.
  std::int64_t count = 0;
  for (int i = 0; i < n && axis[i] <= cap; ++i) {
    if (box.d == 1) {
      ++count;
      continue;
    }
    for (int j = 0; j < n && axis[i] + axis[j] <= cap; ++j) {
      if (box.d == 2) {
        ++count;
        continue;
      }
      for (int k = 0; k < n && axis[i] + axis[j] + axis[k] <= cap; ++k) ++count;
    }
  }
  return count;
}

BracketingResult bracketing_bounds(const ModelSpec& spec, const BoxRegion& box, double lambda,
                                   int n_realizations, const SeedPath& seed, unsigned threads) {
  spec.validate();
  box.validate();
  if (n_realizations < 1) throw InvalidArgument("n_realizations must be >= 1");
  const Window window(box);
  const auto sites = static_cast<double>(window.site_count());
  std::vector<double> lam_d(static_cast<std::size_t>(n_realizations));
  std::vector<double> lam_n(static_cast<std::size_t>(n_realizations));
  parallel_for(lam_d.size(), threads, [&](std::size_t r) {
    const PotentialField f = generate(spec, window, seed.with_index(r));
    lam_d[r] = principal_or_inf(f, BoundaryCondition::kDirichlet, spec.kappa);
    lam_n[r] = principal_or_inf(f, BoundaryCondition::kNeumann, spec.kappa);
  });

  BracketingResult out;
  out.lambda = lambda;
  out.n_realizations = n_realizations;
  out.c4 = static_cast<double>(weyl_count(box, spec.kappa, 1.0)) / sites;
  const bool upper_available = lambda > 0.0 && lambda < 1.0;
  int hits_d = 0;
  int hits_n = 0;
  Welford diff;
  for (std::size_t r = 0; r < lam_d.size(); ++r) {
    const bool ed = lam_d[r] <= lambda;
    const bool en = lam_n[r] <= lambda;
    hits_d += ed;
    hits_n += en;
    if (ed && !en) ++out.bracketing_violations;
    diff.add((upper_available ? out.c4 * en : 0.0) - ed / sites);
  }
  const double n = n_realizations;
  out.p_dirichlet = hits_d / n;
  out.p_neumann = hits_n / n;
  out.ci_dirichlet = wilson_interval(hits_d, n);
  out.ci_neumann = wilson_interval(hits_n, n);
  out.lower = out.p_dirichlet / sites;
  if (upper_available) out.upper = out.c4 * out.p_neumann;
  out.joint_stderr = diff.stderr_of_mean();
  return out;
}

namespace {

// Number of k in 1..l with 2 kappa (1 - cos(k pi / (l + 1))) <= lambda, given
// the angle a = acos(1 - lambda / (2 kappa)) in [0, pi].
std::int64_t gap_count(std::int64_t l, double angle) {
  const double x = static_cast<double>(l + 1) * angle / kPi;
  const auto k = static_cast<std::int64_t>(std::floor(x * (1.0 + 1e-12)));
  return std::clamp<std::int64_t>(k, 0, l);
}

double gap_angle(double kappa, double lambda) {
  if (lambda <= 0.0) return 0.0;
  if (lambda >= 4.0 * kappa) return kPi;
  return std::acos(1.0 - lambda / (2.0 * kappa));
}

void check_hard_1d(double p, double kappa) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("p must lie in (0, 1)");
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw InvalidArgument("kappa must be positive");
}

}  // namespace

double log_ids_1d_hard_exact(double p, double kappa, double lambda, double rel_tol) {
  check_hard_1d(p, kappa);
  if (!(rel_tol > 0.0)) throw InvalidArgument("series tolerance must be positive");
  const double angle = gap_angle(kappa, lambda);
  if (angle == 0.0) return kNegInf;
  const double log_p2 = 2.0 * std::log(p);
  const double log_q = std::log1p(-p);
  const double q = 1.0 - p;

  // First gap length whose ground state lies below lambda.
  auto l = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(kPi / angle - 1.0 - 1e-9)) - 1);
  while (gap_count(l, angle) == 0) ++l;
  const double anchor = log_p2 + static_cast<double>(l) * log_q + std::log(static_cast<double>(gap_count(l, angle)));
  double sum = 1.0;
  for (;;) {
    // sum_{j > l} p^2 q^j j = q^{l+1} (l + 1 - l q), and gap counts never exceed j.
    const double ld = static_cast<double>(l);
    const double log_tail = (ld + 1.0) * log_q + std::log(ld + 1.0 - ld * q);
    if (log_tail - anchor <= std::log(rel_tol * sum)) break;
    ++l;
    const auto c = gap_count(l, angle);
    sum += std::exp(log_p2 + static_cast<double>(l) * log_q + std::log(static_cast<double>(c)) - anchor);
  }
  return anchor + std::log(sum);
}

double ids_1d_hard_exact(double p, double kappa, double lambda, double rel_tol) {
  return std::exp(log_ids_1d_hard_exact(p, kappa, lambda, rel_tol));
}

double ids_1d_hard_box(double p, double kappa, double lambda, int n) {
  check_hard_1d(p, kappa);
  if (n < 1) throw InvalidArgument("box must hold at least one site");
  const double angle = gap_angle(kappa, lambda);
  const double q = 1.0 - p;
  double total = std::pow(q, n) * static_cast<double>(gap_count(n, angle));
  for (int l = 1; l < n; ++l) {
    const double c = static_cast<double>(gap_count(l, angle));
    if (c == 0.0) continue;
    const double ql = std::pow(q, l);
    total += 2.0 * p * ql * c;                      // bounded by one wall and one trap
    total += (n - l - 1) * p * p * ql * c;          // bounded by two traps
  }
  return total / n;
}

double RateFunction::operator()(double x) const {
  if (x < x_min()) {
    throw InvalidArgument("rate function evaluated below x_min = " + format_double(x_min()));
  }
  if (m == 0.0) return c * std::pow(x, L);
  return c * std::pow(x, L) * std::pow(std::log(x), m);
}

double RateFunction::x_min() const {
  if (m == 0.0) return 0.0;
  return std::max(1.0, std::exp(-m / L));
}

void RateFunction::validate() const {
  if (!(c > 0.0) || !std::isfinite(c)) throw InvalidArgument("rate amplitude c must be positive");
  if (!(L > 0.0) || !std::isfinite(L)) throw InvalidArgument("rate index L must be positive");
  if (!std::isfinite(m)) throw InvalidArgument("rate log power m must be finite");
}

double asymptotic_inverse(const RateFunction& phi, double y, double tol) {
  phi.validate();
  if (!(tol > 0.0)) throw InvalidArgument("tolerance must be positive");
  const double lo0 = phi.x_min();
  const double floor_value = phi(lo0);
  if (!(y >= floor_value) || !std::isfinite(y)) {
    throw InvalidArgument("y = " + format_double(y) + " is below the range of phi (phi(x_min) = " +
                          format_double(floor_value) + ")");
  }
  double lo = lo0;
  double hi = std::max(2.0 * lo0, 2.0);
  while (phi(hi) < y) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw NumericalFailure("asymptotic_inverse: bracket overflow");
  }
  for (int it = 0; it < 4000 && hi - lo > tol * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (phi(mid) < y ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double predicted_decay_rate(const RateFunction& phi, int d, double t) {
  if (d < 1) throw InvalidArgument("dimension must be positive");
  if (!(t > 1.0)) throw InvalidArgument("t must exceed 1");
  const double y = d * std::log(t);
  if (y < phi(phi.x_min())) {
    throw InvalidArgument("t = " + format_double(t) + " is too small: d log t lies below phi(x_min)");
  }
  return 1.0 / asymptotic_inverse(phi, y);
}

double unit_ball_eigenvalue(int d, double kappa) {
  double j = 0.0;
  switch (d) {
    case 1: j = kPi / 2.0; break;
    case 2: j = boost::math::cyl_bessel_j_zero(0.0, 1); break;
    case 3: j = kPi; break;
    default: throw InvalidArgument("unit ball eigenvalue available for d = 1, 2, 3");
  }
  return kappa * j * j;
}

double unit_ball_volume(int d) {
  if (d < 1) throw InvalidArgument("dimension must be positive");
  return std::pow(kPi, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
}

RateFunction poisson_rate_function(int d, double nu, double kappa) {
  if (!(nu > 0.0)) throw InvalidArgument("nu must be positive for a Poisson rate function");
  return {nu * unit_ball_volume(d) * std::pow(unit_ball_eigenvalue(d, kappa), d / 2.0), d / 2.0, 0.0};
}

double poisson_psi(int d, double nu, double y, double kappa) {
  return std::pow(y, 2.0 / d) / (unit_ball_eigenvalue(d, kappa) * std::pow(nu * unit_ball_volume(d), 2.0 / d));
}

double poisson_dv_constant(int d, double nu, double kappa) {
  return unit_ball_eigenvalue(d, kappa) * std::pow(nu * unit_ball_volume(d) / d, 2.0 / d);
}

RateFunction perturbed_lattice_rate_function(int d, double theta) {
  if (!(theta > 0.0)) throw InvalidArgument("theta must be positive");
  if (d == 2) return {1.0, 1.0 + theta / 2.0, -theta / 2.0};
  if (d >= 3) return {1.0, d / 2.0 + theta / d, 0.0};
  throw InvalidArgument("the perturbed-lattice tail shape is stated for d >= 2 only");
}

namespace {

LifshitzFit solve_fit(const std::vector<double>& lam, const std::vector<double>& y,
                      const std::vector<double>& sigma, bool with_log, double lo, double hi) {
  const int n = static_cast<int>(lam.size());
  const int p = with_log ? 3 : 2;
  if (n < 4) throw InvalidArgument("fit window holds " + std::to_string(n) + " points; at least 4 needed");
  const bool weighted = std::all_of(sigma.begin(), sigma.end(), [](double s) { return s > 0.0; });
  Eigen::MatrixXd X(n, p);
  Eigen::VectorXd Y(n);
  for (int i = 0; i < n; ++i) {
    const double w = weighted ? 1.0 / sigma[i] : 1.0;
    const double x = std::log(1.0 / lam[i]);
    X(i, 0) = w;
    X(i, 1) = w * x;
    if (with_log) X(i, 2) = w * std::log(x);
    Y[i] = w * y[i];
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < p) throw NumericalFailure("fit design matrix is rank deficient");
  const Eigen::VectorXd beta = qr.solve(Y);
  const double rss = (X * beta - Y).squaredNorm();
  Eigen::MatrixXd cov = (X.transpose() * X).inverse();
  if (!weighted) cov *= n > p ? rss / (n - p) : 0.0;

  LifshitzFit fit;
  fit.c_hat = std::exp(beta[0]);
  fit.c_stderr = fit.c_hat * std::sqrt(std::max(cov(0, 0), 0.0));
  fit.L_hat = beta[1];
  fit.L_stderr = std::sqrt(std::max(cov(1, 1), 0.0));
  if (with_log) {
    fit.m_hat = beta[2];
    fit.m_stderr = std::sqrt(std::max(cov(2, 2), 0.0));
  }
  fit.lambda_lo = lo;
  fit.lambda_hi = hi;
  fit.n_points = n;
  fit.weighted = weighted;
  fit.residual_norm = std::sqrt(rss);
  return fit;
}

void check_window(double lo, double hi) {
  if (!(lo > 0.0 && hi >= lo)) throw InvalidArgument("fit window must satisfy 0 < lo <= hi");
}

void check_fit_lambda(double lam, bool with_log) {
  if (with_log && !(lam < 1.0)) {
    throw InvalidArgument("log-corrected fit needs lambda < 1; got lambda = " + format_double(lam));
  }
}

}  // namespace

LifshitzFit fit_lifshitz(const IdsEstimate& ids, double lambda_lo, double lambda_hi,
                         bool with_log_correction) {
  check_window(lambda_lo, lambda_hi);
  std::vector<double> lam;
  std::vector<double> y;
  std::vector<double> sigma;
  for (std::size_t j = 0; j < ids.lambda.size(); ++j) {
    const double l = ids.lambda[j];
    if (l < lambda_lo || l > lambda_hi) continue;
    const double N = ids.mean[j];
    if (!(N > 0.0 && N < 1.0)) {
      throw InvalidArgument("IDS estimate at lambda = " + format_double(l) + " is " + format_double(N) +
                            "; the fit needs values strictly inside (0, 1)");
    }
    check_fit_lambda(l, with_log_correction);
    const double logN = std::log(N);
    lam.push_back(l);
    y.push_back(std::log(-logN));
    const double se = j < ids.std_error.size() ? ids.std_error[j] : 0.0;
    sigma.push_back(se / (N * std::abs(logN)));
  }
  return solve_fit(lam, y, sigma, with_log_correction, lambda_lo, lambda_hi);
}

LifshitzFit fit_lifshitz_log(std::span<const double> lambda, std::span<const double> log_n,
                             double lambda_lo, double lambda_hi, bool with_log_correction) {
  check_window(lambda_lo, lambda_hi);
  if (lambda.size() != log_n.size()) throw InvalidArgument("lambda and log N lengths differ");
  std::vector<double> lam;
  std::vector<double> y;
  for (std::size_t j = 0; j < lambda.size(); ++j) {
    const double l = lambda[j];
    if (l < lambda_lo || l > lambda_hi) continue;
    if (!(log_n[j] < 0.0) || !std::isfinite(log_n[j])) {
      throw InvalidArgument("IDS value at lambda = " + format_double(l) +
                            " is not strictly inside (0, 1)");
    }
    check_fit_lambda(l, with_log_correction);
    lam.push_back(l);
    y.push_back(std::log(-log_n[j]));
  }
  return solve_fit(lam, y, std::vector<double>(lam.size(), 0.0), with_log_correction, lambda_lo,
                   lambda_hi);
}

std::vector<double> log_grid(double lo, double hi, int per_decade) {
  if (!(lo > 0.0 && hi >= lo) || per_decade < 1) throw InvalidArgument("log grid needs 0 < lo <= hi");
  const int n = std::max(0, static_cast<int>(std::lround(per_decade * std::log10(hi / lo))));
  std::vector<double> out;
  for (int k = 0; k <= n; ++k) out.push_back(n == 0 ? lo : lo * std::pow(hi / lo, static_cast<double>(k) / n));
  if (n > 0) out.back() = hi;
  return out;
}

void write_csv(std::ostream& os, const IdsEstimate& ids) {
  os << "lambda,mean,stderr,n,bc,R,truncated\n";
  for (std::size_t j = 0; j < ids.lambda.size(); ++j) {
    os << format_double(ids.lambda[j]) << ',' << format_double(ids.mean[j]) << ','
       << format_double(ids.std_error[j]) << ',' << ids.n_realizations << ',' << to_string(ids.bc) << ','
       << ids.box.R << ',' << (ids.truncated[j] ? 1 : 0) << '\n';
  }
}

void write_json(std::ostream& os, const LifshitzFit& fit) {
  nlohmann::ordered_json j;
  j["L_hat"] = fit.L_hat;
  j["L_stderr"] = fit.L_stderr;
  j["c_hat"] = fit.c_hat;
  j["c_stderr"] = fit.c_stderr;
  j["m_hat"] = fit.m_hat ? nlohmann::ordered_json(*fit.m_hat) : nlohmann::ordered_json(nullptr);
  j["m_stderr"] = fit.m_stderr ? nlohmann::ordered_json(*fit.m_stderr) : nlohmann::ordered_json(nullptr);
  j["lambda_lo"] = fit.lambda_lo;
  j["lambda_hi"] = fit.lambda_hi;
  j["n_points"] = fit.n_points;
  j["weighted"] = fit.weighted;
  j["residual_norm"] = fit.residual_norm;
  os << j.dump() << '\n';
}

}  // namespace trapping
