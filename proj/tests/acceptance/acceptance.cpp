// Acceptance suite: one PASS/FAIL line per criterion. Oracles are computed
// here, independently of the library code paths they check.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "trapping/assumptions.hpp"
#include "trapping/cli/run.hpp"
#include "trapping/error.hpp"
#include "trapping/hamiltonian.hpp"
#include "trapping/ids.hpp"
#include "trapping/io.hpp"
#include "trapping/survival.hpp"

using namespace trapping;
namespace fs = std::filesystem;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;
constexpr double kKappa = 0.5;

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

std::string num(double x, int precision = 4) {
  std::ostringstream os;
  os.precision(precision);
  os << x;
  return os.str();
}

SeedPath seed(std::uint64_t master, std::uint64_t r = 0) { return {master, r, StreamTag::kPotential}; }

PotentialField constant_field(const Window& w, double v) {
  return PotentialField(w, std::vector<double>(w.site_count(), v));
}

double principal_or_inf(const PotentialField& V, BoundaryCondition bc) {
  try {
    return principal_eigenpair(assemble(V, bc, kKappa)).value;
  } catch (const FullyTrapped&) {
    return kInf;
  }
}

// Spectrum of the free path with n sites and jump rate J.
std::vector<double> path_spectrum(int n, double J, BoundaryCondition bc) {
  std::vector<double> out;
  for (int k = 0; k < n; ++k) {
    out.push_back(bc == BoundaryCondition::kDirichlet ? 2.0 * J * (1.0 - std::cos((k + 1) * kPi / (n + 1)))
                                                      : 2.0 * J * (1.0 - std::cos(k * kPi / n)));
  }
  return out;
}

std::vector<ModelSpec> four_models() {
  return {ModelSpec::bernoulli(0.25, TrapProfile::spike(kInf)), ModelSpec::iid_tail(2.0),
          ModelSpec::poisson(0.15, TrapProfile::ball(1.0, 1.5)),
          ModelSpec::perturbed_lattice(2.0, TrapProfile::ball(0.5, 0.8))};
}

// 1. Free Dirichlet and Neumann spectra against tensor cosine formulas.
Outcome closed_form_spectrum() {
  Stopwatch clock;
  double worst = 0.0;
  int cases = 0;
  for (const auto bc : {BoundaryCondition::kDirichlet, BoundaryCondition::kNeumann}) {
    for (double h : {1.0, 0.5}) {
      const double J = kKappa / (h * h);
      for (int n : {2, 3, 7, 16}) {
        const Window w = Window::from_corner(1, {0, 0, 0}, {n, 1, 1}, h);
        const auto H = assemble(constant_field(w, 0.0), bc, kKappa);
        const auto got = lowest_eigenvalues(H, n);
        const auto want = path_spectrum(n, J, bc);
        for (int k = 0; k < n; ++k) worst = std::max(worst, std::abs(got[k] - want[k]));
        ++cases;
      }
      for (auto [a, b] : {std::pair{3, 4}, std::pair{5, 5}, std::pair{6, 9}}) {
        const Window w = Window::from_corner(2, {-2, 1, 0}, {a, b, 1}, h);
        const auto H = assemble(constant_field(w, 0.0), bc, kKappa);
        const auto got = lowest_eigenvalues(H, a * b);
        std::vector<double> want;
        for (double x : path_spectrum(a, J, bc)) {
          for (double y : path_spectrum(b, J, bc)) want.push_back(x + y);
        }
        std::sort(want.begin(), want.end());
        for (int k = 0; k < a * b; ++k) worst = std::max(worst, std::abs(got[k] - want[k]));
        ++cases;
      }
    }
  }
  const double s = clock.seconds();
  return {worst <= 1e-10 && s < 1.0,
          std::to_string(cases) + " spectra, max abs error " + num(worst) + ", " + num(s, 3) + " s"};
}

// 2. Bracketing, potential monotonicity and domain monotonicity.
Outcome bracketing_suite() {
  Stopwatch clock;
  const Window big = Window::centered(2, 5);
  const Window small = Window::from_corner(2, {-3, -2, 0}, {6, 5, 1});
  int realizations = 0;
  int neumann_violations = 0;
  int potential_violations = 0;
  int domain_violations = 0;
  const auto models = four_models();
  for (std::size_t m = 0; m < models.size(); ++m) {
    for (std::uint64_t r = 0; r < 50; ++r) {
      const auto V = generate(models[m], big, seed(200 + m, r));
      const auto extra = generate(models[m], big, seed(300 + m, r));
      std::vector<double> summed(big.site_count());
      for (std::size_t i = 0; i < summed.size(); ++i) summed[i] = V[i] + extra[i];
      const PotentialField bigger(big, summed);

      const double d1 = principal_or_inf(V, BoundaryCondition::kDirichlet);
      const double n1 = principal_or_inf(V, BoundaryCondition::kNeumann);
      const double d1_more = principal_or_inf(bigger, BoundaryCondition::kDirichlet);
      const double d1_small = principal_or_inf(V.restrict(small), BoundaryCondition::kDirichlet);
      const auto above = [](double a, double b) { return a > b + 1e-9 * std::max(1.0, std::abs(b)); };
      neumann_violations += above(n1, d1);
      potential_violations += above(d1, d1_more);
      domain_violations += above(d1, d1_small);
      ++realizations;
    }
  }
  const double s = clock.seconds();
  const int total = neumann_violations + potential_violations + domain_violations;
  return {total == 0 && realizations >= 200 && s < 120.0,
          std::to_string(realizations) + " realizations over 4 models; violations N<=D " +
              std::to_string(neumann_violations) + ", potential " + std::to_string(potential_violations) +
              ", domain " + std::to_string(domain_violations) + "; " + num(s, 3) + " s"};
}

// 3. Monte Carlo against the exact eigen-expansion on killed boxes.
Outcome survival_oracle() {
  Stopwatch clock;
  const std::vector<double> times{1.0, 2.0, 4.0, 8.0};
  const auto models = four_models();
  int comparisons = 0;
  int outside = 0;
  double worst_z = 0.0;
  for (int f = 0; f < 20; ++f) {
    const int d = f < 10 ? 1 : 2;
    const Window w = d == 1 ? Window::centered(1, 40) : Window::centered(2, 10);
    const auto V = generate(models[static_cast<std::size_t>(f % 4)], w, seed(400, static_cast<std::uint64_t>(f)));
    const Site x{0, 0, 0};
    const auto mc = mc_survival(V, kKappa, times, x, 100000, seed(401, static_cast<std::uint64_t>(f)).with_tag(StreamTag::kWalk),
                                ExitPolicy::kKill, 0);
    const DirichletSurvival exact(V, w, x, kKappa);
    for (std::size_t i = 0; i < times.size(); ++i) {
      const double diff = std::abs(mc[i].estimate - exact(times[i]));
      if (mc[i].std_error > 0.0) worst_z = std::max(worst_z, diff / mc[i].std_error);
      outside += diff > 3.0 * mc[i].std_error + 1e-12;
      ++comparisons;
    }
  }
  const double s = clock.seconds();
  // Chance that an exact estimator leaves 3 stderr somewhere among the comparisons.
  const double false_alarm = 1.0 - std::pow(1.0 - std::erfc(3.0 / std::sqrt(2.0)), comparisons);
  return {outside == 0 && s < 300.0,
          std::to_string(comparisons) + " comparisons, " + std::to_string(outside) + " beyond 3 stderr, max |z| " +
              num(worst_z, 3) + " (chance level of any exceedance " + num(false_alarm, 2) + "), " + num(s, 3) + " s"};
}

// 4. u = exp(-c t) for a constant potential.
Outcome constant_potential() {
  const double c = 0.37;
  double exact_err = 0.0;
  bool mc_ok = true;
  std::string mc_detail;
  const Site x{0, 0, 0};
  {
    // Walls at distance 200: the exit probability by t = 8 is below 1e-100.
    const Window w = Window::centered(1, 200);
    const DirichletSurvival u(constant_field(w, c), w, x, kKappa);
    for (double t : {0.5, 1.0, 2.0, 4.0, 8.0}) exact_err = std::max(exact_err, std::abs(u(t) - std::exp(-c * t)));
  }
  {
    // Closer walls in d = 2: the free exit probability factors out.
    const Window w = Window::centered(2, 6);
    const DirichletSurvival u(constant_field(w, c), w, x, kKappa);
    for (double t : {0.5, 1.0, 2.0, 4.0, 8.0}) {
      const double want = std::exp(-c * t) * (1.0 - free_exit_probability(w, kKappa, t, x));
      exact_err = std::max(exact_err, std::abs(u(t) - want));
    }
  }
  {
    const std::vector<double> times{0.5, 1.0, 2.0, 4.0, 8.0};
    const Window w = Window::centered(2, 40);
    const auto mc = mc_survival(constant_field(w, c), kKappa, times, x, 20000, seed(5).with_tag(StreamTag::kWalk));
    for (std::size_t i = 0; i < times.size(); ++i) {
      const double diff = std::abs(mc[i].estimate - std::exp(-c * times[i]));
      mc_ok = mc_ok && diff <= 3.0 * mc[i].std_error + 1e-12;
    }
    // The quenched driver on a model whose every site carries the same soft trap.
    const double ts[] = {1.0, 2.0, 4.0, 8.0};
    CurveOptions o;
    o.n_paths = 20000;
    const auto curve = quenched_curve(ModelSpec::bernoulli(1.0, TrapProfile::spike(c)), 1, 1.0, seed(6), x, ts, o);
    for (std::size_t i = 0; i < curve.t.size(); ++i) {
      const double diff = std::abs(curve.mc[i] - std::exp(-c * curve.t[i]));
      mc_ok = mc_ok && diff <= 3.0 * curve.mc_stderr[i] + 1e-12;
    }
    mc_detail = "MC within 3 stderr: " + std::string(mc_ok ? "yes" : "no");
  }
  return {exact_err <= 1e-10 && mc_ok, "exact max abs error " + num(exact_err) + ", " + mc_detail};
}

// 5. Lifshitz exponent of 1D hard Bernoulli traps, and a Monte Carlo cross-check.
Outcome lifshitz_exponent() {
  Stopwatch clock;
  const double p = 0.5;
  const auto grid = log_grid(1e-5, 1e-3, 16);
  std::vector<double> log_n;
  for (double l : grid) log_n.push_back(log_ids_1d_hard_exact(p, kKappa, l));
  const auto fit = fit_lifshitz_log(grid, log_n, 1e-5, 1e-3, false);
  const double fit_seconds = clock.seconds();
  const bool exponent_ok = fit.L_hat >= 0.45 && fit.L_hat <= 0.55 && fit_seconds < 10.0;

  const std::vector<double> lambdas{0.05, 0.1, 0.2, 0.4};
  IdsOptions o;
  o.max_eigenvalues = 128;
  o.threads = 0;
  const auto est = estimate_ids(ModelSpec::bernoulli(p, TrapProfile::spike(kInf)), BoundaryCondition::kDirichlet,
                                BoxRegion{1, 64, 1.0}, lambdas, 500, seed(55), o);
  bool cross_ok = true;
  double worst = 0.0;
  for (std::size_t j = 0; j < lambdas.size(); ++j) {
    const double series = ids_1d_hard_exact(p, kKappa, lambdas[j]);
    const double bias = std::abs(series - ids_1d_hard_box(p, kKappa, lambdas[j], 128));
    const double allowed = 3.0 * est.std_error[j] + bias;
    worst = std::max(worst, std::abs(est.mean[j] - series) / allowed);
    cross_ok = cross_ok && !est.truncated[j] && std::abs(est.mean[j] - series) <= allowed;
  }
  return {exponent_ok && cross_ok, "L_hat " + num(fit.L_hat, 6) + " (" + num(fit_seconds, 3) +
                                       " s); Monte Carlo deviation / (3 stderr + box bias) max " + num(worst, 3)};
}

// 6. psi for Poisson traps in d = 1.
Outcome poisson_psi_formula() {
  const double lambda_1 = kPi * kPi / 8.0;
  const double omega_1 = 2.0;
  const RateFunction phi{1.0 * omega_1 * std::sqrt(lambda_1), 0.5, 0.0};
  const RateFunction lib = poisson_rate_function(1, 1.0, kKappa);
  double worst = std::abs(lib.c - phi.c) / phi.c + std::abs(lib.L - phi.L);
  for (double y : {1.0, 10.0, 100.0}) {
    const double want = 2.0 * y * y / (kPi * kPi);
    worst = std::max(worst, std::abs(asymptotic_inverse(phi, y) - want) / want);
    worst = std::max(worst, std::abs(poisson_psi(1, 1.0, y, kKappa) - want) / want);
  }
  return {worst <= 1e-8, "max relative error " + num(worst)};
}

// 7. Scaling fit recovery and the Borel-Cantelli inputs.
Outcome scaling_recovery() {
  Stopwatch clock;
  std::vector<double> t;
  std::vector<double> u;
  std::vector<double> u_exp;
  for (double k = 2.0; k <= 8.0 + 1e-12; k += 0.25) {
    const double tk = std::exp(k);
    t.push_back(tk);
    u.push_back(std::exp(-tk / (k * k)));
    u_exp.push_back(std::exp(-0.3 * tk / 1000.0));
  }
  const auto s1 = scaling_check(t, u);
  const auto s2 = scaling_check(t, u_exp);
  const bool fit_ok = std::abs(s1.slope - 2.0) <= 1e-2 && std::abs(s2.slope) <= s2.stderr_slope + 1e-12;

  // Tail probability of a small principal eigenvalue, with phi the known rate
  // c x^{1/2}, c = pi sqrt(kappa) log(1/(1-p)). The event needs a trap-free
  // gap of about log2(t) / sqrt(1 - eps) sites; doubling t doubles the box, so
  // the expected frequency only falls at every doubling once the gap grows by
  // at least two sites, i.e. eps >= 3/4.
  const double p = 0.5;
  const auto spec = ModelSpec::bernoulli(p, TrapProfile::spike(kInf));
  const RateFunction phi{kPi * std::sqrt(kKappa) * std::log(1.0 / (1.0 - p)), 0.5, 0.0};
  std::vector<double> p_hat;
  std::string tail;
  for (double tt : {32.0, 64.0, 128.0, 256.0}) {
    const auto tp = eigenvalue_tail_probability(spec, 1, 1.0, tt, 0.75, phi, 500, seed(77), 0);
    p_hat.push_back(tp.p_hat);
    tail += (tail.empty() ? "" : " ") + num(tp.p_hat, 3);
  }
  bool nonincreasing = p_hat.front() > 0.0;
  for (std::size_t i = 1; i < p_hat.size(); ++i) nonincreasing = nonincreasing && p_hat[i] <= p_hat[i - 1];

  // Best sub-box scan followed by the cutoff transfer to a Dirichlet bound.
  const auto chain_spec = ModelSpec::bernoulli(0.3, TrapProfile::spike(kInf));
  const Window region = Window::centered(1, 40);
  int holds = 0;
  for (std::uint64_t r = 0; r < 50; ++r) {
    const auto V = generate(chain_spec, region, seed(78, r));
    const auto scan = best_subbox_scan(V, region, 8, 8, kKappa);
    if (!std::isfinite(scan.lambda_n_min)) continue;
    const auto H = assemble(V.restrict(scan.best_cell), BoundaryCondition::kNeumann, kKappa);
    holds += scan.lambda_d_at_best <= cutoff_transfer(H, principal_eigenpair(H), 0.25) * (1.0 + 1e-9);
  }
  const double s = clock.seconds();
  return {fit_ok && nonincreasing && holds == 50 && s < 1200.0,
          "slopes " + num(s1.slope, 6) + " and " + num(s2.slope) + " (stderr " + num(s2.stderr_slope) +
              "); tail p_hat " + tail + "; cutoff chain " + std::to_string(holds) + "/50; " + num(s, 3) + " s"};
}

// 8. Certified lower <= spectral upper, and Monte Carlo inside the sandwich.
Outcome sandwich() {
  struct Run {
    ModelSpec spec;
    int d;
    std::vector<double> t;
  };
  const std::vector<Run> runs{
      {ModelSpec::bernoulli(0.3, TrapProfile::spike(2.0)), 1, {1, 2, 4, 8, 16, 32, 64}},
      {ModelSpec::bernoulli(0.2, TrapProfile::spike(kInf)), 1, {1, 2, 4, 8, 16, 32, 64}},
      {ModelSpec::iid_tail(2.0), 1, {1, 2, 4, 8, 16, 32}},
      {ModelSpec::poisson(0.3, TrapProfile::ball(1.0, 1.0)), 1, {1, 2, 4, 8, 16, 32}},
      {ModelSpec::perturbed_lattice(2.0, TrapProfile::ball(0.5, 1.0)), 1, {1, 2, 4, 8, 16}},
      {ModelSpec::bernoulli(0.15, TrapProfile::spike(kInf)), 2, {1, 2, 4, 8}},
      {ModelSpec::poisson(0.2, TrapProfile::ball(1.0, 2.0)), 2, {1, 2, 4, 8}},
  };
  int points = 0;
  int inverted = 0;
  int outside = 0;
  double worst_z = 0.0;
  std::string worst_at = "none";
  for (std::size_t k = 0; k < runs.size(); ++k) {
    // Points reach u ~ 1e-8; fewer paths leave the sample stderr unreliable there.
    CurveOptions o;
    o.n_paths = 1u << 20;
    o.threads = 0;
    const auto c = quenched_curve(runs[k].spec, runs[k].d, 1.0, seed(800 + k), {0, 0, 0}, runs[k].t, o);
    for (std::size_t i = 0; i < c.t.size(); ++i) {
      ++points;
      inverted += !(c.lower[i] <= c.upper[i]);
      const double slack = 3.0 * c.mc_stderr[i] + 1e-12;
      outside += c.mc[i] < c.lower[i] - slack || c.mc[i] > c.upper[i] + slack;
      const double miss = std::max(c.lower[i] - c.mc[i], c.mc[i] - c.upper[i]);
      if (c.mc_stderr[i] > 0.0 && miss / c.mc_stderr[i] > worst_z) {
        worst_z = miss / c.mc_stderr[i];
        worst_at = "curve " + std::to_string(k) + " t = " + num(c.t[i]);
      }
    }
  }
  return {inverted == 0 && outside == 0, std::to_string(runs.size()) + " curves, " + std::to_string(points) +
                                             " points; lower > upper " + std::to_string(inverted) +
                                             ", MC outside " + std::to_string(outside) + "; largest miss " +
                                             num(worst_z, 3) + " stderr at " + worst_at};
}

// 9. Assumption checkers on models with known answers.
Outcome assumption_checkers() {
  Stopwatch clock;
  // Events are {lambda^N_1(box) <= lambda}; lambda is the median of that
  // eigenvalue over independent draws so the events are not degenerate.
  auto median_lambda = [](const ModelSpec& spec, const Window& box) {
    std::vector<double> v;
    for (std::uint64_t r = 0; r < 201; ++r) v.push_back(principal_or_inf(generate(spec, box, seed(901, r)), BoundaryCondition::kNeumann));
    std::nth_element(v.begin(), v.begin() + 100, v.end());
    return v[100];
  };
  const std::vector<ModelSpec> independent{ModelSpec::bernoulli(0.5, TrapProfile::spike(kInf)),
                                           ModelSpec::iid_tail(1.5),
                                           ModelSpec::bernoulli(0.3, TrapProfile::spike(3.0)),
                                           ModelSpec::iid_tail(3.0)};
  int covered = 0;
  int layouts = 0;
  for (int k = 0; k < 20; ++k) {
    const ModelSpec& spec = independent[static_cast<std::size_t>(k % 4)];
    const int d = k < 12 ? 1 : 2;
    const int side = d == 1 ? 8 : 4;
    const int n_boxes = 2 + k % 3;
    const double r = (side - 1) * std::sqrt(static_cast<double>(d)) + 1.0 + k % 5;
    BoxLayout layout;
    layout.r = r;
    const int step = side + static_cast<int>(std::ceil(r)) + 1;
    for (int b = 0; b < n_boxes; ++b) {
      Site lo{0, 0, 0};
      lo[0] = b * step;
      layout.boxes.push_back(Window::from_corner(d, lo, {side, side, 1}));
    }
    const double lambda = median_lambda(spec, layout.boxes.front());
    CorrelationOptions o;
    o.threads = 0;
    const auto rep = correlation_gap(spec, layout, lambda, 1000, seed(910, static_cast<std::uint64_t>(k)), o);
    covered += rep.ci.first <= 0.0 && 0.0 <= rep.ci.second;
    ++layouts;
  }
  const bool correlation_ok = covered >= 19;

  const auto moment = moment_estimate(ModelSpec::iid_tail(1.0), 1, 1.0, 2.0, 2000, seed(920), 0);

  int violations = 0;
  const double ts[] = {10.0, 100.0, 1000.0};
  for (const auto& spec : {ModelSpec::bernoulli(0.5, TrapProfile::spike(2.0)),
                           ModelSpec::bernoulli(0.3, TrapProfile::ball(1.0, 1.0))}) {
    for (const auto& pt : sup_potential_scan(spec, 1, 1.0, ts, 1.0, 200, seed(930), 0)) violations += pt.assumption_failure;
  }
  const double s = clock.seconds();
  return {correlation_ok && moment.tail_flag && violations == 0 && s < 300.0,
          "gap CI covers 0 on " + std::to_string(covered) + "/" + std::to_string(layouts) +
              " layouts; divergence flag " + (moment.tail_flag ? "raised" : "not raised") +
              "; sup-scan violations " + std::to_string(violations) + "; " + num(s, 3) + " s"};
}

// 10. Rerunning from the manifest reproduces every artifact byte for byte.
Outcome manifest_determinism() {
  using cli::Json;
  const fs::path root = fs::temp_directory_path() / "trapping-acceptance";
  fs::remove_all(root);
  const Json hard = {{"variant", "bernoulli"}, {"p", 0.3}, {"profile", {{"shape", "spike"}, {"height", "inf"}}}};
  const std::vector<Json> configs{
      {{"operation", "quenched"},
       {"seed", 101},
       {"model", {{"variant", "poisson"}, {"nu", 0.3}, {"profile", {{"shape", "ball"}, {"radius", 1}, {"height", 1}}}}},
       {"geometry", {{"d", 1}, {"R", 8}}},
       {"params", {{"t", {1, 2, 4, 8, 16}}, {"n_paths", 20000}}},
       {"plots", true}},
      {{"operation", "ids"},
       {"seed", 102},
       {"model", hard},
       {"geometry", {{"d", 2}, {"R", 4}}},
       {"params", {{"lambda_grid", {{"lo", 0.05}, {"hi", 1.0}, {"per_decade", 8}}}, {"n_realizations", 100}}},
       {"plots", true}},
      {{"operation", "survival"},
       {"seed", 103},
       {"model", hard},
       {"geometry", {{"d", 2}, {"R", 6}}},
       {"params", {{"t", {1, 2, 4}}, {"n_paths", 20000}, {"exit", "kill"}}}},
      {{"operation", "assumptions"},
       {"seed", 104},
       {"model", hard},
       {"geometry", {{"d", 1}, {"R", 1}}},
       {"params", {{"check", "tail-probability"}, {"t", {16, 32}}, {"rate", {{"c", 1.54}, {"L", 0.5}}}, {"n_realizations", 200}}}},
  };
  int artifacts = 0;
  int identical = 0;
  for (std::size_t k = 0; k < configs.size(); ++k) {
    cli::RunOptions opts;
    opts.threads = 1;
    opts.quiet = true;
    opts.output_dir = (root / ("first-" + std::to_string(k))).string();
    std::ostringstream out;
    std::ostringstream err;
    const auto first = cli::run_json(configs[k], opts, out, err);
    if (first.exit_code != cli::kOk) return {false, "run " + std::to_string(k) + " exited " + std::to_string(first.exit_code)};
    cli::RunOptions again;
    again.quiet = true;
    again.output_dir = (root / ("again-" + std::to_string(k))).string();
    const auto second = cli::run_manifest(first.manifest, again, out, err);
    for (std::size_t i = 0; i < first.outputs.size(); ++i) {
      ++artifacts;
      auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream os;
        os << in.rdbuf();
        return os.str();
      };
      identical += i < second.outputs.size() && slurp(first.outputs[i]) == slurp(second.outputs[i]);
    }
  }
  fs::remove_all(root);
  return {artifacts > 0 && identical == artifacts,
          std::to_string(identical) + "/" + std::to_string(artifacts) + " artifacts identical across " +
              std::to_string(configs.size()) + " single-threaded reruns"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"closed-form free spectra", closed_form_spectrum},
      {"bracketing and monotonicity suite", bracketing_suite},
      {"survival oracle equivalence", survival_oracle},
      {"constant-potential exactness", constant_potential},
      {"Lifshitz exponent of 1D hard traps", lifshitz_exponent},
      {"psi for Poisson traps in d = 1", poisson_psi_formula},
      {"scaling fit and Borel-Cantelli inputs", scaling_recovery},
      {"survival sandwich validity", sandwich},
      {"assumption checkers", assumption_checkers},
      {"determinism from the manifest", manifest_determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << i + 1 << "] " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  std::cout << criteria.size() - failures << "/" << criteria.size() << " criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
