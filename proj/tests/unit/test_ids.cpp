#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "trapping/error.hpp"
#include "trapping/ids.hpp"

using namespace trapping;

namespace {

constexpr double kPi = std::numbers::pi;

ModelSpec hard_bernoulli(double p) { return ModelSpec::bernoulli(p, TrapProfile::spike(kInfinity)); }

// Expected eigenvalue count per site on the Dirichlet path of n sites with hard
// traps, by enumerating all 2^n trap configurations.
double enumerate_box_mean(double p, double kappa, double lambda, int n) {
  double total = 0.0;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    double prob = 1.0;
    for (int i = 0; i < n; ++i) prob *= (mask >> i & 1u) ? p : 1.0 - p;
    int count = 0;
    int run = 0;
    for (int i = 0; i <= n; ++i) {
      if (i < n && !(mask >> i & 1u)) {
        ++run;
        continue;
      }
      for (int k = 1; k <= run; ++k) count += 2 * kappa * (1 - std::cos(k * kPi / (run + 1))) <= lambda + 1e-12;
      run = 0;
    }
    total += prob * count;
  }
  return total / n;
}

}  // namespace

TEST_CASE("weyl count") {
  CHECK(weyl_count({1, 2, 1.0}, 0.5, 1.0) == 3);
  CHECK(weyl_count({2, 3, 1.0}, 0.5, -0.1) == 0);
  CHECK(weyl_count({2, 3, 1.0}, 0.5, 4 * 2 * 0.5) == 36);
  CHECK(weyl_count({3, 2, 1.0}, 0.5, 4 * 3 * 0.5) == 64);
  CHECK(weyl_count({2, 3, 1.0}, 0.5, 0.0) == 1);
  // counts agree with the assembled free Neumann spectrum
  const BoxRegion box{2, 4, 1.0};
  const Window w(box);
  const auto H = assemble(PotentialField(w, std::vector<double>(w.site_count(), 0.0)),
                          BoundaryCondition::kNeumann, 0.5);
  const DenseSpectrum s = dense_spectrum(H.matrix(), false);
  for (double lam : {0.1, 0.5, 1.0, 1.7}) {
    long expect = 0;
    for (int i = 0; i < s.values.size(); ++i) expect += s.values[i] <= lam + 1e-12;
    CHECK(weyl_count(box, 0.5, lam) == expect);
  }
}

TEST_CASE("ids_1d_hard_exact against direct summation") {
  double direct = 0.0;
  for (int l = 2; l < 200; ++l) direct += 0.25 * std::pow(0.5, l) * std::floor((l + 1) / 3.0);
  CHECK(ids_1d_hard_exact(0.5, 0.5, 0.5) == doctest::Approx(direct).epsilon(1e-13));
  // lambda below the first gap ground state 2 kappa (1 - cos(pi / 2)) = 1 counts nothing from l = 1
  double direct2 = 0.0;
  for (int l = 1; l < 300; ++l) {
    int c = 0;
    for (int k = 1; k <= l; ++k) c += 1 - std::cos(k * kPi / (l + 1)) <= 0.9;
    direct2 += 0.16 * std::pow(0.6, l) * c;
  }
  CHECK(ids_1d_hard_exact(0.4, 0.5, 0.9) == doctest::Approx(direct2).epsilon(1e-12));
  CHECK(ids_1d_hard_exact(0.5, 0.5, 0.0) == 0.0);
  CHECK(ids_1d_hard_exact(0.5, 0.5, -1.0) == 0.0);
  // whole spectrum: one state per non-trap site
  CHECK(ids_1d_hard_exact(0.3, 0.5, 10.0) == doctest::Approx(0.7).epsilon(1e-12));
  // deep tail stays representable in log space
  const double deep = log_ids_1d_hard_exact(0.5, 0.5, 1e-5);
  CHECK(std::isfinite(deep));
  CHECK(deep < -400.0);
}

TEST_CASE("finite-box expectation matches configuration enumeration") {
  for (int n : {1, 2, 5, 10}) {
    for (double lam : {0.2, 0.7, 1.5, 5.0}) {
      CHECK(ids_1d_hard_box(0.35, 0.5, lam, n) ==
            doctest::Approx(enumerate_box_mean(0.35, 0.5, lam, n)).epsilon(1e-12));
    }
  }
}

TEST_CASE("estimate_ids: trivial limits") {
  const BoxRegion box{1, 8, 1.0};
  const std::vector<double> grid{-0.5, 2.0, 4.0};
  const auto est = estimate_ids(ModelSpec::bernoulli(0.0, TrapProfile::spike(1.0)), BoundaryCondition::kNeumann,
                                box, grid, 3, {1, 0, StreamTag::kPotential});
  CHECK(est.mean[0] == 0.0);
  CHECK(est.mean[2] == 1.0);
  CHECK(est.std_error[2] == 0.0);
  CHECK(!est.truncated[2]);
}

TEST_CASE("estimate_ids: monotone, coupled, and budget flagged") {
  const BoxRegion box{2, 5, 1.0};
  const auto spec = ModelSpec::bernoulli(0.3, TrapProfile::ball(1.0, 2.0));
  const auto grid = log_grid(0.05, 6.0, 8);
  const SeedPath seed{3, 0, StreamTag::kPotential};
  const auto d = estimate_ids(spec, BoundaryCondition::kDirichlet, box, grid, 20, seed);
  const auto n = estimate_ids(spec, BoundaryCondition::kNeumann, box, grid, 20, seed);
  for (std::size_t j = 1; j < grid.size(); ++j) CHECK(d.mean[j] >= d.mean[j - 1]);
  for (std::size_t r = 0; r < 20; ++r)
    for (std::size_t j = 0; j < grid.size(); ++j) CHECK(n.counts[r][j] >= d.counts[r][j]);
  CHECK(n.truncated.back());
  // parallel run is identical
  IdsOptions par;
  par.threads = 3;
  const auto d3 = estimate_ids(spec, BoundaryCondition::kDirichlet, box, grid, 20, seed, par);
  CHECK(d3.mean == d.mean);
}

TEST_CASE("estimate_ids agrees with the exact 1D hard-trap expectation") {
  const BoxRegion box{1, 64, 1.0};
  const std::vector<double> grid{0.1, 0.2, 0.3, 0.45};
  const auto est = estimate_ids(hard_bernoulli(0.5), BoundaryCondition::kDirichlet, box, grid, 200,
                                {11, 0, StreamTag::kPotential});
  for (std::size_t j = 0; j < grid.size(); ++j) {
    CHECK(!est.truncated[j]);
    const double finite = ids_1d_hard_box(0.5, 0.5, grid[j], 128);
    const double series = ids_1d_hard_exact(0.5, 0.5, grid[j]);
    CHECK(std::abs(est.mean[j] - finite) <= 3 * est.std_error[j]);
    CHECK(std::abs(est.mean[j] - series) <= 3 * est.std_error[j] + std::abs(series - finite));
  }
}

TEST_CASE("bracketing bounds") {
  const BoxRegion box{1, 8, 1.0};
  SUBCASE("certain events") {
    const auto r = bracketing_bounds(ModelSpec::bernoulli(0.0, TrapProfile::spike(1.0)), box, 0.5, 30,
                                     {1, 0, StreamTag::kPotential});
    CHECK(r.p_dirichlet == 1.0);
    CHECK(r.p_neumann == 1.0);
    CHECK(r.lower == doctest::Approx(1.0 / 16));
    REQUIRE(r.upper.has_value());
    CHECK(*r.upper == doctest::Approx(r.c4));
    CHECK(r.c4 == doctest::Approx(weyl_count(box, 0.5, 1.0) / 16.0));
  }
  SUBCASE("random model: ordering and exact bracketing") {
    const auto r = bracketing_bounds(ModelSpec::bernoulli(0.3, TrapProfile::spike(1.0)), {2, 4, 1.0}, 0.3,
                                     100, {2, 0, StreamTag::kPotential}, 2);
    CHECK(r.bracketing_violations == 0);
    CHECK(r.p_neumann >= r.p_dirichlet);
    CHECK(r.lower <= *r.upper + 3 * r.joint_stderr);
  }
  SUBCASE("upper bound unavailable outside (0, 1)") {
    const auto r = bracketing_bounds(ModelSpec::iid_tail(1.0), box, 1.5, 30, {1, 0, StreamTag::kPotential});
    CHECK(!r.upper.has_value());
  }
}

TEST_CASE("fit_lifshitz on synthetic inputs") {
  IdsEstimate ids;
  ids.lambda = log_grid(1e-4, 1e-1, 8);
  for (double l : ids.lambda) {
    ids.mean.push_back(std::exp(-std::pow(l, -0.5)));
    ids.std_error.push_back(0.0);
  }
  const auto fit = fit_lifshitz(ids, 1e-4, 1e-1, false);
  CHECK(fit.L_hat == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(fit.c_hat == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(fit.residual_norm < 1e-12);
  CHECK(!fit.weighted);

  std::vector<double> logn;
  const auto grid = log_grid(1e-8, 1e-2, 8);
  for (double l : grid) logn.push_back(-(1.0 / l) / std::log(1.0 / l));
  const auto fit2 = fit_lifshitz_log(grid, logn, 1e-8, 1e-2, true);
  CHECK(fit2.L_hat == doctest::Approx(1.0).epsilon(1e-8));
  REQUIRE(fit2.m_hat.has_value());
  CHECK(*fit2.m_hat == doctest::Approx(-1.0).epsilon(1e-8));

  // weighted path with positive stderr recovers the same exact law
  for (auto& s : ids.std_error) s = 1e-3;
  const auto fit3 = fit_lifshitz(ids, 1e-4, 1e-2, false);
  CHECK(fit3.weighted);
  CHECK(fit3.L_hat == doctest::Approx(0.5).epsilon(1e-8));

  ids.mean[2] = 0.0;
  CHECK_THROWS_WITH_AS(fit_lifshitz(ids, 1e-4, 1e-1, false), doctest::Contains("lambda = "), InvalidArgument);
  CHECK_THROWS_AS(fit_lifshitz(ids, 1e-1, 1e-1, false), InvalidArgument);
}

TEST_CASE("Lifshitz exponent of the 1D hard-trap series is 1/2") {
  const auto grid = log_grid(1e-5, 1e-3, 16);
  std::vector<double> logn;
  for (double l : grid) logn.push_back(log_ids_1d_hard_exact(0.5, 0.5, l));
  const auto fit = fit_lifshitz_log(grid, logn, 1e-5, 1e-3, false);
  CHECK(fit.L_hat >= 0.45);
  CHECK(fit.L_hat <= 0.55);
}

TEST_CASE("asymptotic inverse") {
  const RateFunction sq{1.0, 2.0, 0.0};
  CHECK(asymptotic_inverse(sq, 4.0) == doctest::Approx(2.0).epsilon(1e-13));
  const auto phi = poisson_rate_function(1, 1.0);
  CHECK(phi.c == doctest::Approx(2.0 * std::sqrt(kPi * kPi / 8)).epsilon(1e-14));
  for (double y : {1.0, 10.0, 100.0}) {
    const double expect = 2 * y * y / (kPi * kPi);
    CHECK(std::abs(asymptotic_inverse(phi, y) / expect - 1) < 1e-8);
    CHECK(poisson_psi(1, 1.0, y) == doctest::Approx(expect).epsilon(1e-13));
  }
  std::mt19937_64 eng(5);
  std::uniform_real_distribution<double> uc(0.1, 10.0);
  std::uniform_real_distribution<double> uL(0.2, 4.0);
  std::uniform_real_distribution<double> uy(0.5, 1e4);
  for (int i = 0; i < 100; ++i) {
    const RateFunction f{uc(eng), uL(eng), 0.0};
    const double y = uy(eng);
    CHECK(f(asymptotic_inverse(f, y)) == doctest::Approx(y).epsilon(1e-10));
  }
  const RateFunction logged{1.0, 1.5, -0.75};
  double prev = 0.0;
  for (double y = 4.0; y < 1e3; y *= 1.7) {
    const double x = asymptotic_inverse(logged, y);
    CHECK(x > prev);
    CHECK(logged(x) == doctest::Approx(y).epsilon(1e-10));
    prev = x;
  }
  CHECK_THROWS_AS(asymptotic_inverse(logged, 0.01), InvalidArgument);
}

TEST_CASE("predicted decay rate") {
  const RateFunction sq{1.0, 2.0, 0.0};
  CHECK(predicted_decay_rate(sq, 1, std::exp(4.0)) == doctest::Approx(0.5).epsilon(1e-12));
  double prev = 1e300;
  for (double t = 3.0; t < 1e6; t *= 3) {
    const double r = predicted_decay_rate(sq, 2, t);
    CHECK(r <= prev);
    prev = r;
  }
  const auto phi = poisson_rate_function(1, 1.0);
  CHECK(predicted_decay_rate(phi, 1, std::exp(100.0)) ==
        doctest::Approx(kPi * kPi / (2 * 100.0 * 100.0)).epsilon(1e-10));
  CHECK_THROWS_AS(predicted_decay_rate(sq, 1, 0.5), InvalidArgument);
}

TEST_CASE("Poisson constants are consistent") {
  CHECK(unit_ball_eigenvalue(1) == doctest::Approx(kPi * kPi / 8));
  CHECK(unit_ball_eigenvalue(2) == doctest::Approx(2.404825557695773 * 2.404825557695773 / 2));
  CHECK(unit_ball_eigenvalue(3) == doctest::Approx(kPi * kPi / 2));
  CHECK(unit_ball_volume(3) == doctest::Approx(4 * kPi / 3));
  // psi(y) = y^{2/d} / (d^{2/d} c(d, nu))
  for (int d = 1; d <= 3; ++d) {
    const double y = 7.0;
    CHECK(poisson_psi(d, 0.8, y) ==
          doctest::Approx(std::pow(y, 2.0 / d) / (std::pow(d, 2.0 / d) * poisson_dv_constant(d, 0.8))));
  }
  const auto pl2 = perturbed_lattice_rate_function(2, 1.0);
  CHECK(pl2.L == 1.5);
  CHECK(pl2.m == -0.5);
  CHECK(perturbed_lattice_rate_function(3, 3.0).L == doctest::Approx(2.5));
  CHECK_THROWS_AS(perturbed_lattice_rate_function(1, 1.0), InvalidArgument);
}

TEST_CASE("serialization") {
  IdsEstimate ids;
  ids.lambda = {0.1, 0.2};
  ids.mean = {0.01, 0.02};
  ids.std_error = {0.001, 0.002};
  ids.truncated = {false, true};
  ids.n_realizations = 5;
  ids.box = {1, 4, 1.0};
  std::ostringstream os;
  write_csv(os, ids);
  CHECK(os.str() == "lambda,mean,stderr,n,bc,R,truncated\n0.1,0.01,0.001,5,dirichlet,4,0\n0.2,0.02,0.002,5,dirichlet,4,1\n");
  LifshitzFit fit;
  fit.L_hat = 0.5;
  std::ostringstream js;
  write_json(js, fit);
  CHECK(js.str().find("\"L_hat\":0.5") != std::string::npos);
  CHECK(js.str().find("\"m_hat\":null") != std::string::npos);
}
