#include "trapping/survival.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>

#include "json.hpp"
#include "trapping/error.hpp"
#include "trapping/io.hpp"
#include "trapping/parallel.hpp"
#include "trapping/stats.hpp"

namespace trapping {

namespace {

constexpr double kPi = std::numbers::pi;
// exp(-800) underflows to 0 in double precision.
constexpr double kDeadIntegral = 800.0;

void check_times(std::span<const double> times) {
  if (times.empty()) throw InvalidArgument("time grid is empty");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] >= 0.0) || !std::isfinite(times[i])) throw InvalidArgument("times must be finite and >= 0");
    if (i > 0 && !(times[i] > times[i - 1])) throw InvalidArgument("time grid must be increasing");
  }
}

struct Walker {
  const PotentialField& V;
  const Window& w;
  double rate;  // total jump rate 2 d J
  ExitPolicy exit;
  std::span<const double> times;
  std::array<std::ptrdiff_t, kMaxDim> stride{};

  Walker(const PotentialField& field, double kappa, ExitPolicy policy, std::span<const double> ts)
      : V(field), w(field.window()), exit(policy), times(ts) {
    rate = 2.0 * w.d * kappa / (w.h * w.h);
    std::ptrdiff_t s = 1;
    for (int i = w.d - 1; i >= 0; --i) {
      stride[i] = s;
      s *= w.extent[i];
    }
  }

  // Writes the path weight at each time into `out`.
  template <class Engine>
  void walk(const Site& x, Engine& eng, std::vector<double>& out) const {
    std::fill(out.begin(), out.end(), 0.0);
    const std::size_t m = times.size();
    std::size_t k = 0;
    while (k < m && times[k] == 0.0) out[k++] = 1.0;
    Site s = x;
    auto idx = static_cast<std::ptrdiff_t>(w.index(s));
    double v = V[static_cast<std::size_t>(idx)];
    double tau = 0.0;
    double integral = 0.0;
    if (v == kInfinity) return;
    const int dirs = 2 * w.d;
    while (k < m) {
      const double end = tau + exponential(eng, rate);
      while (k < m && times[k] <= end) {
        out[k] = std::exp(-(integral + v * (times[k] - tau)));
        ++k;
      }
      if (k == m) return;
      integral += v * (end - tau);
      tau = end;
      if (integral > kDeadIntegral) return;
      const int dir = std::min(dirs - 1, static_cast<int>(uniform01(eng) * dirs));
      const int axis = dir >> 1;
      const int step = (dir & 1) ? 1 : -1;
      s[axis] += step;
      if (s[axis] < w.lo[axis] || s[axis] >= w.lo[axis] + w.extent[axis]) {
        if (exit == ExitPolicy::kKill) return;
        throw WalkEscaped("walk left the stored field at " + to_string(s, w.d) + " before t = " +
                          format_double(times[k]) + "; generate the field over a larger box");
      }
      idx += step * stride[axis];
      v = V[static_cast<std::size_t>(idx)];
      if (v == kInfinity) return;
    }
  }
};

}  // namespace

std::vector<McResult> mc_survival(const PotentialField& V, double kappa, std::span<const double> times,
                                  const Site& x, std::uint64_t n_paths, const SeedPath& seed,
                                  ExitPolicy exit, unsigned threads) {
  check_times(times);
  if (!(kappa > 0.0)) throw InvalidArgument("kappa must be positive");
  if (n_paths == 0) throw InvalidArgument("n_paths must be positive");
  if (!V.window().contains(x)) throw InvalidArgument("start site lies outside the field");
  const Walker walker(V, kappa, exit, times);
  const std::uint64_t n_blocks = (n_paths + kPathBlock - 1) / kPathBlock;
  std::vector<std::vector<Welford>> blocks(n_blocks, std::vector<Welford>(times.size()));
  parallel_for(n_blocks, threads, [&](std::size_t b) {
    auto eng = make_engine(seed, b);
    const std::uint64_t count = std::min<std::uint64_t>(kPathBlock, n_paths - b * kPathBlock);
    std::vector<double> weights(times.size());
    for (std::uint64_t i = 0; i < count; ++i) {
      walker.walk(x, eng, weights);
      for (std::size_t k = 0; k < times.size(); ++k) blocks[b][k].add(weights[k]);
    }
  });
  std::vector<McResult> out(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    Welford total;
    for (const auto& blk : blocks) total.merge(blk[k]);
    out[k] = {total.mean(), total.stderr_of_mean(), total.count()};
  }
  return out;
}

McResult mc_survival(const PotentialField& V, double kappa, double t, const Site& x, std::uint64_t n_paths,
                     const SeedPath& seed, ExitPolicy exit, unsigned threads) {
  const double times[1] = {t};
  return mc_survival(V, kappa, times, x, n_paths, seed, exit, threads)[0];
}

int walk_box_half_side(const ModelSpec& spec, int d, double h, double t) {
  const double spread = 4.0 * std::sqrt(2.0 * d * spec.kappa * t) / h;
  const double reach = spec.profile.radius / h;
  return static_cast<int>(std::ceil(std::max(spread, reach) + 16.0));
}

DirichletSurvival::DirichletSurvival(const PotentialField& V, const Window& sub, const Site& x, double kappa,
                                     std::size_t max_sites) {
  if (!sub.contains(x)) throw InvalidArgument("start site " + to_string(x, sub.d) + " lies outside the sub-box");
  const PotentialField local = V.restrict(sub);
  if (local.at(x) == kInfinity) return;
  const OperatorHandle H = assemble(local, BoundaryCondition::kDirichlet, kappa);
  const auto ax = static_cast<int>(H.active_index(x));
  const auto& comps = H.components();
  std::size_t c = 0;
  while (!std::binary_search(comps[c].begin(), comps[c].end(), ax)) ++c;
  if (comps[c].size() > max_sites) {
    throw InvalidArgument("component of the start site has " + std::to_string(comps[c].size()) +
                          " sites; exact survival is limited to " + std::to_string(max_sites));
  }
  const auto pos = std::lower_bound(comps[c].begin(), comps[c].end(), ax) - comps[c].begin();
  const DenseSpectrum s = dense_spectrum(H.component_matrix(c));
  values_ = s.values;
  weights_ = s.vectors.row(pos).transpose().cwiseProduct(s.vectors.colwise().sum().transpose());
}

double DirichletSurvival::operator()(double t) const {
  if (!(t >= 0.0)) throw InvalidArgument("t must be >= 0");
  if (t == 0.0) return 1.0;
  double u = 0.0;
  for (Eigen::Index k = 0; k < values_.size(); ++k) u += std::exp(-values_[k] * t) * weights_[k];
  return std::clamp(u, 0.0, 1.0);
}

double exact_survival_dirichlet(const PotentialField& V, const Window& sub, double t, const Site& x,
                                double kappa) {
  return DirichletSurvival(V, sub, x, kappa)(t);
}

double free_exit_probability(const Window& box, double kappa, double t, const Site& x) {
  if (!box.contains(x)) throw InvalidArgument("start site lies outside the box");
  if (!(t >= 0.0)) throw InvalidArgument("t must be >= 0");
  if (t == 0.0) return 0.0;
  const double J = kappa / (box.h * box.h);
  double stay = 1.0;
  for (int i = 0; i < box.d; ++i) {
    const int n = box.extent[i];
    const int pos = x[i] - box.lo[i] + 1;  // 1-based
    const double step = kPi / (n + 1);
    double s = 0.0;
    // Odd modes only: <phi_k, 1> vanishes for even k.
    for (int k = 1; k <= n; k += 2) {
      const double th = k * step;
      const double mass = std::sin(n * th / 2) * std::sin((n + 1) * th / 2) / std::sin(th / 2);
      s += std::exp(-2.0 * J * (1.0 - std::cos(th)) * t) * std::sin(pos * th) * mass;
    }
    stay *= std::clamp(s * 2.0 / (n + 1), 0.0, 1.0);
  }
  return std::clamp(1.0 - stay, 0.0, 1.0);
}

SpectralBound spectral_upper_bound(const PotentialField& V, const Window& big, double t, const Site& x,
                                   double kappa, const SolverOptions& opts) {
  if (!big.contains(x)) throw InvalidArgument("start site lies outside the spectral box");
  if (!(t >= 0.0)) throw InvalidArgument("t must be >= 0");
  SpectralBound b;
  b.exit = free_exit_probability(big, kappa, t, x);
  try {
    const OperatorHandle H = assemble(V.restrict(big), BoundaryCondition::kDirichlet, kappa);
    const Eigenpair e = principal_eigenpair(H, opts);
    b.lambda_1 = e.value;
    b.residual = e.residual;
    b.n_active = H.dimension();
    const double lam = std::max(0.0, e.value - e.residual);
    b.in_box = std::sqrt(static_cast<double>(b.n_active)) * std::exp(-lam * t);
  } catch (const FullyTrapped&) {
    b.lambda_1 = kInfinity;
    b.in_box = 0.0;
  }
  b.value = std::min(1.0, b.in_box + b.exit);
  return b;
}

namespace {

double principal_or_inf(const PotentialField& f, BoundaryCondition bc, double kappa,
                        const SolverOptions& opts = {}) {
  try {
    return principal_eigenpair(assemble(f, bc, kappa), opts).value;
  } catch (const FullyTrapped&) {
    return kInfinity;
  }
}

}  // namespace

SubboxScan best_subbox_scan(const PotentialField& V, const Window& big, int side, int stride, double kappa) {
  if (side < 1) throw InvalidArgument("cell side must be >= 1");
  if (stride < side) throw InvalidArgument("stride must be >= side so that cells are disjoint");
  if (!V.window().contains(big)) throw InvalidArgument("scan box is not covered by the field");
  Site per_axis{1, 1, 1};
  std::size_t n_cells = 1;
  for (int i = 0; i < big.d; ++i) {
    if (side > big.extent[i]) throw InvalidArgument("cell grid is empty: side exceeds the box extent");
    per_axis[i] = (big.extent[i] - side) / stride + 1;
    n_cells *= static_cast<std::size_t>(per_axis[i]);
  }
  const Window grid = Window::from_corner(big.d, {0, 0, 0}, per_axis);
  Site ext{1, 1, 1};
  for (int i = 0; i < big.d; ++i) ext[i] = side;

  SubboxScan out;
  out.n_cells = n_cells;
  out.lambda_n.resize(n_cells);
  out.lambda_n_min = kInfinity;
  for (std::size_t c = 0; c < n_cells; ++c) {
    const Site g = grid.site(c);
    Site lo{0, 0, 0};
    for (int i = 0; i < big.d; ++i) lo[i] = big.lo[i] + g[i] * stride;
    const Window cell = Window::from_corner(big.d, lo, ext, big.h);
    out.lambda_n[c] = principal_or_inf(V.restrict(cell), BoundaryCondition::kNeumann, kappa);
    if (c == 0 || out.lambda_n[c] < out.lambda_n_min) {
      out.lambda_n_min = out.lambda_n[c];
      out.best_index = c;
      out.best_cell = cell;
    }
  }
  out.lambda_d_at_best = principal_or_inf(V.restrict(out.best_cell), BoundaryCondition::kDirichlet, kappa);
  return out;
}

std::string_view to_string(PointStatus s) {
  return s == PointStatus::kOk ? "ok" : "budget_exhausted";
}

bool SurvivalCurve::complete() const {
  return std::all_of(status.begin(), status.end(), [](PointStatus s) { return s == PointStatus::kOk; });
}

namespace {

Window clip(const Window& w, const Window& bound) {
  Site lo{0, 0, 0};
  Site ext{1, 1, 1};
  for (int i = 0; i < w.d; ++i) {
    lo[i] = std::max(w.lo[i], bound.lo[i]);
    const int hi = std::min(w.lo[i] + w.extent[i], bound.lo[i] + bound.extent[i]);
    ext[i] = hi - lo[i];
  }
  return Window::from_corner(w.d, lo, ext, w.h);
}

Window centered_on(const Site& x, int d, int half, double h) {
  Site lo{0, 0, 0};
  Site ext{1, 1, 1};
  for (int i = 0; i < d; ++i) {
    lo[i] = x[i] - half;
    ext[i] = 2 * half + 1;
  }
  return Window::from_corner(d, lo, ext, h);
}

int default_cell_side(int d, double t) {
  const double y = d * std::log(std::max(t, std::exp(1.0)));
  return std::max(4, static_cast<int>(std::ceil(2.0 * std::pow(y, 1.0 / d))));
}

SurvivalCurve curve_on_field(const ModelSpec& spec, const PotentialField& field, const SeedPath& seed,
                             const Site& x, std::span<const double> t_grid, const CurveOptions& opts,
                             int half_side) {
  const Window& fw = field.window();
  const int d = fw.d;
  const double h = fw.h;
  SurvivalCurve curve;
  curve.t.assign(t_grid.begin(), t_grid.end());
  const std::size_t m = t_grid.size();
  curve.mc.assign(m, std::numeric_limits<double>::quiet_NaN());
  curve.mc_stderr.assign(m, std::numeric_limits<double>::quiet_NaN());
  curve.lower.assign(m, 0.0);
  curve.upper.assign(m, 1.0);
  curve.status.assign(m, PointStatus::kOk);
  curve.spec = spec;
  curve.seed = seed;
  curve.x = x;
  curve.d = d;
  curve.h = h;
  curve.field_half_side = half_side;

  // Certified lower bound, part 1: the window of about `exact_sites` sites around x.
  const int half_a = std::max(1, static_cast<int>(std::floor(std::pow(static_cast<double>(opts.exact_sites), 1.0 / d) / 2.0 - 0.5)));
  const Window around_x = clip(centered_on(x, d, half_a, h), fw);
  const DirichletSurvival local(field, around_x, x, spec.kappa);
  std::map<std::pair<Site, Site>, DirichletSurvival> hull_cache;

  const auto start = std::chrono::steady_clock::now();
  std::uint64_t used_paths = 0;
  for (std::size_t j = 0; j < m; ++j) {
    const double t = t_grid[j];
    int T = std::max(static_cast<int>(std::ceil(t / h)), walk_box_half_side(spec, d, h, t));
    for (int i = 0; i < d; ++i) T = std::max(T, std::abs(x[i]) + 1);
    const Window spectral_box = Window::centered(d, T, h);

    // Part 2: the hull of x with the best Neumann cell of the grid.
    double lower = local(t);
    const int side = opts.cell_side > 0 ? opts.cell_side : default_cell_side(d, t);
    if (side <= 2 * T) {
      const SubboxScan scan = best_subbox_scan(field, spectral_box, side, side, spec.kappa);
      const Window hull = centered_on(x, d, 0, h).hull(scan.best_cell);
      if (hull.site_count() <= opts.hull_sites && !around_x.contains(hull)) {
        const auto key = std::make_pair(hull.lo, hull.extent);
        auto it = hull_cache.find(key);
        if (it == hull_cache.end()) it = hull_cache.emplace(key, DirichletSurvival(field, hull, x, spec.kappa)).first;
        lower = std::max(lower, it->second(t));
      }
    }
    curve.lower[j] = lower;
    curve.upper[j] = spectral_upper_bound(field, spectral_box, t, x, spec.kappa, opts.solver).value;

    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (elapsed > opts.budget.wall_seconds || opts.n_paths > opts.budget.max_paths - used_paths) {
      curve.status[j] = PointStatus::kBudgetExhausted;
      continue;
    }
    const SeedPath walk_seed{hash_combine(seed.master_seed, j), seed.realization_index, StreamTag::kWalk};
    const McResult r = mc_survival(field, spec.kappa, t, x, opts.n_paths, walk_seed, ExitPolicy::kError,
                                   opts.threads);
    used_paths += opts.n_paths;
    curve.mc[j] = r.estimate;
    curve.mc_stderr[j] = r.std_error;
  }
  // Each entry bounds u at its own t and u is nonincreasing in t, so a later
  // entry also bounds every earlier u.
  for (std::size_t j = m; j-- > 1;) curve.lower[j - 1] = std::max(curve.lower[j - 1], curve.lower[j]);
  // Symmetrically an upper bound at t also bounds every later u.
  for (std::size_t j = 1; j < m; ++j) curve.upper[j] = std::min(curve.upper[j], curve.upper[j - 1]);
  return curve;
}

}  // namespace

SurvivalCurve quenched_curve(const ModelSpec& spec, int d, double h, const SeedPath& seed, const Site& x,
                             std::span<const double> t_grid, const CurveOptions& opts) {
  spec.validate();
  BoxRegion{d, 1, h}.validate();
  check_times(t_grid);
  if (!(t_grid.front() > 0.0)) throw InvalidArgument("quenched curve times must be positive");
  const double t_max = t_grid.back();
  int half = std::max(static_cast<int>(std::ceil(t_max / h)), walk_box_half_side(spec, d, h, t_max));
  int offset = 0;
  for (int i = 0; i < d; ++i) offset = std::max(offset, std::abs(x[i]));
  half += offset;
  for (;;) {
    const PotentialField field = generate(spec, Window::centered(d, half, h), seed);
    try {
      return curve_on_field(spec, field, seed, x, t_grid, opts, half);
    } catch (const WalkEscaped&) {
      // Coordinate-keyed generation keeps the realization on the larger box.
      half *= 2;
    }
  }
}

ScalingResult scaling_check(std::span<const double> t, std::span<const double> u) {
  if (t.size() != u.size()) throw InvalidArgument("t and u lengths differ");
  if (t.size() < 4) throw InvalidArgument("scaling check needs at least 4 points");
  const std::size_t n = t.size();
  std::vector<double> xs(n);
  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(t[i] > 1.0)) throw InvalidArgument("scaling check needs t > 1; got t = " + format_double(t[i]));
    if (!(u[i] > 0.0 && u[i] < 1.0)) {
      throw InvalidArgument("-log u must be positive and finite; u(" + format_double(t[i]) + ") = " +
                            format_double(u[i]));
    }
    xs[i] = std::log(std::log(t[i]));
    ys[i] = std::log(t[i] / -std::log(u[i]));
  }
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw InvalidArgument("scaling check needs distinct t values");
  ScalingResult r;
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) rss += std::pow(ys[i] - r.intercept - r.slope * xs[i], 2);
  r.stderr_slope = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
  r.n_points = static_cast<int>(n);
  return r;
}

ScalingResult scaling_check(const SurvivalCurve& curve) {
  std::vector<double> t;
  std::vector<double> u;
  for (std::size_t j = 0; j < curve.t.size(); ++j) {
    if (curve.status[j] != PointStatus::kOk) continue;
    t.push_back(curve.t[j]);
    u.push_back(curve.mc[j]);
  }
  return scaling_check(t, u);
}

TailProbability eigenvalue_tail_probability(const ModelSpec& spec, int d, double h, double t, double eps,
                                            const RateFunction& phi, int n_realizations,
                                            const SeedPath& seed, unsigned threads) {
  spec.validate();
  if (!(eps >= 0.0 && eps <= 1.0)) throw InvalidArgument("eps must lie in [0, 1]");
  if (n_realizations < 1) throw InvalidArgument("n_realizations must be >= 1");
  const BoxRegion box{d, static_cast<int>(std::ceil(t / h)), h};
  box.validate();
  TailProbability out;
  out.t = t;
  out.threshold = (1.0 - eps) * predicted_decay_rate(phi, d, t);
  out.n_realizations = n_realizations;
  const Window window(box);
  std::vector<char> hit(static_cast<std::size_t>(n_realizations), 0);
  parallel_for(hit.size(), threads, [&](std::size_t r) {
    const PotentialField f = generate(spec, window, seed.with_index(r));
    hit[r] = principal_or_inf(f, BoundaryCondition::kDirichlet, spec.kappa) <= out.threshold;
  });
  const double k = static_cast<double>(std::count(hit.begin(), hit.end(), 1));
  out.p_hat = k / n_realizations;
  out.ci = wilson_interval(k, n_realizations);
  return out;
}

std::vector<SupScanPoint> sup_potential_scan(const ModelSpec& spec, int d, double h,
                                             std::span<const double> t_grid, double alpha,
                                             int n_realizations, const SeedPath& seed, unsigned threads) {
  spec.validate();
  check_times(t_grid);
  if (!(alpha > 0.0)) throw InvalidArgument("alpha must be positive");
  if (n_realizations < 1) throw InvalidArgument("n_realizations must be >= 1");
  if (!(t_grid.front() > 1.0)) throw InvalidArgument("sup scan needs t > 1");
  std::vector<int> half(t_grid.size());
  for (std::size_t j = 0; j < t_grid.size(); ++j) half[j] = static_cast<int>(std::ceil(t_grid[j] / h));
  const Window big = Window::centered(d, half.back(), h);
  BoxRegion{d, half.back(), h}.validate();

  std::vector<std::vector<double>> sups(static_cast<std::size_t>(n_realizations));
  parallel_for(sups.size(), threads, [&](std::size_t r) {
    const PotentialField f = generate(spec, big, seed.with_index(r));
    // ring[k]: max of V over sites first included at half side k.
    std::vector<double> ring(static_cast<std::size_t>(half.back()) + 1, 0.0);
    for (std::size_t i = 0; i < f.size(); ++i) {
      const Site s = big.site(i);
      int k = 0;
      for (int a = 0; a < d; ++a) k = std::max({k, -s[a], s[a] + 1});
      ring[k] = std::max(ring[k], f[i]);
    }
    for (std::size_t k = 1; k < ring.size(); ++k) ring[k] = std::max(ring[k], ring[k - 1]);
    sups[r].resize(half.size());
    for (std::size_t j = 0; j < half.size(); ++j) sups[r][j] = ring[half[j]];
  });

  std::vector<SupScanPoint> out(t_grid.size());
  for (std::size_t j = 0; j < t_grid.size(); ++j) {
    SupScanPoint& p = out[j];
    p.t = t_grid[j];
    p.bound = std::pow(3.0 * d * std::log(p.t), 1.0 / alpha);
    double k = 0.0;
    for (const auto& s : sups) k += s[j] > p.bound;
    p.frequency = k / n_realizations;
    p.ci = wilson_interval(k, n_realizations);
    p.assumption_failure = p.frequency > 0.5;
  }
  return out;
}

void write_csv(std::ostream& os, const SurvivalCurve& curve) {
  os << "t,mc,mc_stderr,lower,upper,status\n";
  for (std::size_t j = 0; j < curve.t.size(); ++j) {
    os << format_double(curve.t[j]) << ',' << format_double(curve.mc[j]) << ','
       << format_double(curve.mc_stderr[j]) << ',' << format_double(curve.lower[j]) << ','
       << format_double(curve.upper[j]) << ',' << to_string(curve.status[j]) << '\n';
  }
}

void write_json(std::ostream& os, const ScalingResult& r) {
  nlohmann::ordered_json j;
  j["slope"] = r.slope;
  j["stderr"] = r.stderr_slope;
  j["intercept"] = r.intercept;
  j["n_points"] = r.n_points;
  os << j.dump() << '\n';
}

}  // namespace trapping
