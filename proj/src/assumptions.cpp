#include "trapping/assumptions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "json.hpp"
#include "trapping/error.hpp"
#include "trapping/hamiltonian.hpp"
#include "trapping/io.hpp"
#include "trapping/parallel.hpp"
#include "trapping/radial_law.hpp"
#include "trapping/stats.hpp"

namespace trapping {

namespace {

using nlohmann::ordered_json;

// Skip threshold for displacement tails.
constexpr double kTailCut = 1e-14;
constexpr std::size_t kMaxLatticePoints = 4'000'000;
constexpr std::size_t kMaxSeriesPoints = 50'000'000;

double dist_to_box(const Point& p, const Window& w) {
  double s = 0.0;
  for (int i = 0; i < w.d; ++i) {
    const double lo = w.lo[i] * w.h;
    const double hi = (w.lo[i] + w.extent[i] - 1) * w.h;
    const double e = std::max({0.0, lo - p[i], p[i] - hi});
    s += e * e;
  }
  return std::sqrt(s);
}

Point box_center(const Window& w) {
  Point c{0.0, 0.0, 0.0};
  for (int i = 0; i < w.d; ++i) c[i] = (w.lo[i] + 0.5 * (w.extent[i] - 1)) * w.h;
  return c;
}

double norm(const Point& p, int d) {
  double s = 0.0;
  for (int i = 0; i < d; ++i) s += p[i] * p[i];
  return std::sqrt(s);
}

// Calls fn(q) for every q in Z^d within Euclidean distance `radius` of `w`.
template <class Fn>
void for_lattice_near(const Window& w, double radius, Fn&& fn) {
  Site lo{0, 0, 0};
  Site ext{1, 1, 1};
  for (int i = 0; i < w.d; ++i) {
    lo[i] = static_cast<int>(std::ceil(w.lo[i] * w.h - radius));
    ext[i] = static_cast<int>(std::floor((w.lo[i] + w.extent[i] - 1) * w.h + radius)) - lo[i] + 1;
  }
  const Window grid = Window::from_corner(w.d, lo, ext);
  for (std::size_t i = 0; i < grid.site_count(); ++i) {
    const Site s = grid.site(i);
    Point q{0.0, 0.0, 0.0};
    for (int a = 0; a < w.d; ++a) q[a] = s[a];
    fn(s, q);
  }
}

ordered_json window_json(const Window& w) {
  ordered_json j;
  j["lo"] = std::vector<int>(w.lo.begin(), w.lo.begin() + w.d);
  j["extent"] = std::vector<int>(w.extent.begin(), w.extent.begin() + w.d);
  return j;
}

ordered_json pair_json(const std::pair<double, double>& p) { return ordered_json::array({p.first, p.second}); }

}  // namespace

MomentEstimate moment_estimate(const ModelSpec& spec, int d, double h, double alpha, int n_realizations,
                               const SeedPath& seed, unsigned threads) {
  spec.validate();
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidArgument("alpha must be positive");
  if (n_realizations < 1) throw InvalidArgument("n_realizations must be >= 1");
  if (!(h > 0.0 && h <= 1.0)) throw InvalidArgument("mesh h must lie in (0, 1]");
  const int side = static_cast<int>(std::ceil(1.0 / h - 1e-12));
  Site ext{1, 1, 1};
  for (int i = 0; i < d; ++i) ext[i] = side;
  const Window cell = Window::from_corner(d, {0, 0, 0}, ext, h);
  cell.validate();

  // ell[r] = log of the r-th sample exp(sup^alpha).
  std::vector<double> ell(static_cast<std::size_t>(n_realizations));
  parallel_for(ell.size(), threads, [&](std::size_t r) {
    const double s = generate(spec, cell, seed.with_index(r)).sup();
    ell[r] = std::pow(s, alpha);
  });

  MomentEstimate m;
  m.n_realizations = n_realizations;
  m.cell_sites = static_cast<int>(cell.site_count());
  const double M = *std::max_element(ell.begin(), ell.end());
  if (M == kInfinity) {
    m.estimate = m.log_estimate = m.std_error = kInfinity;
    m.tail_flag = true;
    m.top_decile_share = 1.0;
    return m;
  }
  std::vector<double> scaled(ell.size());
  Welford acc;
  for (std::size_t r = 0; r < ell.size(); ++r) {
    scaled[r] = std::exp(ell[r] - M);
    acc.add(scaled[r]);
  }
  const double sum = acc.mean() * n_realizations;
  m.log_estimate = M + std::log(acc.mean());
  m.estimate = std::exp(m.log_estimate);
  const double se = acc.stderr_of_mean();
  m.std_error = se > 0.0 ? std::exp(M + std::log(se)) : 0.0;
  std::sort(scaled.begin(), scaled.end(), std::greater<>());
  const auto top = static_cast<std::ptrdiff_t>((scaled.size() + 9) / 10);
  m.top_decile_share = std::accumulate(scaled.begin(), scaled.begin() + top, 0.0) / sum;
  m.tail_flag = m.top_decile_share > 0.5;
  return m;
}

std::vector<std::string> layout_diagnostics(const BoxLayout& layout, double r0) {
  std::vector<std::string> out;
  const auto& b = layout.boxes;
  if (b.empty()) out.push_back("layout has no boxes");
  if (!(layout.r > 0.0)) out.push_back("layout r must be positive; got " + format_double(layout.r));
  if (layout.r < r0) {
    out.push_back("layout r = " + format_double(layout.r) + " is below r0 = " + format_double(r0) +
                  " (rule: r >= r0)");
  }
  for (std::size_t k = 0; k < b.size(); ++k) {
    if (b[k].d != b.front().d) {
      out.push_back("box " + std::to_string(k) + " has dimension " + std::to_string(b[k].d) + ", box 0 has " +
                    std::to_string(b.front().d));
      continue;
    }
    if (b[k].diameter() >= layout.r) {
      out.push_back("box " + std::to_string(k) + " has diameter " + format_double(b[k].diameter()) +
                    " >= r = " + format_double(layout.r) + " (rule: max diameter < r)");
    }
  }
  for (std::size_t k = 0; k < b.size(); ++k) {
    for (std::size_t l = k + 1; l < b.size(); ++l) {
      if (b[k].d != b[l].d) continue;
      const double dist = distance(b[k], b[l]);
      if (!(dist > layout.r)) {
        out.push_back("boxes " + std::to_string(k) + " and " + std::to_string(l) + " are at distance " +
                      format_double(dist) + " <= r = " + format_double(layout.r) +
                      " (rule: min pairwise distance > r)");
      }
    }
  }
  return out;
}

double default_r0(const ModelSpec& spec) { return 8.0 * spec.profile.radius; }

double default_beta(const ModelSpec& spec) {
  return spec.variant == ModelSpec::Variant::kPerturbedLattice ? spec.theta / 2.0 : 1.0;
}

double perturbed_lattice_envelope(int d, double theta, double r) {
  const double n = RadialLaw(d, theta).normalizer();
  const double rd = std::pow(r, d);
  return n * rd * (2.0 + rd) * std::exp(-std::pow(r / 8.0, theta));
}

CorrelationReport correlation_gap(const ModelSpec& spec, const BoxLayout& layout, double lambda,
                                  int n_realizations, const SeedPath& seed, const CorrelationOptions& opts) {
  spec.validate();
  CorrelationReport rep;
  rep.layout = layout;
  rep.lambda = lambda;
  rep.r0 = opts.r0.value_or(default_r0(spec));
  rep.beta = opts.beta.value_or(default_beta(spec));
  rep.confidence = opts.confidence;
  rep.n_realizations = n_realizations;
  const auto diags = layout_diagnostics(layout, rep.r0);
  if (!diags.empty()) {
    std::string msg = "invalid box layout:";
    for (const auto& s : diags) msg += "\n  " + s;
    throw InvalidArgument(msg);
  }
  if (n_realizations < 1000) throw InvalidArgument("correlation_gap needs n_realizations >= 1000");
  if (!(rep.beta > 0.0)) throw InvalidArgument("beta must be positive");
  if (opts.n_bootstrap < 1) throw InvalidArgument("n_bootstrap must be >= 1");
  if (!(opts.confidence > 0.0 && opts.confidence < 1.0)) throw InvalidArgument("confidence must lie in (0, 1)");

  const std::size_t n = static_cast<std::size_t>(n_realizations);
  std::vector<char> first(n);
  std::vector<char> rest(n);
  parallel_for(n, opts.threads, [&](std::size_t r) {
    const SeedPath s = seed.with_index(r);
    bool all_rest = true;
    for (std::size_t k = 0; k < layout.boxes.size(); ++k) {
      if (k > 0 && !all_rest) break;
      double lam = kInfinity;
      try {
        lam = principal_eigenpair(assemble(generate(spec, layout.boxes[k], s), BoundaryCondition::kNeumann,
                                           spec.kappa))
                  .value;
      } catch (const FullyTrapped&) {
      }
      const bool hit = lam <= lambda;
      if (k == 0) {
        first[r] = hit;
      } else {
        all_rest = all_rest && hit;
      }
    }
    rest[r] = all_rest;
  });

  auto gap_of = [&](auto&& index) {
    double a = 0.0;
    double b = 0.0;
    double j = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t r = index(i);
      a += first[r];
      b += rest[r];
      j += first[r] && rest[r];
    }
    return std::array<double, 4>{j / n - (a / n) * (b / n), a / n, b / n, j / n};
  };
  const auto g = gap_of([](std::size_t i) { return i; });
  rep.gap = g[0];
  rep.p_first = g[1];
  rep.p_rest = g[2];
  rep.p_joint = g[3];
  rep.abs_gap = std::abs(rep.gap);

  auto eng = make_engine(seed.with_tag(StreamTag::kBootstrap));
  std::vector<std::size_t> idx(n);
  std::vector<double> boot(static_cast<std::size_t>(opts.n_bootstrap));
  Welford spread;
  for (auto& bg : boot) {
    for (auto& i : idx) i = std::min(n - 1, static_cast<std::size_t>(uniform01(eng) * n));
    bg = gap_of([&](std::size_t i) { return idx[i]; })[0];
    spread.add(bg);
  }
  std::sort(boot.begin(), boot.end());
  const double tail = (1.0 - opts.confidence) / 2.0;
  const auto at = [&](double q) {
    const auto k = static_cast<std::size_t>(std::clamp(std::floor(q * (boot.size() - 1) + 0.5), 0.0,
                                                       static_cast<double>(boot.size() - 1)));
    return boot[k];
  };
  rep.ci = {at(tail), at(1.0 - tail)};
  rep.bootstrap_stderr = std::sqrt(spread.variance());
  rep.reference = std::exp(-std::pow(layout.r, rep.beta));
  if (spec.variant == ModelSpec::Variant::kPerturbedLattice) {
    rep.envelope = perturbed_lattice_envelope(layout.boxes.front().d, spec.theta, layout.r);
  }
  return rep;
}

double far_displacement_series(int d, double theta, const Point& center, double r) {
  if (!(theta > 0.0)) throw InvalidArgument("theta must be positive");
  // Terms beyond this radius are below exp(-40) times the first excluded term.
  const double reach = 4.0 * std::pow(std::pow(std::max(r, 0.0) / 4.0, theta) + 40.0, 1.0 / theta);
  Site lo{0, 0, 0};
  Site ext{1, 1, 1};
  double count = 1.0;
  for (int i = 0; i < d; ++i) {
    lo[i] = static_cast<int>(std::ceil(center[i] - reach));
    ext[i] = static_cast<int>(std::floor(center[i] + reach)) - lo[i] + 1;
    count *= ext[i];
  }
  if (count > static_cast<double>(kMaxSeriesPoints)) {
    throw InvalidArgument("far displacement series needs " + format_double(count) +
                          " lattice points; theta is too small for direct summation");
  }
  const Window grid = Window::from_corner(d, lo, ext);
  double sum = 0.0;
  for (std::size_t i = 0; i < grid.site_count(); ++i) {
    const Site s = grid.site(i);
    Point v{0.0, 0.0, 0.0};
    for (int a = 0; a < d; ++a) v[a] = s[a] - center[a];
    const double len = norm(v, d);
    if (len > r) sum += std::exp(-std::pow(len / 4.0, theta));
  }
  return sum;
}

EventRates displacement_event_rates(double theta, const Window& a1, double r, int n_draws, const SeedPath& seed,
                                    const DisplacementSampler& sampler) {
  a1.validate();
  if (!(theta > 0.0) || !std::isfinite(theta)) throw InvalidArgument("theta must be positive");
  if (!(r > 0.0)) throw InvalidArgument("r must be positive");
  if (n_draws < 1) throw InvalidArgument("n_draws must be >= 1");
  const int d = a1.d;
  const RadialLaw law(d, theta);
  double reach = 1.0;
  while (law.survival(reach) > kTailCut) reach *= 2.0;

  struct Candidate {
    Site q;
    Point pos;
    double dist;
    double skip_below;  // u <= skip_below cannot produce a bad event
    bool near;          // d(q, A_1) <= r/2
    bool far_part;      // |q - center| > r
  };
  const Point center = box_center(a1);
  std::vector<Candidate> cands;
  const double radius = std::max(r / 2.0, r / 4.0 + reach);
  for_lattice_near(a1, radius, [&](const Site& s, const Point& q) {
    const double D = dist_to_box(q, a1);
    if (D > radius) return;
    if (cands.size() >= kMaxLatticePoints) {
      throw InvalidArgument("displacement events need more than " + std::to_string(kMaxLatticePoints) +
                            " lattice points per draw; reduce r or the box size");
    }
    Candidate c{s, q, D, 1.0, D <= r / 2.0, false};
    Point rel{0.0, 0.0, 0.0};
    for (int a = 0; a < d; ++a) rel[a] = q[a] - center[a];
    c.far_part = norm(rel, d) > r;
    // Necessary displacement length for each bad event.
    double need = kInfinity;
    if (D <= r / 2.0) need = std::min(need, std::max(0.0, 0.75 * r - D));
    if (D >= r / 2.0) need = std::min(need, std::max(0.0, D - r / 4.0));
    c.skip_below = need > 0.0 ? law.cdf(need) * (1.0 - 1e-12) : 0.0;
    cands.push_back(c);
  });

  std::vector<char> e1(static_cast<std::size_t>(n_draws));
  std::vector<char> e2(e1.size());
  std::vector<char> far(e1.size());
  const std::uint64_t key = seed.key();
  for (std::size_t k = 0; k < e1.size(); ++k) {
    const std::uint64_t draw_key = hash_combine(key, k);
    for (const Candidate& c : cands) {
      SplitMix64 eng(site_key(draw_key, c.q, d));
      Point w;
      if (sampler) {
        w = sampler(eng);
      } else {
        SplitMix64 probe = eng;
        if (uniform_open(probe) <= c.skip_below) continue;
        w = law.sample(eng);
      }
      Point moved = c.pos;
      for (int a = 0; a < d; ++a) moved[a] += w[a];
      const double D2 = dist_to_box(moved, a1);
      if (c.near && D2 > 0.75 * r) e1[k] = 1;
      if (c.dist >= r / 2.0 && D2 < r / 4.0) {
        e2[k] = 1;
        if (c.far_part) far[k] = 1;
      }
    }
  }

  EventRates out;
  out.r = r;
  out.theta = theta;
  out.n_draws = n_draws;
  out.lattice_points = cands.size();
  const auto count = [](const std::vector<char>& v) { return static_cast<double>(std::count(v.begin(), v.end(), 1)); };
  out.p_e1c = count(e1) / n_draws;
  out.p_e2c = count(e2) / n_draws;
  out.p_far = count(far) / n_draws;
  out.ci_e1c = wilson_interval(count(e1), n_draws);
  out.ci_e2c = wilson_interval(count(e2), n_draws);
  out.ci_far = wilson_interval(count(far), n_draws);
  out.envelope_e1 = law.normalizer() * std::pow(r, d) * std::exp(-std::pow(r / 8.0, theta));
  out.envelope_total = perturbed_lattice_envelope(d, theta, r);
  out.far_series = far_displacement_series(d, theta, center, r);
  return out;
}

void write_json(std::ostream& os, const MomentEstimate& m) {
  ordered_json j;
  j["estimate"] = m.estimate;
  j["stderr"] = m.std_error;
  j["log_estimate"] = m.log_estimate;
  j["tail_flag"] = m.tail_flag;
  j["top_decile_share"] = m.top_decile_share;
  j["n_realizations"] = m.n_realizations;
  j["cell_sites"] = m.cell_sites;
  os << j.dump() << '\n';
}

void write_json(std::ostream& os, const CorrelationReport& c) {
  ordered_json j;
  j["kind"] = "correlation_spot_check";
  ordered_json boxes = ordered_json::array();
  for (const auto& b : c.layout.boxes) boxes.push_back(window_json(b));
  j["layout"] = {{"d", c.layout.boxes.empty() ? 0 : c.layout.boxes.front().d},
                 {"h", c.layout.boxes.empty() ? 1.0 : c.layout.boxes.front().h},
                 {"r", c.layout.r},
                 {"boxes", boxes}};
  j["lambda"] = c.lambda;
  j["r0"] = c.r0;
  j["beta"] = c.beta;
  j["n_realizations"] = c.n_realizations;
  j["p_joint"] = c.p_joint;
  j["p_first"] = c.p_first;
  j["p_rest"] = c.p_rest;
  j["gap"] = c.gap;
  j["abs_gap"] = c.abs_gap;
  j["ci"] = pair_json(c.ci);
  j["confidence"] = c.confidence;
  j["bootstrap_stderr"] = c.bootstrap_stderr;
  j["reference"] = c.reference;
  j["envelope"] = c.envelope ? ordered_json(*c.envelope) : ordered_json(nullptr);
  os << j.dump() << '\n';
}

void write_json(std::ostream& os, const EventRates& e) {
  ordered_json j;
  j["r"] = e.r;
  j["theta"] = e.theta;
  j["n_draws"] = e.n_draws;
  j["p_e1c"] = e.p_e1c;
  j["ci_e1c"] = pair_json(e.ci_e1c);
  j["p_e2c"] = e.p_e2c;
  j["ci_e2c"] = pair_json(e.ci_e2c);
  j["p_far"] = e.p_far;
  j["ci_far"] = pair_json(e.ci_far);
  j["envelope_e1"] = e.envelope_e1;
  j["envelope_total"] = e.envelope_total;
  j["far_series"] = e.far_series;
  j["lattice_points"] = e.lattice_points;
  os << j.dump() << '\n';
}

}  // namespace trapping
