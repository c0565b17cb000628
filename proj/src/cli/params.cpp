#include "params.hpp"

#include <algorithm>
#include <cmath>

#include "fields.hpp"
#include "trapping/error.hpp"

namespace trapping::cli {

namespace {

std::vector<double> read_grid(Fields& f, std::string_view list_key, std::string_view grid_key, int per_decade,
                              bool required = true) {
  std::vector<double> out;
  if (f.has(list_key)) {
    f.note(grid_key);
    if (f.has(grid_key)) f.error(f.path(list_key) + " and " + f.path(grid_key) + " are mutually exclusive");
    out = f.numbers(list_key).value_or(std::vector<double>{});
  } else if (f.has(grid_key)) {
    f.note(list_key);
    if (const Json* g = f.object(grid_key)) {
      Fields gf(g, f.path(grid_key), f.diagnostics());
      const auto lo = gf.required_number("lo");
      const auto hi = gf.required_number("hi");
      const int n = gf.integer("per_decade", per_decade);
      gf.check(n >= 1, "per_decade", n, "must be >= 1");
      if (lo && hi) {
        gf.check(*lo > 0.0, "lo", *lo, "must be positive");
        gf.check(*hi > *lo, "hi", *hi, "must exceed lo");
        if (*lo > 0.0 && *hi > *lo && n >= 1) out = log_grid(*lo, *hi, n);
      }
    }
  } else {
    f.note(list_key);
    f.note(grid_key);
    if (required) f.error("missing required key '" + f.path(list_key) + "' (or '" + f.path(grid_key) + "')");
    return out;
  }
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (!(out[i] > out[i - 1])) {
      f.error(f.path(list_key) + " must be strictly increasing");
      break;
    }
  }
  if (required && out.empty() && f.has(list_key)) f.error(f.path(list_key) + " must not be empty");
  return out;
}

Site read_site(Fields& f, std::string_view key, int d) {
  Site x{0, 0, 0};
  if (auto v = f.integers(key)) {
    if (static_cast<int>(v->size()) != d) {
      f.error(f.path(key) + " must have d = " + std::to_string(d) + " coordinates");
    } else {
      std::copy(v->begin(), v->end(), x.begin());
    }
  }
  return x;
}

std::optional<Window> read_window(const Json* j, const std::string& prefix, int d, double h, Diagnostics& diags) {
  Fields f(j, prefix, diags);
  const auto lo = f.integers("lo");
  const auto ext = f.integers("extent");
  if (!f.has("lo")) f.missing("lo");
  if (!f.has("extent")) f.missing("extent");
  if (!lo || !ext) return std::nullopt;
  if (static_cast<int>(lo->size()) != d || static_cast<int>(ext->size()) != d) {
    f.error(prefix + ".lo and " + prefix + ".extent must have d = " + std::to_string(d) + " entries");
    return std::nullopt;
  }
  Site l{0, 0, 0};
  Site e{1, 1, 1};
  for (int i = 0; i < d; ++i) {
    l[i] = (*lo)[i];
    e[i] = (*ext)[i];
    if (e[i] < 1) {
      f.error(prefix + ".extent entries must be >= 1");
      return std::nullopt;
    }
  }
  return Window::from_corner(d, l, e, h);
}

RateFunction read_rate(Fields& f) {
  RateFunction phi;
  const auto c = f.required_number("c");
  const auto L = f.required_number("L");
  phi.c = c.value_or(1.0);
  phi.L = L.value_or(1.0);
  phi.m = f.number("m", 0.0);
  if (c && L) {
    try {
      phi.validate();
    } catch (const InvalidArgument& e) {
      f.error(f.path("") + e.what());
    }
  }
  return phi;
}

BoundaryCondition read_bc(Fields& f) {
  const auto s = f.text("bc", "dirichlet");
  try {
    return parse_boundary(s);
  } catch (const InvalidArgument& e) {
    f.error(f.path("bc") + ": " + e.what());
    return BoundaryCondition::kDirichlet;
  }
}

void require_R(const ExperimentConfig& cfg, Fields& f) {
  if (!cfg.geometry || !cfg.geometry->R) f.error("geometry.R is required for operation " + cfg.operation);
}

bool hard_bernoulli(const ModelSpec& m) {
  return m.variant == ModelSpec::Variant::kBernoulli && m.profile.shape == TrapProfile::Shape::kSpike &&
         m.profile.hard();
}

void check_positive_times(Fields& f, std::string_view key, const std::vector<double>& t, double floor_exclusive) {
  for (double v : t) {
    if (!(v > floor_exclusive) || !std::isfinite(v)) {
      f.check(false, key, v, "must be finite and > " + format_double(floor_exclusive));
      return;
    }
  }
}

}  // namespace

Window geometry_window(const Geometry& g) {
  if (g.sides) {
    Site ext{1, 1, 1};
    for (int i = 0; i < g.d; ++i) ext[i] = (*g.sides)[static_cast<std::size_t>(i)];
    return Window::from_corner(g.d, {0, 0, 0}, ext, g.h);
  }
  return Window::centered(g.d, g.R.value_or(1), g.h);
}

OpParams parse_params(const ExperimentConfig& cfg, Diagnostics& diags) {
  Fields f(&cfg.params, "params", diags);
  const std::string& op = cfg.operation;
  const int d = cfg.geometry ? cfg.geometry->d : 1;
  const double h = cfg.geometry ? cfg.geometry->h : 1.0;

  if (op == "eigen") {
    EigenParams p;
    p.bc = read_bc(f);
    p.k = f.integer("k", 1);
    f.check(p.k >= 1, "k", p.k, "must be >= 1");
    const auto method = f.text("method", "auto");
    if (method == "auto") {
      p.solver.method = SolverOptions::Method::kAuto;
    } else if (method == "dense") {
      p.solver.method = SolverOptions::Method::kDense;
    } else if (method == "lanczos") {
      p.solver.method = SolverOptions::Method::kLanczos;
    } else {
      f.error("params.method '" + method + "' must be auto, dense or lanczos");
    }
    p.solver.tol = f.number("tol", p.solver.tol);
    f.check(p.solver.tol > 0.0, "tol", p.solver.tol, "must be positive");
    p.solver.max_iter = f.integer("max_iter", 0);
    f.check(p.solver.max_iter >= 0, "max_iter", p.solver.max_iter, "must be >= 0");
    if (!cfg.geometry || (!cfg.geometry->R && !cfg.geometry->sides)) {
      f.error("geometry.R or geometry.sides is required for operation eigen");
    }
    return p;
  }
  if (op == "ids") {
    IdsParams p;
    p.bc = read_bc(f);
    p.lambda = read_grid(f, "lambda", "lambda_grid", 16);
    p.n_realizations = f.integer("n_realizations", p.n_realizations);
    f.check(p.n_realizations >= 1, "n_realizations", p.n_realizations, "must be >= 1");
    p.max_eigenvalues = f.integer("max_eigenvalues", p.max_eigenvalues);
    f.check(p.max_eigenvalues >= 1, "max_eigenvalues", p.max_eigenvalues, "must be >= 1");
    require_R(cfg, f);
    return p;
  }
  if (op == "ids-exact-1d") {
    IdsExactParams p;
    p.lambda = read_grid(f, "lambda", "lambda_grid", 16);
    if (f.has("box_sites")) {
      p.box_sites = f.integer("box_sites", 1);
      f.check(*p.box_sites >= 1, "box_sites", *p.box_sites, "must be >= 1");
    } else {
      f.note("box_sites");
    }
    if (cfg.model && !hard_bernoulli(*cfg.model)) {
      f.error("ids-exact-1d needs model.variant = bernoulli with a spike profile of height \"inf\"");
    }
    return p;
  }
  if (op == "lifshitz-fit") {
    FitParams p;
    p.source = f.text("source", "exact-1d");
    if (p.source == "csv") {
      p.csv = f.required_text("csv").value_or("");
    } else if (p.source == "exact-1d") {
      p.lambda = read_grid(f, "lambda", "lambda_grid", 16);
      if (cfg.model && !hard_bernoulli(*cfg.model)) {
        f.error("lifshitz-fit with source exact-1d needs a bernoulli model with a hard spike profile");
      }
    } else {
      f.error("params.source '" + p.source + "' must be exact-1d or csv");
    }
    const auto lo = f.required_number("lo");
    const auto hi = f.required_number("hi");
    p.lo = lo.value_or(0.0);
    p.hi = hi.value_or(0.0);
    if (lo && hi) {
      f.check(p.lo > 0.0, "lo", p.lo, "must be positive");
      f.check(p.hi > p.lo, "hi", p.hi, "must exceed lo");
    }
    p.with_log = f.flag("with_log", false);
    return p;
  }
  if (op == "inverse") {
    InverseParams p;
    if (const Json* phi = f.object("phi")) {
      Fields rf(phi, "params.phi", diags);
      p.phi = read_rate(rf);
    } else if (!f.has("phi")) {
      f.missing("phi");
    }
    p.y = f.numbers("y").value_or(std::vector<double>{});
    if (!f.has("y")) f.missing("y");
    return p;
  }
  if (op == "survival") {
    SurvivalParams p;
    p.t = f.numbers("t").value_or(std::vector<double>{});
    if (!f.has("t")) f.missing("t");
    for (std::size_t i = 0; i < p.t.size(); ++i) {
      if (!(p.t[i] >= 0.0) || (i > 0 && !(p.t[i] > p.t[i - 1]))) {
        f.error("params.t must be increasing and >= 0");
        break;
      }
    }
    p.x = read_site(f, "x", d);
    p.n_paths = f.count("n_paths", p.n_paths);
    f.check(p.n_paths >= 1, "n_paths", static_cast<double>(p.n_paths), "must be >= 1");
    const auto exit = f.text("exit", "error");
    if (exit == "kill") {
      p.exit = ExitPolicy::kKill;
    } else if (exit != "error") {
      f.error("params.exit '" + exit + "' must be error or kill");
    }
    p.exact = f.flag("exact", true);
    require_R(cfg, f);
    return p;
  }
  if (op == "quenched") {
    QuenchedParams p;
    p.t = read_grid(f, "t", "t_grid", 4);
    check_positive_times(f, "t", p.t, 0.0);
    p.x = read_site(f, "x", d);
    p.curve.n_paths = f.count("n_paths", p.curve.n_paths);
    f.check(p.curve.n_paths >= 1, "n_paths", static_cast<double>(p.curve.n_paths), "must be >= 1");
    p.curve.cell_side = f.integer("cell_side", 0);
    f.check(p.curve.cell_side >= 0, "cell_side", p.curve.cell_side, "must be >= 0");
    p.curve.exact_sites = f.count("exact_sites", p.curve.exact_sites);
    f.check(p.curve.exact_sites >= 1 && p.curve.exact_sites <= DirichletSurvival::kMaxSites, "exact_sites",
            static_cast<double>(p.curve.exact_sites), "is outside the legal range [1, 4096]");
    p.curve.hull_sites = f.count("hull_sites", p.curve.hull_sites);
    f.check(p.curve.hull_sites >= 1 && p.curve.hull_sites <= DirichletSurvival::kMaxSites, "hull_sites",
            static_cast<double>(p.curve.hull_sites), "is outside the legal range [1, 4096]");
    p.curve.budget.wall_seconds = cfg.budget.wall_seconds;
    p.curve.budget.max_paths = cfg.budget.max_paths;
    return p;
  }
  if (op == "scaling") {
    ScalingParams p;
    if (f.has("csv")) {
      p.csv = f.text("csv", "");
      f.note("t");
      f.note("u");
      if (f.has("t") || f.has("u")) f.error("params.csv and params.t/params.u are mutually exclusive");
    } else {
      f.note("csv");
      p.t = f.numbers("t").value_or(std::vector<double>{});
      p.u = f.numbers("u").value_or(std::vector<double>{});
      if (!f.has("t")) f.error("missing required key 'params.t' (or 'params.csv')");
      if (!f.has("u")) f.missing("u");
      if (p.t.size() != p.u.size()) f.error("params.t and params.u must have equal lengths");
    }
    return p;
  }
  if (op == "bracketing") {
    BracketingParams p;
    p.lambda = f.numbers("lambda").value_or(std::vector<double>{});
    if (!f.has("lambda")) f.missing("lambda");
    for (double l : p.lambda) f.check(l > 0.0, "lambda", l, "must be positive");
    p.n_realizations = f.integer("n_realizations", p.n_realizations);
    f.check(p.n_realizations >= 1, "n_realizations", p.n_realizations, "must be >= 1");
    require_R(cfg, f);
    return p;
  }
  if (op == "assumptions") {
    AssumptionsParams p;
    p.check = f.required_text("check").value_or("");
    if (p.check == "moment") {
      p.alpha = f.required_number("alpha").value_or(1.0);
      f.check(p.alpha > 0.0, "alpha", p.alpha, "must be positive");
      p.n = f.integer("n_realizations", 1000);
      f.check(p.n >= 1, "n_realizations", p.n, "must be >= 1");
    } else if (p.check == "correlation") {
      const auto r = f.required_number("r");
      p.layout.r = r.value_or(0.0);
      p.lambda = f.required_number("lambda").value_or(0.0);
      p.n = f.integer("n_realizations", 1000);
      f.check(p.n >= 1000, "n_realizations", p.n, "must be >= 1000");
      if (f.has("r0")) p.correlation.r0 = f.number("r0", 0.0);
      if (f.has("beta")) p.correlation.beta = f.number("beta", 1.0);
      f.note("r0");
      f.note("beta");
      p.correlation.n_bootstrap = f.integer("n_bootstrap", 1000);
      f.check(p.correlation.n_bootstrap >= 1, "n_bootstrap", p.correlation.n_bootstrap, "must be >= 1");
      p.correlation.confidence = f.number("confidence", 0.99);
      f.check(p.correlation.confidence > 0.0 && p.correlation.confidence < 1.0, "confidence",
              p.correlation.confidence, "is outside the legal range (0, 1)");
      bool boxes_ok = true;
      if (const Json* boxes = f.array("boxes")) {
        for (std::size_t k = 0; k < boxes->size(); ++k) {
          const auto w = read_window(&(*boxes)[k], "params.boxes[" + std::to_string(k) + "]", d, h, diags);
          if (w) {
            p.layout.boxes.push_back(*w);
          } else {
            boxes_ok = false;
          }
        }
      } else if (!f.has("boxes")) {
        f.missing("boxes");
        boxes_ok = false;
      }
      if (boxes_ok && r && cfg.model) {
        const double r0 = p.correlation.r0.value_or(default_r0(*cfg.model));
        for (const auto& s : layout_diagnostics(p.layout, r0)) f.error("params layout: " + s);
      }
    } else if (p.check == "displacement") {
      if (cfg.model && cfg.model->variant != ModelSpec::Variant::kPerturbedLattice) {
        f.error("assumptions check displacement needs model.variant = perturbed-lattice");
      }
      if (const Json* b = f.object("box")) {
        if (auto w = read_window(b, "params.box", d, h, diags)) p.box = *w;
      } else if (!f.has("box")) {
        f.missing("box");
      }
      p.r = f.numbers("r").value_or(std::vector<double>{});
      if (!f.has("r")) f.missing("r");
      for (double v : p.r) f.check(v > 0.0, "r", v, "must be positive");
      p.n = f.integer("n_draws", 1000);
      f.check(p.n >= 1, "n_draws", p.n, "must be >= 1");
    } else if (p.check == "sup-scan") {
      p.t = f.numbers("t").value_or(std::vector<double>{});
      if (!f.has("t")) f.missing("t");
      check_positive_times(f, "t", p.t, 1.0);
      p.alpha = f.required_number("alpha").value_or(1.0);
      f.check(p.alpha > 0.0, "alpha", p.alpha, "must be positive");
      p.n = f.integer("n_realizations", 1000);
      f.check(p.n >= 1, "n_realizations", p.n, "must be >= 1");
    } else if (p.check == "tail-probability") {
      p.t = f.numbers("t").value_or(std::vector<double>{});
      if (!f.has("t")) f.missing("t");
      check_positive_times(f, "t", p.t, 1.0);
      p.eps = f.number("eps", 0.5);
      f.check(p.eps >= 0.0 && p.eps <= 1.0, "eps", p.eps, "is outside the legal range [0, 1]");
      if (const Json* rate = f.object("rate")) {
        Fields rf(rate, "params.rate", diags);
        p.phi = read_rate(rf);
      } else if (!f.has("rate")) {
        f.missing("rate");
      }
      p.n = f.integer("n_realizations", 500);
      f.check(p.n >= 1, "n_realizations", p.n, "must be >= 1");
    } else if (p.check == "subbox-chain") {
      p.side = f.integer("side", 8);
      f.check(p.side >= 1, "side", p.side, "must be >= 1");
      p.stride = f.integer("stride", p.side);
      f.check(p.stride >= p.side, "stride", p.stride, "must be >= side");
      p.cutoff_eps = f.number("cutoff_eps", 0.25);
      f.check(p.cutoff_eps > 0.0 && p.cutoff_eps < 0.5, "cutoff_eps", p.cutoff_eps, "is outside the legal range (0, 0.5)");
      p.n = f.integer("n_realizations", 50);
      f.check(p.n >= 1, "n_realizations", p.n, "must be >= 1");
      require_R(cfg, f);
    } else if (!p.check.empty()) {
      f.error("params.check '" + p.check +
              "' must be moment, correlation, displacement, sup-scan, tail-probability or subbox-chain");
    }
    return p;
  }
  return std::monostate{};
}

}  // namespace trapping::cli
