#include "trapping/cli/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <Eigen/Core>
#include <boost/version.hpp>

#include "params.hpp"
#include "trapping/cli/svg.hpp"
#include "trapping/error.hpp"
#include "trapping/io.hpp"
#include "trapping/parallel.hpp"

#ifndef TRAPPING_VERSION
#define TRAPPING_VERSION "0.0.0"
#endif

namespace trapping::cli {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

Json pair_json(const std::pair<double, double>& p) { return Json::array({p.first, p.second}); }

class Context {
 public:
  Context(const ExperimentConfig& cfg, unsigned threads, fs::path dir, std::ostream& out, std::ostream& err,
          bool quiet, RunResult& result)
      : cfg(cfg), hash(config_hash(cfg)), threads(threads), out(out), dir_(std::move(dir)), err_(err),
        quiet_(quiet), result_(result), start_(Clock::now()) {}

  const ExperimentConfig& cfg;
  const std::string hash;
  const unsigned threads;
  std::ostream& out;

  const ModelSpec& model() const { return *cfg.model; }
  const Geometry& geometry() const { return *cfg.geometry; }
  SeedPath seed() const { return SeedPath{cfg.seed, 0, StreamTag::kPotential}; }
  double elapsed() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }
  bool out_of_time() const { return elapsed() > cfg.budget.wall_seconds; }

  void progress(const std::string& msg) const {
    if (!quiet_) err_ << "[" << cfg.operation << "] " << msg << '\n';
  }

  /// Marks the run as budget limited; the first reason wins.
  void exhausted(const std::string& why) {
    if (!budget_hit_) budget_note_ = why;
    budget_hit_ = true;
    progress("budget exhausted: " + why);
  }
  bool budget_hit() const { return budget_hit_; }
  const std::string& budget_note() const { return budget_note_; }

  /// min(n, max_realizations), flagging the cap.
  int realizations(int n) {
    if (n <= cfg.budget.max_realizations) return n;
    exhausted("n_realizations capped at " + std::to_string(cfg.budget.max_realizations) + " of " +
              std::to_string(n));
    return cfg.budget.max_realizations;
  }

  std::string csv_preamble() const {
    std::string s = "# config_hash=" + hash + ",seed=" + std::to_string(cfg.seed);
    if (budget_hit_) s += ",status=budget_exhausted";
    return s + "\n";
  }

  Json record(const Json& body) const {
    Json j;
    j["config_hash"] = hash;
    j["seed"] = cfg.seed;
    for (auto it = body.begin(); it != body.end(); ++it) j[it.key()] = it.value();
    return j;
  }
  /// Re-keys one line of a module's JSON writer as a record.
  template <class T>
  Json record_of(const T& value) const {
    std::ostringstream os;
    write_json(os, value);
    return record(Json::parse(os.str()));
  }

  void write(const std::string& ext, const std::string& content) {
    const fs::path path = dir_ / (cfg.operation + "-" + hash + "." + ext);
    std::ofstream f(path, std::ios::binary);
    f << content;
    f.close();
    if (!f) throw InvalidArgument("cannot write " + path.string());
    result_.outputs.push_back(path);
    progress("wrote " + path.string());
  }
  void write_csv(const std::string& body) { write("csv", csv_preamble() + body); }
  void write_jsonl(const std::vector<Json>& records) {
    std::string s;
    for (const auto& r : records) s += r.dump() + "\n";
    write("jsonl", s);
  }
  void plot(PlotSpec spec, const std::vector<Series>& series) {
    if (!cfg.plots) return;
    Json echo = to_json(cfg);
    echo.erase("output_dir");
    spec.provenance = "config_hash=" + hash + " seed=" + std::to_string(cfg.seed) + " config=" + echo.dump();
    write("svg", line_plot_svg(spec, series));
  }

 private:
  fs::path dir_;
  std::ostream& err_;
  bool quiet_;
  RunResult& result_;
  Clock::time_point start_;
  bool budget_hit_ = false;
  std::string budget_note_;
};

std::string fmt(double x) { return format_double(x); }

BoxRegion box_region(const Geometry& g) { return BoxRegion{g.d, g.R.value_or(1), g.h}; }

// Columns by header name; lines starting with '#' are skipped.
std::map<std::string, std::vector<std::string>> read_csv_columns(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read csv " + path);
  std::vector<std::string> names;
  std::map<std::string, std::vector<std::string>> cols;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
  };
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split(line);
    if (names.empty()) {
      names = cells;
      continue;
    }
    for (std::size_t i = 0; i < names.size(); ++i) cols[names[i]].push_back(i < cells.size() ? cells[i] : "");
  }
  if (names.empty()) throw InvalidArgument("csv " + path + " has no header");
  return cols;
}

const std::vector<std::string>& column(const std::map<std::string, std::vector<std::string>>& cols,
                                       const std::string& name, const std::string& path) {
  const auto it = cols.find(name);
  if (it == cols.end()) throw InvalidArgument("csv " + path + " has no column '" + name + "'");
  return it->second;
}

void run_eigen(Context& ctx, const EigenParams& p) {
  const Window w = geometry_window(ctx.geometry());
  const auto V = generate(ctx.model(), w, ctx.seed());
  std::vector<double> values;
  try {
    const auto H = assemble(V, p.bc, ctx.model().kappa);
    ctx.progress(std::to_string(H.dimension()) + " active sites");
    values = lowest_eigenvalues(H, p.k, p.solver);
  } catch (const FullyTrapped&) {
    values.assign(static_cast<std::size_t>(p.k), std::numeric_limits<double>::infinity());
  }
  std::string csv = "k,lambda\n";
  for (std::size_t i = 0; i < values.size(); ++i) {
    csv += std::to_string(i + 1) + "," + fmt(values[i]) + "\n";
    ctx.out << "lambda_" << i + 1 << " = " << fmt(values[i]) << '\n';
  }
  ctx.write_csv(csv);
}

void run_ids(Context& ctx, const IdsParams& p) {
  const int n = ctx.realizations(p.n_realizations);
  IdsOptions o;
  o.max_eigenvalues = p.max_eigenvalues;
  o.threads = ctx.threads;
  ctx.progress(std::to_string(n) + " realizations on " + std::to_string(box_region(ctx.geometry()).site_count()) +
               " sites");
  const auto est = estimate_ids(ctx.model(), p.bc, box_region(ctx.geometry()), p.lambda, n, ctx.seed(), o);
  std::ostringstream os;
  write_csv(os, est);
  ctx.write_csv(os.str());
  ctx.plot({"Integrated density of states", "lambda", "N(lambda)", true, true, ""},
           {{std::string(to_string(p.bc)), est.lambda, est.mean}});
}

void run_ids_exact(Context& ctx, const IdsExactParams& p) {
  const double q = ctx.model().p;
  const double kappa = ctx.model().kappa;
  std::string csv = p.box_sites ? "lambda,N,log_N,N_box\n" : "lambda,N,log_N\n";
  std::vector<double> n_values;
  for (double l : p.lambda) {
    const double N = ids_1d_hard_exact(q, kappa, l);
    n_values.push_back(N);
    csv += fmt(l) + "," + fmt(N) + "," + fmt(log_ids_1d_hard_exact(q, kappa, l));
    if (p.box_sites) csv += "," + fmt(ids_1d_hard_box(q, kappa, l, *p.box_sites));
    csv += "\n";
  }
  ctx.write_csv(csv);
  ctx.plot({"Exact 1D hard-trap IDS", "lambda", "N(lambda)", true, true, ""}, {{"series", p.lambda, n_values}});
}

void run_fit(Context& ctx, const FitParams& p) {
  std::vector<double> lambda;
  std::vector<double> log_n;
  if (p.source == "csv") {
    const auto cols = read_csv_columns(p.csv);
    const auto& l = column(cols, "lambda", p.csv);
    const bool has_log = cols.count("log_N") > 0;
    const auto& v = has_log ? cols.at("log_N") : column(cols, "mean", p.csv);
    for (std::size_t i = 0; i < l.size(); ++i) {
      const double y = parse_double(v[i]);
      if (has_log ? std::isfinite(y) : y > 0.0) {
        lambda.push_back(parse_double(l[i]));
        log_n.push_back(has_log ? y : std::log(y));
      }
    }
  } else {
    lambda = p.lambda;
    for (double l : lambda) log_n.push_back(log_ids_1d_hard_exact(ctx.model().p, ctx.model().kappa, l));
  }
  const auto fit = fit_lifshitz_log(lambda, log_n, p.lo, p.hi, p.with_log);
  Json r = ctx.record_of(fit);
  r["source"] = p.source;
  ctx.out << r.dump() << '\n';
  ctx.write_jsonl({r});
}

void run_inverse(Context& ctx, const InverseParams& p) {
  std::string csv = "y,psi,phi_psi\n";
  for (double y : p.y) {
    const double psi = asymptotic_inverse(p.phi, y);
    csv += fmt(y) + "," + fmt(psi) + "," + fmt(p.phi(psi)) + "\n";
    ctx.out << "psi(" << fmt(y) << ") = " << fmt(psi) << '\n';
  }
  ctx.write_csv(csv);
}

void run_survival(Context& ctx, const SurvivalParams& p) {
  std::uint64_t n = p.n_paths;
  if (n > ctx.cfg.budget.max_paths) {
    n = ctx.cfg.budget.max_paths;
    ctx.exhausted("n_paths capped at " + std::to_string(n) + " of " + std::to_string(p.n_paths));
  }
  const Window w = geometry_window(ctx.geometry());
  const auto V = generate(ctx.model(), w, ctx.seed());
  const double kappa = ctx.model().kappa;
  ctx.progress(std::to_string(n) + " paths");
  const auto mc = mc_survival(V, kappa, p.t, p.x, n, ctx.seed().with_tag(StreamTag::kWalk), p.exit, ctx.threads);
  std::vector<double> exact;
  if (p.exact) {
    const DirichletSurvival ds(V, w, p.x, kappa);
    for (double t : p.t) exact.push_back(ds(t));
  }
  std::string csv = p.exact ? "t,mc,mc_stderr,exact\n" : "t,mc,mc_stderr\n";
  std::vector<double> est;
  for (std::size_t i = 0; i < p.t.size(); ++i) {
    est.push_back(mc[i].estimate);
    csv += fmt(p.t[i]) + "," + fmt(mc[i].estimate) + "," + fmt(mc[i].std_error);
    if (p.exact) csv += "," + fmt(exact[i]);
    csv += "\n";
  }
  ctx.write_csv(csv);
  std::vector<Series> series{{"mc", p.t, est}};
  if (p.exact) series.push_back({"exact", p.t, exact});
  ctx.plot({"Survival probability", "t", "u(t)", false, true, ""}, series);
}

void run_quenched(Context& ctx, const QuenchedParams& p) {
  CurveOptions o = p.curve;
  o.threads = ctx.threads;
  const auto curve = quenched_curve(ctx.model(), ctx.geometry().d, ctx.geometry().h, ctx.seed(), p.x, p.t, o);
  if (!curve.complete()) ctx.exhausted("some time points were not simulated");
  std::ostringstream os;
  write_csv(os, curve);
  ctx.write_csv(os.str());
  ctx.plot({"Quenched survival", "t", "u(t)", true, true, ""},
           {{"mc", curve.t, curve.mc}, {"lower", curve.t, curve.lower}, {"upper", curve.t, curve.upper}});
}

void run_scaling(Context& ctx, const ScalingParams& p) {
  std::vector<double> t = p.t;
  std::vector<double> u = p.u;
  int dropped = 0;
  if (!p.csv.empty()) {
    const auto cols = read_csv_columns(p.csv);
    const auto& tc = column(cols, "t", p.csv);
    const auto& uc = column(cols, "mc", p.csv);
    const auto st = cols.find("status");
    for (std::size_t i = 0; i < tc.size(); ++i) {
      const double ti = parse_double(tc[i]);
      const double ui = parse_double(uc[i]);
      const bool ok = st == cols.end() || st->second[i] == "ok";
      if (ok && ti > 1.0 && ui > 0.0 && ui < 1.0) {
        t.push_back(ti);
        u.push_back(ui);
      } else {
        ++dropped;
      }
    }
  }
  Json r = ctx.record_of(scaling_check(t, u));
  r["source"] = p.csv.empty() ? "params" : p.csv;
  r["dropped"] = dropped;
  ctx.out << r.dump() << '\n';
  ctx.write_jsonl({r});
}

void run_bracketing(Context& ctx, const BracketingParams& p) {
  const int n = ctx.realizations(p.n_realizations);
  std::vector<Json> records;
  for (double l : p.lambda) {
    if (ctx.out_of_time()) {
      ctx.exhausted("wall clock");
      records.push_back(ctx.record({{"lambda", l}, {"status", "budget_exhausted"}}));
      continue;
    }
    const auto b = bracketing_bounds(ctx.model(), box_region(ctx.geometry()), l, n, ctx.seed(), ctx.threads);
    Json j;
    j["lambda"] = b.lambda;
    j["n_realizations"] = b.n_realizations;
    j["p_dirichlet"] = b.p_dirichlet;
    j["ci_dirichlet"] = pair_json(b.ci_dirichlet);
    j["p_neumann"] = b.p_neumann;
    j["ci_neumann"] = pair_json(b.ci_neumann);
    j["c4"] = b.c4;
    j["lower"] = b.lower;
    j["upper"] = b.upper ? Json(*b.upper) : Json(nullptr);
    j["joint_stderr"] = b.joint_stderr;
    j["bracketing_violations"] = b.bracketing_violations;
    j["status"] = ctx.budget_hit() ? "budget_exhausted" : "ok";
    records.push_back(ctx.record(j));
    ctx.progress("lambda = " + fmt(l) + " done");
  }
  ctx.write_jsonl(records);
}

void run_subbox_chain(Context& ctx, const AssumptionsParams& p, std::vector<Json>& records) {
  const Window region = geometry_window(ctx.geometry());
  const double kappa = ctx.model().kappa;
  const int n = ctx.realizations(p.n);
  int violations = 0;
  int evaluated = 0;
  for (int r = 0; r < n; ++r) {
    const auto V = generate(ctx.model(), region, ctx.seed().with_index(static_cast<std::uint64_t>(r)));
    const auto scan = best_subbox_scan(V, region, p.side, p.stride, kappa);
    Json j;
    j["realization"] = r;
    j["best_index"] = scan.best_index;
    j["lambda_n_min"] = scan.lambda_n_min;
    j["lambda_d_at_best"] = scan.lambda_d_at_best;
    if (std::isfinite(scan.lambda_n_min)) {
      const auto H = assemble(V.restrict(scan.best_cell), BoundaryCondition::kNeumann, kappa);
      const double bound = cutoff_transfer(H, principal_eigenpair(H), p.cutoff_eps);
      const bool holds = scan.lambda_d_at_best <= bound * (1.0 + 1e-9);
      j["cutoff_bound"] = bound;
      j["holds"] = holds;
      violations += !holds;
      ++evaluated;
    } else {
      j["cutoff_bound"] = nullptr;
      j["holds"] = nullptr;
    }
    records.push_back(ctx.record(j));
  }
  records.push_back(ctx.record({{"kind", "summary"},
                                {"realizations", n},
                                {"evaluated", evaluated},
                                {"violations", violations}}));
}

void run_assumptions(Context& ctx, const AssumptionsParams& p) {
  const ModelSpec& m = ctx.model();
  const int d = ctx.geometry().d;
  const double h = ctx.geometry().h;
  std::vector<Json> records;
  if (p.check == "moment") {
    const auto est = moment_estimate(m, d, h, p.alpha, ctx.realizations(p.n), ctx.seed(), ctx.threads);
    records.push_back(ctx.record_of(est));
  } else if (p.check == "correlation") {
    if (p.n > ctx.cfg.budget.max_realizations) {
      ctx.exhausted("correlation needs " + std::to_string(p.n) + " realizations");
      records.push_back(ctx.record({{"kind", "correlation_spot_check"}, {"status", "budget_exhausted"}}));
    } else {
      CorrelationOptions o = p.correlation;
      o.threads = ctx.threads;
      records.push_back(ctx.record_of(correlation_gap(m, p.layout, p.lambda, p.n, ctx.seed(), o)));
    }
  } else if (p.check == "displacement") {
    const int n = ctx.realizations(p.n);
    for (double r : p.r) {
      if (ctx.out_of_time()) {
        ctx.exhausted("wall clock");
        records.push_back(ctx.record({{"r", r}, {"status", "budget_exhausted"}}));
        continue;
      }
      records.push_back(ctx.record_of(displacement_event_rates(m.theta, p.box, r, n, ctx.seed())));
    }
  } else if (p.check == "sup-scan") {
    for (const auto& pt : sup_potential_scan(m, d, h, p.t, p.alpha, ctx.realizations(p.n), ctx.seed(), ctx.threads)) {
      records.push_back(ctx.record({{"t", pt.t},
                                    {"bound", pt.bound},
                                    {"frequency", pt.frequency},
                                    {"ci", pair_json(pt.ci)},
                                    {"assumption_failure", pt.assumption_failure}}));
    }
  } else if (p.check == "tail-probability") {
    const int n = ctx.realizations(p.n);
    for (double t : p.t) {
      if (ctx.out_of_time()) {
        ctx.exhausted("wall clock");
        records.push_back(ctx.record({{"t", t}, {"status", "budget_exhausted"}}));
        continue;
      }
      const auto tp = eigenvalue_tail_probability(m, d, h, t, p.eps, p.phi, n, ctx.seed(), ctx.threads);
      records.push_back(ctx.record({{"t", tp.t},
                                    {"threshold", tp.threshold},
                                    {"p_hat", tp.p_hat},
                                    {"ci", pair_json(tp.ci)},
                                    {"n_realizations", tp.n_realizations}}));
      ctx.progress("t = " + fmt(t) + " done");
    }
  } else {
    run_subbox_chain(ctx, p, records);
  }
  for (auto& r : records) {
    Json tagged;
    for (auto it = r.begin(); it != r.end(); ++it) {
      tagged[it.key()] = it.value();
      if (it.key() == "seed") tagged["check"] = p.check;
    }
    r = std::move(tagged);
  }
  ctx.write_jsonl(records);
}

void dispatch(Context& ctx, const OpParams& params) {
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, EigenParams>) run_eigen(ctx, p);
        else if constexpr (std::is_same_v<T, IdsParams>) run_ids(ctx, p);
        else if constexpr (std::is_same_v<T, IdsExactParams>) run_ids_exact(ctx, p);
        else if constexpr (std::is_same_v<T, FitParams>) run_fit(ctx, p);
        else if constexpr (std::is_same_v<T, InverseParams>) run_inverse(ctx, p);
        else if constexpr (std::is_same_v<T, SurvivalParams>) run_survival(ctx, p);
        else if constexpr (std::is_same_v<T, QuenchedParams>) run_quenched(ctx, p);
        else if constexpr (std::is_same_v<T, ScalingParams>) run_scaling(ctx, p);
        else if constexpr (std::is_same_v<T, BracketingParams>) run_bracketing(ctx, p);
        else if constexpr (std::is_same_v<T, AssumptionsParams>) run_assumptions(ctx, p);
        else ctx.out << "config is valid\n";
      },
      params);
}

Json library_versions() {
  return {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"boost", BOOST_LIB_VERSION},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
          {"compiler", __VERSION__}};
}

}  // namespace

RunResult run(ExperimentConfig cfg, const RunOptions& opts, std::ostream& out, std::ostream& err) {
  RunResult result;
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.output_dir) {
    cfg.output_dir = *opts.output_dir;
  } else if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') {
    cfg.output_dir = env;
  }
  const Diagnostics diags = validate(cfg);
  if (!diags.empty()) {
    for (const auto& d : diags) err << "error: " << d << '\n';
    result.exit_code = kValidation;
    result.message = diags.front();
    return result;
  }
  const OpParams params = [&] {
    Diagnostics unused;
    return parse_params(cfg, unused);
  }();
  const unsigned threads = resolve_threads(opts.threads.value_or(0));
  const fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    err << "error: cannot create output directory " << dir << ": " << ec.message() << '\n';
    result.exit_code = kValidation;
    result.message = "cannot create output directory";
    return result;
  }

  Context ctx(cfg, threads, dir, out, err, opts.quiet, result);
  ctx.progress("config " + ctx.hash + ", seed " + std::to_string(cfg.seed) + ", " + std::to_string(threads) +
               " thread(s)");
  try {
    dispatch(ctx, params);
    if (ctx.budget_hit()) {
      result.exit_code = kBudget;
      result.message = "budget exhausted: " + ctx.budget_note();
    }
  } catch (const InvalidArgument& e) {
    result.exit_code = kValidation;
    result.message = e.what();
  } catch (const NumericalFailure& e) {
    result.exit_code = kNumerical;
    result.message = std::string("numerical failure: ") + e.what();
  } catch (const WalkEscaped& e) {
    result.exit_code = kNumerical;
    result.message = std::string("walk escaped: ") + e.what();
  } catch (const FullyTrapped& e) {
    result.exit_code = kNumerical;
    result.message = e.what();
  }
  if (result.exit_code != kOk) err << "error: " << result.message << '\n';

  Json manifest;
  manifest["tool"] = "trapping";
  manifest["version"] = TRAPPING_VERSION;
  manifest["config"] = to_json(cfg);
  manifest["config_hash"] = ctx.hash;
  manifest["seed"] = cfg.seed;
  manifest["threads"] = threads;
  Json outputs = Json::array();
  for (const auto& p : result.outputs) outputs.push_back(p.filename().string());
  manifest["outputs"] = outputs;
  manifest["exit_code"] = result.exit_code;
  manifest["message"] = result.message;
  manifest["wall_seconds"] = ctx.elapsed();
  manifest["libraries"] = library_versions();
  result.manifest = dir / ("manifest-" + ctx.hash + ".json");
  std::ofstream f(result.manifest, std::ios::binary);
  f << manifest.dump(2) << '\n';
  if (!f) {
    err << "error: cannot write " << result.manifest << '\n';
    if (result.exit_code == kOk) result.exit_code = kValidation;
  }
  ctx.progress("done in " + fmt(std::round(ctx.elapsed() * 1000.0) / 1000.0) + " s, exit " +
               std::to_string(result.exit_code));
  return result;
}

RunResult run_json(const Json& config, const RunOptions& opts, std::ostream& out, std::ostream& err) {
  Json j = config;
  if (opts.seed && j.is_object()) j["seed"] = *opts.seed;
  Diagnostics diags;
  ExperimentConfig cfg = parse_config(j, diags);
  if (!diags.empty()) {
    for (const auto& d : diags) err << "error: " << d << '\n';
    RunResult r;
    r.exit_code = kValidation;
    r.message = diags.front();
    return r;
  }
  return run(std::move(cfg), opts, out, err);
}

RunResult run_manifest(const fs::path& manifest, RunOptions opts, std::ostream& out, std::ostream& err) {
  Json m;
  try {
    m = load_json_file(manifest);
    if (!m.is_object() || !m.contains("config")) throw InvalidArgument(manifest.string() + " has no config");
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    RunResult r;
    r.exit_code = kValidation;
    r.message = e.what();
    return r;
  }
  if (!opts.threads && m.contains("threads") && m["threads"].is_number_unsigned()) {
    opts.threads = m["threads"].get<unsigned>();
  }
  return run_json(m["config"], opts, out, err);
}

int validate_json(const Json& config, std::ostream& out) {
  Diagnostics diags;
  parse_config(config, diags);
  for (const auto& d : diags) out << d << '\n';
  if (diags.empty()) out << "config is valid\n";
  return diags.empty() ? kOk : kValidation;
}

Json load_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
}

}  // namespace trapping::cli
