#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "trapping/cli/config.hpp"
#include "trapping/cli/run.hpp"
#include "trapping/cli/svg.hpp"
#include "trapping/error.hpp"
#include "trapping/io.hpp"

using namespace trapping;
using namespace trapping::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("trapping-cli-" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Json hard_bernoulli(double p) {
  return {{"variant", "bernoulli"}, {"p", p}, {"profile", {{"shape", "spike"}, {"height", "inf"}}}};
}

Json eigen_config() {
  return {{"operation", "eigen"},
          {"seed", 1},
          {"model", hard_bernoulli(0.0)},
          {"geometry", {{"d", 1}, {"sides", {3}}}},
          {"params", {{"k", 3}}}};
}

Json quenched_config() {
  return {{"operation", "quenched"},
          {"seed", 11},
          {"model", {{"variant", "bernoulli"}, {"p", 0.3}, {"profile", {{"shape", "spike"}, {"height", 2.0}}}}},
          {"geometry", {{"d", 1}, {"R", 8}}},
          {"params", {{"t", {2.0, 4.0, 8.0, 16.0}}, {"n_paths", 3000}}},
          {"plots", true}};
}

Diagnostics diagnose(const Json& j) {
  Diagnostics d;
  parse_config(j, d);
  return d;
}

bool any_contains(const Diagnostics& d, const std::string& needle) {
  for (const auto& s : d) {
    if (s.find(needle) != std::string::npos) return true;
  }
  return false;
}

RunResult quiet_run(const Json& j, const fs::path& dir, RunOptions opts = {}) {
  opts.quiet = true;
  opts.output_dir = dir.string();
  std::ostringstream out;
  std::ostringstream err;
  return run_json(j, opts, out, err);
}

int tool(const std::string& args) {
  const int status = std::system((std::string(TRAPPING_TOOL) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Exact per-site IDS of 1D hard traps, summed directly over gap lengths.
double series_ids(double p, double kappa, double lambda) {
  double sum = 0.0;
  double weight = p * p;
  for (int l = 1; l < 20000; ++l) {
    weight *= 1.0 - p;
    int count = 0;
    for (int k = 1; k <= l; ++k) count += 2.0 * kappa * (1.0 - std::cos(k * std::numbers::pi / (l + 1))) <= lambda;
    sum += weight * count;
    if (weight * l < 1e-18 * sum) break;
  }
  return sum;
}

}  // namespace

TEST_CASE("config round trip and hash") {
  for (const Json& j : {eigen_config(), quenched_config()}) {
    const auto cfg = parse_config(j);
    const auto again = parse_config(to_json(cfg));
    CHECK(again == cfg);
    CHECK(config_hash(again) == config_hash(cfg));
    CHECK(config_hash(cfg).size() == 16);
    CHECK(to_json(again) == to_json(cfg));

    auto moved = cfg;
    moved.output_dir = "elsewhere";
    CHECK(config_hash(moved) == config_hash(cfg));
    auto reseeded = cfg;
    reseeded.seed += 1;
    CHECK(config_hash(reseeded) != config_hash(cfg));
  }
  Json soft = quenched_config();
  soft["budget"] = {{"wall_seconds", "inf"}, {"max_paths", 5000}};
  const auto cfg = parse_config(soft);
  CHECK(std::isinf(cfg.budget.wall_seconds));
  CHECK(cfg.budget.max_paths == 5000);
  CHECK(parse_config(to_json(cfg)) == cfg);
}

TEST_CASE("diagnostics") {
  SUBCASE("out of range parameter names the field and the legal range") {
    Json j = eigen_config();
    j["model"]["p"] = 1.5;
    const auto d = diagnose(j);
    REQUIRE(d.size() == 1);
    CHECK(d[0].find("model.p") != std::string::npos);
    CHECK(d[0].find("[0, 1]") != std::string::npos);
  }
  SUBCASE("unknown keys are named") {
    Json j = eigen_config();
    j["colour"] = "blue";
    j["model"]["profile"]["width"] = 2;
    const auto d = diagnose(j);
    CHECK(any_contains(d, "unknown key 'colour'"));
    CHECK(any_contains(d, "unknown key 'model.profile.width'"));
    CHECK_THROWS_AS(parse_config(j), InvalidArgument);
  }
  SUBCASE("empty config lists every required key") {
    const auto d = diagnose(Json::object());
    for (const char* key : {"'operation'", "'seed'", "'model'", "'geometry'"}) CHECK(any_contains(d, key));
  }
  SUBCASE("touching correlation boxes cite the distance rule") {
    Json j = {{"operation", "assumptions"},
              {"seed", 1},
              {"model", hard_bernoulli(0.5)},
              {"geometry", {{"d", 1}, {"R", 4}}},
              {"params",
               {{"check", "correlation"},
                {"lambda", 0.2},
                {"r", 9},
                {"n_realizations", 1000},
                {"boxes", {{{"lo", {0}}, {"extent", {8}}}, {{"lo", {8}}, {"extent", {8}}}}}}}};
    CHECK(any_contains(diagnose(j), "min pairwise distance"));
    j["params"]["boxes"][1]["lo"] = {18};
    CHECK(diagnose(j).empty());
    j["params"]["n_realizations"] = 10;
    CHECK(any_contains(diagnose(j), "n_realizations"));
  }
  SUBCASE("parameters of another variant are rejected") {
    Json j = eigen_config();
    j["model"]["gamma"] = 1.0;
    CHECK(any_contains(diagnose(j), "model.gamma does not apply"));
  }
  SUBCASE("every violation is collected") {
    Json j = eigen_config();
    j["model"]["p"] = -1;
    j["geometry"]["d"] = 7;
    j["params"]["k"] = 0;
    j["budget"] = {{"max_realizations", 0}};
    const auto d = diagnose(j);
    CHECK(any_contains(d, "model.p"));
    CHECK(any_contains(d, "geometry.d"));
    CHECK(any_contains(d, "budget.max_realizations"));
  }
  SUBCASE("validate reports without running") {
    std::ostringstream os;
    CHECK(validate_json(eigen_config(), os) == kOk);
    Json bad = eigen_config();
    bad["model"]["p"] = 1.5;
    std::ostringstream os2;
    CHECK(validate_json(bad, os2) == kValidation);
    CHECK(os2.str().find("model.p") != std::string::npos);
  }
}

TEST_CASE("eigen on the free three-site Dirichlet path") {
  const auto dir = scratch("eigen");
  std::ostringstream out;
  std::ostringstream err;
  RunOptions opts;
  opts.quiet = true;
  opts.output_dir = dir.string();
  const auto r = run_json(eigen_config(), opts, out, err);
  REQUIRE(r.exit_code == kOk);
  const std::string text = out.str();
  const auto pos = text.find("lambda_1 = ");
  REQUIRE(pos != std::string::npos);
  const double l1 = parse_double(text.substr(pos + 11, text.find('\n', pos) - pos - 11));
  CHECK(std::abs(l1 - (1.0 - std::cos(std::numbers::pi / 4))) < 1e-12);
}

TEST_CASE("ids-exact-1d matches direct series summation") {
  const auto dir = scratch("exact");
  const Json j = {{"operation", "ids-exact-1d"},
                  {"seed", 3},
                  {"model", hard_bernoulli(0.5)},
                  {"params", {{"lambda", {1e-3, 1e-2, 0.05, 0.2, 0.7, 1.5}}}}};
  const auto r = quiet_run(j, dir);
  REQUIRE(r.exit_code == kOk);
  REQUIRE(r.outputs.size() == 1);
  std::istringstream csv(slurp(r.outputs[0]));
  std::string line;
  std::getline(csv, line);
  CHECK(line.rfind("# config_hash=", 0) == 0);
  std::getline(csv, line);
  CHECK(line == "lambda,N,log_N");
  int rows = 0;
  while (std::getline(csv, line)) {
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    const double lambda = parse_double(line.substr(0, c1));
    const double n = parse_double(line.substr(c1 + 1, c2 - c1 - 1));
    const double oracle = series_ids(0.5, 0.5, lambda);
    CHECK(n == doctest::Approx(oracle).epsilon(1e-12));
    ++rows;
  }
  CHECK(rows == 6);
}

TEST_CASE("artifacts carry the hash and seed and reproduce exactly") {
  const auto a = scratch("det-a");
  const auto b = scratch("det-b");
  RunOptions one;
  one.threads = 1;
  RunOptions two;
  two.threads = 2;
  const auto ra = quiet_run(quenched_config(), a, one);
  const auto rb = quiet_run(quenched_config(), b, two);
  REQUIRE(ra.exit_code == kOk);
  REQUIRE(rb.exit_code == kOk);
  REQUIRE(ra.outputs.size() == 2);
  REQUIRE(rb.outputs.size() == ra.outputs.size());
  const std::string hash = config_hash(parse_config(quenched_config()));
  for (std::size_t i = 0; i < ra.outputs.size(); ++i) {
    CHECK(ra.outputs[i].filename() == rb.outputs[i].filename());
    CHECK(slurp(ra.outputs[i]) == slurp(rb.outputs[i]));
    const std::string text = slurp(ra.outputs[i]);
    CHECK(text.find("config_hash=" + hash) != std::string::npos);
    CHECK(text.find("seed=11") != std::string::npos);
  }
  CHECK(ra.outputs[0].filename() == "quenched-" + hash + ".csv");
  CHECK(ra.manifest.filename() == "manifest-" + hash + ".json");

  const Json manifest = load_json_file(ra.manifest);
  CHECK(manifest["config_hash"] == hash);
  CHECK(manifest["seed"] == 11);
  CHECK(manifest["exit_code"] == 0);
  CHECK(manifest["outputs"].size() == 2);
  CHECK(manifest["libraries"].contains("eigen"));

  SUBCASE("rerun from the manifest") {
    const auto c = scratch("det-c");
    std::ostringstream out;
    std::ostringstream err;
    RunOptions opts;
    opts.quiet = true;
    opts.output_dir = c.string();
    const auto rc = run_manifest(ra.manifest, opts, out, err);
    REQUIRE(rc.exit_code == kOk);
    REQUIRE(rc.outputs.size() == ra.outputs.size());
    for (std::size_t i = 0; i < rc.outputs.size(); ++i) CHECK(slurp(rc.outputs[i]) == slurp(ra.outputs[i]));
  }
  SUBCASE("seed override") {
    RunOptions opts;
    opts.seed = 12;
    const auto rs = quiet_run(quenched_config(), scratch("det-seed"), opts);
    REQUIRE(rs.exit_code == kOk);
    const std::string text = slurp(rs.outputs[0]);
    CHECK(text.find("seed=12") != std::string::npos);
    CHECK(rs.outputs[0].filename() != ra.outputs[0].filename());
    CHECK(text != slurp(ra.outputs[0]));
  }
  SUBCASE("JSON records") {
    const Json j = {{"operation", "scaling"},
                    {"seed", 11},
                    {"params", {{"csv", ra.outputs[0].string()}}}};
    const auto rs = quiet_run(j, scratch("det-json"));
    REQUIRE(rs.exit_code == kOk);
    const Json rec = Json::parse(slurp(rs.outputs[0]));
    CHECK(rec["config_hash"] == config_hash(parse_config(j)));
    CHECK(rec["seed"] == 11);
    CHECK(rec["n_points"] == 4);
  }
}

TEST_CASE("output directory environment variable") {
  const auto env_dir = scratch("env");
  const auto flag_dir = scratch("flag");
  ::setenv(kOutputDirEnv, env_dir.string().c_str(), 1);
  std::ostringstream out;
  std::ostringstream err;
  RunOptions opts;
  opts.quiet = true;
  const auto r = run_json(eigen_config(), opts, out, err);
  CHECK(r.exit_code == kOk);
  CHECK(r.manifest.parent_path() == env_dir);
  CHECK(fs::exists(r.manifest));
  opts.output_dir = flag_dir.string();
  const auto r2 = run_json(eigen_config(), opts, out, err);
  CHECK(r2.manifest.parent_path() == flag_dir);
  ::unsetenv(kOutputDirEnv);
}

TEST_CASE("exit codes of the command line tool") {
  const auto dir = scratch("exit");
  auto write = [&](const std::string& name, const Json& j) {
    const auto p = dir / name;
    std::ofstream(p) << j.dump();
    return p.string();
  };
  const std::string out = " --quiet --output-dir " + (dir / "out").string();

  CHECK(tool("eigen --config " + write("ok.json", eigen_config()) + out) == kOk);

  Json bad = eigen_config();
  bad["model"]["p"] = 1.5;
  CHECK(tool("eigen --config " + write("bad.json", bad) + out) == kValidation);
  CHECK(tool("validate --config " + write("bad2.json", bad)) == kValidation);
  CHECK(tool("validate --config " + write("ok2.json", eigen_config())) == kOk);
  CHECK(tool("ids --config " + write("mismatch.json", eigen_config()) + out) == kValidation);
  CHECK(tool("eigen --config " + (dir / "missing.json").string() + out) == kValidation);

  Json capped = {{"operation", "survival"},
                 {"seed", 4},
                 {"model", {{"variant", "bernoulli"}, {"p", 0.2}, {"profile", {{"shape", "spike"}, {"height", 1.0}}}}},
                 {"geometry", {{"d", 1}, {"R", 10}}},
                 {"params", {{"t", {1.0, 2.0}}, {"n_paths", 5000}, {"exit", "kill"}}},
                 {"budget", {{"max_paths", 1000}}}};
  CHECK(tool("survival --config " + write("budget.json", capped) + out) == kBudget);
  const auto capped_hash = config_hash(parse_config(capped));
  const std::string csv = slurp(dir / "out" / ("survival-" + capped_hash + ".csv"));
  CHECK(csv.find("status=budget_exhausted") != std::string::npos);

  Json slow = {{"operation", "eigen"},
               {"seed", 1},
               {"model", {{"variant", "bernoulli"}, {"p", 0.1}, {"profile", {{"shape", "ball"}, {"radius", 1.0}, {"height", 1.0}}}}},
               {"geometry", {{"d", 2}, {"R", 30}}},
               {"params", {{"k", 4}, {"method", "lanczos"}, {"max_iter", 5}}}};
  CHECK(tool("eigen --config " + write("numeric.json", slow) + out) == kNumerical);
  const Json manifest = load_json_file(dir / "out" / ("manifest-" + config_hash(parse_config(slow)) + ".json"));
  CHECK(manifest["exit_code"] == kNumerical);
}

TEST_CASE("svg plots") {
  PlotSpec spec{"t", "x", "y", true, true, "config_hash=abc -- seed=1"};
  const auto svg = line_plot_svg(spec, {{"a", {1, 10, 100}, {1, 0.1, 0.0}}, {"b", {1, 2}, {0.5, 0.25}}});
  CHECK(svg.rfind("<?xml", 0) == 0);
  CHECK(svg.find("<!-- config_hash=abc - - seed=1 -->") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("nan") == std::string::npos);
}
