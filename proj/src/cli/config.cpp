#include "trapping/cli/config.hpp"

#include <algorithm>
#include <cmath>

#include "fields.hpp"
#include "params.hpp"
#include "trapping/error.hpp"

namespace trapping::cli {

namespace {

using Variant = ModelSpec::Variant;

bool known_operation(const std::string& op) {
  const auto& ops = operations();
  return std::find(ops.begin(), ops.end(), op) != ops.end();
}

bool needs_model(const std::string& op, const Json& params) {
  if (op == "lifshitz-fit") {
    return !(params.is_object() && params.contains("source") && params["source"] == "csv");
  }
  return op.empty() || !known_operation(op) ||
         (op != "inverse" && op != "scaling" && op != "validate");
}

bool needs_geometry(const std::string& op) {
  return op.empty() || !known_operation(op) || op == "eigen" || op == "ids" || op == "survival" ||
         op == "quenched" || op == "bracketing" || op == "assumptions";
}

Json number_json(double x) {
  if (std::isinf(x)) return x > 0 ? Json("inf") : Json("-inf");
  return Json(x);
}

std::optional<ModelSpec> parse_model(const Json* j, Diagnostics& diags) {
  Fields f(j, "model", diags);
  const std::size_t before = diags.size();
  ModelSpec m;
  const auto variant = f.required_text("variant");
  if (variant) {
    try {
      m.variant = parse_variant(*variant);
    } catch (const InvalidArgument& e) {
      f.error(std::string("model.variant: ") + e.what());
      return std::nullopt;
    }
  } else {
    return std::nullopt;
  }
  m.kappa = f.number("kappa", 0.5);
  f.check(m.kappa > 0.0 && std::isfinite(m.kappa), "kappa", m.kappa, "must be positive and finite");

  struct Param {
    const char* key;
    Variant owner;
  };
  for (const Param& p : {Param{"p", Variant::kBernoulli}, Param{"gamma", Variant::kIidTail},
                         Param{"nu", Variant::kPoisson}, Param{"theta", Variant::kPerturbedLattice}}) {
    if (p.owner == m.variant) continue;
    f.note(p.key);
    if (f.has(p.key)) f.error(f.path(p.key) + " does not apply to variant " + std::string(to_string(m.variant)));
  }
  switch (m.variant) {
    case Variant::kBernoulli:
      if (auto p = f.required_number("p")) {
        m.p = *p;
        f.check(m.p >= 0.0 && m.p <= 1.0, "p", m.p, "is outside the legal range [0, 1]");
      }
      break;
    case Variant::kIidTail:
      if (auto g = f.required_number("gamma")) {
        m.gamma = *g;
        f.check(m.gamma > 0.0 && std::isfinite(m.gamma), "gamma", m.gamma, "must be positive and finite");
      }
      break;
    case Variant::kPoisson:
      if (auto nu = f.required_number("nu")) {
        m.nu = *nu;
        f.check(m.nu >= 0.0 && std::isfinite(m.nu), "nu", m.nu, "must be >= 0 and finite");
      }
      break;
    case Variant::kPerturbedLattice:
      if (auto th = f.required_number("theta")) {
        m.theta = *th;
        f.check(m.theta > 0.0 && std::isfinite(m.theta), "theta", m.theta, "must be positive and finite");
      }
      break;
  }

  if (m.variant == Variant::kIidTail) {
    f.note("profile");
    if (f.has("profile")) f.error("model.profile does not apply to variant iid-tail");
  } else if (!f.has("profile")) {
    f.missing("profile");
    f.note("profile");
  } else if (const Json* pj = f.object("profile")) {
    Fields pf(pj, "model.profile", diags);
    const auto shape = pf.required_text("shape");
    const auto height = pf.required_number("height");
    if (height) pf.check(*height > 0.0, "height", *height, "must be positive (\"inf\" for hard traps)");
    if (shape && *shape == "ball") {
      const auto radius = pf.required_number("radius");
      if (radius) pf.check(*radius >= 0.0 && std::isfinite(*radius), "radius", *radius, "must be >= 0 and finite");
      m.profile = TrapProfile::ball(radius.value_or(0.0), height.value_or(1.0));
    } else if (shape && *shape == "spike") {
      pf.note("radius");
      if (pf.has("radius")) pf.error("model.profile.radius does not apply to shape spike");
      m.profile = TrapProfile::spike(height.value_or(1.0));
    } else if (shape) {
      pf.error("model.profile.shape '" + *shape + "' must be ball or spike");
    }
  }
  f.finish();
  if (diags.size() == before) {
    try {
      m.validate();
    } catch (const InvalidArgument& e) {
      f.error(std::string("model: ") + e.what());
    }
  }
  return diags.size() == before ? std::optional<ModelSpec>(m) : std::nullopt;
}

std::optional<Geometry> parse_geometry(const Json* j, Diagnostics& diags) {
  Fields f(j, "geometry", diags);
  const std::size_t before = diags.size();
  Geometry g;
  const auto d = f.required_integer("d");
  if (d) {
    g.d = *d;
    f.check(g.d >= 1 && g.d <= 3, "d", g.d, "is outside the legal range [1, 3]");
  }
  if (f.has("R")) {
    g.R = f.integer("R", 1);
    f.check(*g.R >= 1, "R", *g.R, "must be >= 1");
  } else {
    f.note("R");
  }
  g.h = f.number("h", 1.0);
  f.check(g.h > 0.0 && std::isfinite(g.h), "h", g.h, "must be positive and finite");
  if (auto sides = f.integers("sides")) {
    g.sides = *sides;
    if (static_cast<int>(sides->size()) != g.d) {
      f.error("geometry.sides must list exactly d = " + std::to_string(g.d) + " extents");
    }
    for (int s : *sides) {
      if (s < 1) f.error("geometry.sides entries must be >= 1");
    }
  }
  f.finish();
  return diags.size() == before ? std::optional<Geometry>(g) : std::nullopt;
}

}  // namespace

bool same_model(const ModelSpec& a, const ModelSpec& b) {
  return a.variant == b.variant && a.profile.shape == b.profile.shape && a.profile.radius == b.profile.radius &&
         a.profile.height == b.profile.height && a.kappa == b.kappa && a.p == b.p && a.gamma == b.gamma &&
         a.nu == b.nu && a.theta == b.theta;
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  const bool models = a.model.has_value() == b.model.has_value() && (!a.model || same_model(*a.model, *b.model));
  return a.operation == b.operation && models && a.geometry == b.geometry && a.params == b.params &&
         a.seed == b.seed && a.output_dir == b.output_dir && a.budget == b.budget && a.plots == b.plots;
}

ExperimentConfig parse_config(const Json& j, Diagnostics& diags) {
  ExperimentConfig cfg;
  if (!j.is_object()) {
    diags.push_back("config must be a JSON object");
    return cfg;
  }
  {
    Fields f(&j, "", diags);
    const auto op = f.required_text("operation");
    if (op) {
      cfg.operation = *op;
      if (!known_operation(cfg.operation)) {
        std::string list;
        for (const auto& o : operations()) list += (list.empty() ? "" : ", ") + o;
        f.error("operation '" + cfg.operation + "' is not one of: " + list);
      }
    }
    if (!f.has("seed")) {
      f.missing("seed");
      f.note("seed");
    } else {
      cfg.seed = f.count("seed", 0);
    }
    if (const Json* p = f.object("params")) cfg.params = *p;

    if (f.has("model")) {
      if (const Json* m = f.object("model")) cfg.model = parse_model(m, diags);
    } else {
      f.note("model");
      if (needs_model(cfg.operation, cfg.params)) f.missing("model");
    }
    if (f.has("geometry")) {
      if (const Json* g = f.object("geometry")) cfg.geometry = parse_geometry(g, diags);
    } else {
      f.note("geometry");
      if (needs_geometry(cfg.operation)) f.missing("geometry");
    }

    cfg.output_dir = f.text("output_dir", "out");
    if (cfg.output_dir.empty()) f.error("output_dir must not be empty");
    cfg.plots = f.flag("plots", false);
    if (const Json* b = f.object("budget")) {
      Fields bf(b, "budget", diags);
      cfg.budget.wall_seconds = bf.number("wall_seconds", cfg.budget.wall_seconds);
      bf.check(cfg.budget.wall_seconds > 0.0, "wall_seconds", cfg.budget.wall_seconds, "must be positive");
      cfg.budget.max_paths = bf.count("max_paths", cfg.budget.max_paths);
      bf.check(cfg.budget.max_paths >= 1, "max_paths", static_cast<double>(cfg.budget.max_paths), "must be >= 1");
      cfg.budget.max_realizations = bf.integer("max_realizations", cfg.budget.max_realizations);
      bf.check(cfg.budget.max_realizations >= 1, "max_realizations", cfg.budget.max_realizations, "must be >= 1");
    }
  }
  if (known_operation(cfg.operation)) {
    const bool model_ok = cfg.model.has_value() || !needs_model(cfg.operation, cfg.params);
    const bool geometry_ok = cfg.geometry.has_value() || !needs_geometry(cfg.operation);
    if (model_ok && geometry_ok) parse_params(cfg, diags);
  }
  return cfg;
}

ExperimentConfig parse_config(const Json& j) {
  Diagnostics diags;
  ExperimentConfig cfg = parse_config(j, diags);
  if (!diags.empty()) {
    std::string msg = "invalid config:";
    for (const auto& d : diags) msg += "\n  " + d;
    throw InvalidArgument(msg);
  }
  return cfg;
}

Diagnostics validate(const ExperimentConfig& cfg) {
  Diagnostics diags;
  parse_config(to_json(cfg), diags);
  return diags;
}

Json to_json(const ExperimentConfig& cfg) {
  Json j;
  j["operation"] = cfg.operation;
  if (cfg.model) {
    const ModelSpec& m = *cfg.model;
    Json mj;
    mj["variant"] = std::string(to_string(m.variant));
    mj["kappa"] = m.kappa;
    switch (m.variant) {
      case Variant::kBernoulli: mj["p"] = m.p; break;
      case Variant::kIidTail: mj["gamma"] = m.gamma; break;
      case Variant::kPoisson: mj["nu"] = m.nu; break;
      case Variant::kPerturbedLattice: mj["theta"] = m.theta; break;
    }
    if (m.variant != Variant::kIidTail) {
      Json pj;
      pj["shape"] = m.profile.shape == TrapProfile::Shape::kBall ? "ball" : "spike";
      if (m.profile.shape == TrapProfile::Shape::kBall) pj["radius"] = m.profile.radius;
      pj["height"] = number_json(m.profile.height);
      mj["profile"] = pj;
    }
    j["model"] = mj;
  }
  if (cfg.geometry) {
    Json g;
    g["d"] = cfg.geometry->d;
    if (cfg.geometry->R) g["R"] = *cfg.geometry->R;
    g["h"] = cfg.geometry->h;
    if (cfg.geometry->sides) g["sides"] = *cfg.geometry->sides;
    j["geometry"] = g;
  }
  j["params"] = cfg.params;
  j["seed"] = cfg.seed;
  j["output_dir"] = cfg.output_dir;
  j["budget"] = {{"wall_seconds", number_json(cfg.budget.wall_seconds)},
                 {"max_paths", cfg.budget.max_paths},
                 {"max_realizations", cfg.budget.max_realizations}};
  j["plots"] = cfg.plots;
  return j;
}

std::string config_hash(const ExperimentConfig& cfg) {
  // The output location does not change any artifact, so it is not hashed.
  ExperimentConfig keyed = cfg;
  keyed.output_dir = "out";
  const std::string canonical = nlohmann::json(to_json(keyed)).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

}  // namespace trapping::cli
