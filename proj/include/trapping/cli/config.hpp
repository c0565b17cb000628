#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "trapping/random_media.hpp"

namespace trapping::cli {

using Json = nlohmann::ordered_json;
using Diagnostics = std::vector<std::string>;

inline const std::vector<std::string>& operations() {
  static const std::vector<std::string> ops = {"eigen",    "ids",     "ids-exact-1d", "lifshitz-fit",
                                               "inverse",  "survival", "quenched",    "scaling",
                                               "bracketing", "assumptions", "validate"};
  return ops;
}

struct Geometry {
  int d = 1;
  std::optional<int> R;
  double h = 1.0;
  /// Box extents for `eigen`; overrides R.
  std::optional<std::vector<int>> sides;

  bool operator==(const Geometry&) const = default;
};

struct BudgetConfig {
  double wall_seconds = std::numeric_limits<double>::infinity();
  std::uint64_t max_paths = std::numeric_limits<std::uint64_t>::max();
  int max_realizations = std::numeric_limits<int>::max();

  bool operator==(const BudgetConfig&) const = default;
};

/// One experiment: model, geometry, operation parameters, seed, outputs.
struct ExperimentConfig {
  std::string operation;
  std::optional<ModelSpec> model;
  std::optional<Geometry> geometry;
  Json params = Json::object();
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  BudgetConfig budget;
  bool plots = false;
};

bool same_model(const ModelSpec& a, const ModelSpec& b);
bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

/// Parses and checks the structure, ranges and operation parameters,
/// collecting every violation. The config is usable iff `diags` stays empty.
ExperimentConfig parse_config(const Json& j, Diagnostics& diags);
/// Throws InvalidArgument listing every diagnostic.
ExperimentConfig parse_config(const Json& j);

/// Diagnostics for an already parsed config (operation parameters, layout
/// rules, budget sanity).
Diagnostics validate(const ExperimentConfig& cfg);

/// Canonical form; parse_config(to_json(c)) == c.
Json to_json(const ExperimentConfig& cfg);

/// FNV-1a 64 of the canonical form with sorted keys and without output_dir,
/// as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace trapping::cli
