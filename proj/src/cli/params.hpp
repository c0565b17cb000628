#pragma once

// Typed parameters of each operation, shared by validation and execution.

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "trapping/assumptions.hpp"
#include "trapping/cli/config.hpp"
#include "trapping/hamiltonian.hpp"
#include "trapping/ids.hpp"
#include "trapping/survival.hpp"

namespace trapping::cli {

struct EigenParams {
  BoundaryCondition bc = BoundaryCondition::kDirichlet;
  int k = 1;
  SolverOptions solver;
};

struct IdsParams {
  BoundaryCondition bc = BoundaryCondition::kDirichlet;
  std::vector<double> lambda;
  int n_realizations = 100;
  int max_eigenvalues = 32;
};

struct IdsExactParams {
  std::vector<double> lambda;
  std::optional<int> box_sites;  // adds the finite-box column
};

struct FitParams {
  std::string source = "exact-1d";  // or "csv"
  std::string csv;
  std::vector<double> lambda;  // exact-1d grid
  double lo = 0.0;
  double hi = 0.0;
  bool with_log = false;
};

struct InverseParams {
  RateFunction phi;
  std::vector<double> y;
};

struct SurvivalParams {
  std::vector<double> t;
  Site x{0, 0, 0};
  std::uint64_t n_paths = 100000;
  ExitPolicy exit = ExitPolicy::kError;
  bool exact = true;
};

struct QuenchedParams {
  std::vector<double> t;
  Site x{0, 0, 0};
  CurveOptions curve;
};

struct ScalingParams {
  std::string csv;
  std::vector<double> t;
  std::vector<double> u;
};

struct BracketingParams {
  std::vector<double> lambda;
  int n_realizations = 200;
};

struct AssumptionsParams {
  std::string check;  // moment, correlation, displacement, sup-scan, tail-probability, subbox-chain
  int n = 1000;
  double alpha = 1.0;
  BoxLayout layout;
  double lambda = 0.0;
  CorrelationOptions correlation;
  Window box;
  std::vector<double> r;
  std::vector<double> t;
  double eps = 0.5;
  RateFunction phi;
  int side = 8;
  int stride = 8;
  double cutoff_eps = 0.25;
};

using OpParams = std::variant<std::monostate, EigenParams, IdsParams, IdsExactParams, FitParams, InverseParams,
                              SurvivalParams, QuenchedParams, ScalingParams, BracketingParams, AssumptionsParams>;

/// Parses cfg.params for cfg.operation, appending violations to `diags`.
OpParams parse_params(const ExperimentConfig& cfg, Diagnostics& diags);

/// Window for operations that act on one box: geometry.sides or (-R, R)^d.
Window geometry_window(const Geometry& g);

}  // namespace trapping::cli
