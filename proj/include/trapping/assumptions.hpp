#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "trapping/random_media.hpp"
#include "trapping/rng.hpp"

namespace trapping {

// Moment condition: E[exp{(sup over a unit cell of V)^alpha}].

struct MomentEstimate {
  double estimate = 0.0;  ///< +inf when a sampled cell holds a hard trap
  double std_error = 0.0;
  double log_estimate = 0.0;  ///< log of `estimate`, finite even when it overflows
  bool tail_flag = false;     ///< top decile carries more than half the sum
  double top_decile_share = 0.0;
  int n_realizations = 0;
  int cell_sites = 0;  ///< ceil(1/h)^d
};

/// Each realization seed.with_index(r) is sampled on the cell [0, ceil(1/h))^d
/// of sites; sums run in log space.
MomentEstimate moment_estimate(const ModelSpec& spec, int d, double h, double alpha, int n_realizations,
                               const SeedPath& seed, unsigned threads = 1);

// Short range correlation.

/// Boxes A_1..A_n with separation parameter r. Boxes are lattice windows;
/// distances and diameters are physical.
struct BoxLayout {
  std::vector<Window> boxes;
  double r = 0.0;
};

/// Every violated layout rule, in a fixed order; empty when the layout is
/// usable: min pairwise distance > r >= r0, max diameter < r, r > 0, common d.
std::vector<std::string> layout_diagnostics(const BoxLayout& layout, double r0);

struct CorrelationOptions {
  std::optional<double> r0;    ///< default 8 * profile radius
  std::optional<double> beta;  ///< default theta / 2 for the perturbed lattice, else 1
  int n_bootstrap = 1000;
  double confidence = 0.99;
  unsigned threads = 1;
};

double default_r0(const ModelSpec& spec);
double default_beta(const ModelSpec& spec);

struct CorrelationReport {
  BoxLayout layout;
  double lambda = 0.0;
  double r0 = 0.0;
  double beta = 0.0;
  int n_realizations = 0;
  double p_joint = 0.0;  ///< P(all E_k)
  double p_first = 0.0;  ///< P(E_1)
  double p_rest = 0.0;   ///< P(E_2 .. E_n), 1 for a single box
  double gap = 0.0;      ///< p_joint - p_first * p_rest
  double abs_gap = 0.0;
  std::pair<double, double> ci;  ///< bootstrap percentile interval of `gap`
  double bootstrap_stderr = 0.0;
  double confidence = 0.0;
  double reference = 0.0;          ///< exp(-r^beta)
  std::optional<double> envelope;  ///< perturbed lattice only
};

/// E_k = {lambda^N_1(A_k) <= lambda}; all events are read off the same
/// realizations. Throws InvalidArgument on a layout violation before any
/// sampling.
CorrelationReport correlation_gap(const ModelSpec& spec, const BoxLayout& layout, double lambda,
                                  int n_realizations, const SeedPath& seed, const CorrelationOptions& opts = {});

/// N(d, theta) r^d (2 + c10 r^d) exp(-(r/8)^theta) with c10 = 1.
double perturbed_lattice_envelope(int d, double theta, double r);

// Displacement events of the perturbed lattice around a box A_1:
//   E_1^c: some q with d(q, A_1) <= r/2 has d(q + w_q, A_1) > 3r/4
//   E_2^c: some q with d(q, A_1) >= r/2 has d(q + w_q, A_1) < r/4

/// Draws a displacement; replaces the exp(-|x|^theta) law when supplied.
using DisplacementSampler = std::function<Point(SplitMix64&)>;

struct EventRates {
  double r = 0.0;
  double theta = 0.0;
  int n_draws = 0;
  double p_e1c = 0.0;
  double p_e2c = 0.0;
  double p_far = 0.0;  ///< E_2^c caused by some q with |q - center(A_1)| > r
  std::pair<double, double> ci_e1c;
  std::pair<double, double> ci_e2c;
  std::pair<double, double> ci_far;
  double envelope_e1 = 0.0;     ///< N(d, theta) r^d exp(-(r/8)^theta)
  double envelope_total = 0.0;  ///< perturbed_lattice_envelope
  double far_series = 0.0;      ///< sum over |q - center| > r of exp(-|(q - center)/4|^theta)
  std::size_t lattice_points = 0;  ///< q examined per draw
};

/// Lattice points whose displacement cannot reach the events with
/// probability above 1e-14 are skipped.
EventRates displacement_event_rates(double theta, const Window& a1, double r, int n_draws, const SeedPath& seed,
                                    const DisplacementSampler& sampler = {});

/// Sum over q in Z^d with |q - center| > r of exp(-|(q - center)/4|^theta).
double far_displacement_series(int d, double theta, const Point& center, double r);

void write_json(std::ostream& os, const MomentEstimate& m);
void write_json(std::ostream& os, const CorrelationReport& c);
void write_json(std::ostream& os, const EventRates& e);

}  // namespace trapping
