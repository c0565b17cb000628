#pragma once

#include <array>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trapping/lattice.hpp"
#include "trapping/rng.hpp"

namespace trapping {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// A point of R^d in physical units (site x sits at h * x).
using Point = std::array<double, kMaxDim>;

/// Single trap shape W: either v0 on the closed ball of radius a around the
/// (rounded) center, or v0 on the center site only.
struct TrapProfile {
  enum class Shape { kBall, kSpike };

  Shape shape = Shape::kBall;
  double radius = 0.0;
  double height = 1.0;  ///< +inf for hard traps

  static TrapProfile ball(double radius, double height) { return {Shape::kBall, radius, height}; }
  static TrapProfile spike(double height) { return {Shape::kSpike, 0.0, height}; }

  bool hard() const { return height == kInfinity; }
  /// Number of sites a trap center reaches along each axis.
  int reach_sites(double h) const;
  void validate() const;
};

/// One of the four trap models plus diffusion constant.
struct ModelSpec {
  enum class Variant { kBernoulli, kIidTail, kPoisson, kPerturbedLattice };

  Variant variant = Variant::kBernoulli;
  TrapProfile profile = TrapProfile::spike(1.0);
  double kappa = 0.5;
  double p = 0.0;      ///< Bernoulli occupation probability
  double gamma = 1.0;  ///< IidTail exponent
  double nu = 0.0;     ///< Poisson intensity
  double theta = 1.0;  ///< perturbed-lattice displacement exponent

  static ModelSpec bernoulli(double p, TrapProfile profile, double kappa = 0.5);
  static ModelSpec iid_tail(double gamma, double kappa = 0.5);
  static ModelSpec poisson(double nu, TrapProfile profile, double kappa = 0.5);
  static ModelSpec perturbed_lattice(double theta, TrapProfile profile, double kappa = 0.5);

  /// Throws InvalidArgument describing the first violated range.
  void validate() const;
  /// Largest distance (sites) at which a trap center influences a site value.
  int reach_sites(double h) const;
  bool bounded() const;
};

std::string_view to_string(ModelSpec::Variant v);
ModelSpec::Variant parse_variant(std::string_view name);

/// Realization of V on a window. Immutable once generated.
class PotentialField {
 public:
  PotentialField() = default;
  PotentialField(Window window, std::vector<double> values);

  const Window& window() const { return window_; }
  std::span<const double> values() const { return values_; }
  double at(const Site& x) const { return values_[window_.index(x)]; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }

  bool has_hard_sites() const;
  double max_finite() const;
  /// Supremum including +inf.
  double sup() const;
  /// Values on a sub-window. Throws if `sub` is not contained.
  PotentialField restrict(const Window& sub) const;
  PotentialField plus(double c) const;

  // Provenance, carried into serialized output.
  ModelSpec::Variant variant = ModelSpec::Variant::kBernoulli;
  SeedPath seed{};

 private:
  Window window_;
  std::vector<double> values_;
};

/// V(x) = sum_i W(x - c_i) evaluated at the sites of `window`.
PotentialField superpose(std::span<const Point> centers, const TrapProfile& profile,
                         const Window& window);

/// Trap centers of the Bernoulli model at the sites of `region`. Each site is
/// keyed by its coordinate, so overlapping regions agree.
std::vector<Point> bernoulli_centers(const Window& region, double p, const SeedPath& seed);

/// Poisson centers inside the cells of `region`. Each site cell of volume h^d
/// receives an independent Poisson(nu h^d) count with uniform positions.
std::vector<Point> poisson_centers(const Window& region, double nu, const SeedPath& seed);

/// Displaced lattice points q + omega_q for all q in Z^d whose unperturbed
/// position lies within `margin` of the hull of `region`.
std::vector<Point> perturbed_lattice_centers(const Window& region, double theta, double margin,
                                             const SeedPath& seed);

PotentialField sample_bernoulli(const Window& window, double p, const TrapProfile& profile,
                                const SeedPath& seed);
PotentialField sample_iid_tail(const Window& window, double gamma, const SeedPath& seed);
PotentialField sample_poisson(const Window& window, double nu, const TrapProfile& profile,
                              const SeedPath& seed);
PotentialField sample_perturbed_lattice(const Window& window, double theta,
                                        const TrapProfile& profile, const SeedPath& seed);

/// Inverse CDF of P(V < v) = exp(-v^-gamma).
double iid_tail_quantile(double u, double gamma);

/// Dispatch on the model variant. Pure function of its arguments; the value
/// at a site does not depend on the window it was generated in.
PotentialField generate(const ModelSpec& spec, const Window& window, const SeedPath& seed);

/// Padding margin (physical units) for the perturbed lattice: lattice points
/// this far outside the window are included.
double perturbed_lattice_margin(double theta, int d, const TrapProfile& profile);

// Serialization. Binary layout (little endian):
//   "TRPF" u32 version=1, u32 d, i32 R (-1 if not a centered box), f64 h,
//   u32 variant, u64 master_seed, u64 realization_index, u32 stream_tag,
//   i32 lo[d], i32 extent[d], f64 values[site_count] (row-major, +inf allowed).
void write_binary(std::ostream& os, const PotentialField& field);
PotentialField read_binary(std::istream& is);
/// Header "x0,...,x{d-1},value"; one row per site.
void write_csv(std::ostream& os, const PotentialField& field);

}  // namespace trapping
