#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>

namespace trapping {

inline constexpr int kMaxDim = 3;

/// Integer lattice coordinate. Unused trailing axes are zero.
using Site = std::array<int, kMaxDim>;

/// Centered box holding the sites {-R, ..., R-1}^d, spaced by mesh h.
struct BoxRegion {
  int d = 1;
  int R = 1;
  double h = 1.0;

  std::size_t site_count() const;
  void validate() const;
};

/// Axis-aligned rectangle of lattice sites: lo[i] .. lo[i] + extent[i] - 1.
///
/// Sites are enumerated row-major with axis 0 slowest. Physical position of
/// site x is h * x.
struct Window {
  int d = 1;
  Site lo{0, 0, 0};
  Site extent{1, 1, 1};
  double h = 1.0;

  Window() = default;
  Window(const BoxRegion& box);
  static Window centered(int d, int half_side, double h = 1.0);
  static Window from_corner(int d, Site lo, Site extent, double h = 1.0);

  std::size_t site_count() const;
  bool contains(const Site& x) const;
  bool contains(const Window& other) const;
  std::size_t index(const Site& x) const;
  Site site(std::size_t index) const;
  Site hi() const;  // inclusive upper corner
  Window padded(int margin) const;
  /// Smallest window covering both.
  Window hull(const Window& other) const;
  /// Euclidean diameter in physical units (corner to corner site distance).
  double diameter() const;
  void validate() const;

  bool operator==(const Window& other) const;
};

/// Euclidean distance between the site sets of two windows (physical units).
double distance(const Window& a, const Window& b);

std::string to_string(const Site& x, int d);

}  // namespace trapping
