#pragma once

#include <vector>

#include "trapping/random_media.hpp"

namespace trapping {

/// Displacement law with density N(d, theta) exp(-|x|^theta) on R^d.
///
/// The radius has density proportional to r^{d-1} exp(-r^theta); its CDF is
/// the regularized lower incomplete gamma P(d/theta, r^theta). Quantiles are
/// read from a 4096-node log-spaced table through a monotone cubic and then
/// polished by safeguarded Newton steps to an absolute CDF tolerance.
class RadialLaw {
 public:
  static constexpr int kNodes = 4096;
  static constexpr double kCdfTolerance = 1e-10;

  RadialLaw(int d, double theta);

  int dimension() const { return d_; }
  double theta() const { return theta_; }

  double cdf(double r) const;
  double survival(double r) const;  // 1 - cdf
  double density(double r) const;   // radial density
  /// Throws NumericalFailure if the CDF tolerance cannot be met.
  double quantile(double u) const;

  /// Normalizing constant N(d, theta) of the vector density.
  double normalizer() const;
  /// E|omega| in closed form: Gamma((d+1)/theta) / Gamma(d/theta).
  double mean_radius() const;

  /// Radius from a uniform draw and a uniform direction.
  template <class Engine>
  Point sample(Engine& eng) const {
    const double r = quantile(uniform_open(eng));
    return scale_direction(r, eng);
  }

 private:
  template <class Engine>
  Point scale_direction(double r, Engine& eng) const {
    Point p{0.0, 0.0, 0.0};
    if (d_ == 1) {
      p[0] = (uniform01(eng) < 0.5) ? -r : r;
      return p;
    }
    double norm = 0.0;
    do {
      norm = 0.0;
      for (int i = 0; i < d_; ++i) {
        p[i] = standard_normal(eng);
        norm += p[i] * p[i];
      }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (int i = 0; i < d_; ++i) p[i] *= r / norm;
    return p;
  }

  int d_;
  double theta_;
  double shape_;  // d / theta
  std::vector<double> r_;
  std::vector<double> F_;
  std::vector<double> slope_;  // dr/dF at the nodes, limited for monotonicity
};

}  // namespace trapping
