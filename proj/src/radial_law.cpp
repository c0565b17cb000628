#include "trapping/radial_law.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/gamma.hpp>

#include "trapping/error.hpp"

namespace trapping {

namespace {

double hermite(double x0, double x1, double y0, double y1, double m0, double m1, double x) {
  const double h = x1 - x0;
  const double s = (x - x0) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * m0 + (-2 * s3 + 3 * s2) * y1 +
         (s3 - s2) * h * m1;
}

}  // namespace

RadialLaw::RadialLaw(int d, double theta) : d_(d), theta_(theta), shape_(d / theta) {
  if (d < 1 || d > kMaxDim) throw InvalidArgument("radial law dimension must be in 1..3");
  if (!(theta > 0.0) || !std::isfinite(theta)) throw InvalidArgument("theta must be positive");

  const double r_lo = std::pow(1e-12 * std::tgamma(shape_ + 1.0), 1.0 / d_);
  const double r_hi = std::pow(boost::math::gamma_q_inv(shape_, 1e-16), 1.0 / theta_);
  const double step = std::log(r_hi / r_lo) / (kNodes - 1);
  r_.reserve(kNodes);
  F_.reserve(kNodes);
  for (int i = 0; i < kNodes; ++i) {
    const double r = r_lo * std::exp(step * i);
    const double F = cdf(r);
    if (!F_.empty() && F <= F_.back()) continue;
    r_.push_back(r);
    F_.push_back(F);
  }
  const std::size_t n = r_.size();
  if (n < 16) throw NumericalFailure("radial CDF table degenerate");

  std::vector<double> secant(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) secant[i] = (r_[i + 1] - r_[i]) / (F_[i + 1] - F_[i]);
  slope_.assign(n, 0.0);
  slope_[0] = secant[0];
  slope_[n - 1] = secant[n - 2];
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = F_[i] - F_[i - 1];
    const double h1 = F_[i + 1] - F_[i];
    const double w1 = 2 * h1 + h0;
    const double w2 = h1 + 2 * h0;
    slope_[i] = (w1 + w2) / (w1 / secant[i - 1] + w2 / secant[i]);
  }

  // The interpolant alone must already be close; Newton polish does the rest.
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double Fm = 0.5 * (F_[i] + F_[i + 1]);
    const double r = hermite(F_[i], F_[i + 1], r_[i], r_[i + 1], slope_[i], slope_[i + 1], Fm);
    worst = std::max(worst, std::abs(cdf(r) - Fm));
  }
  if (worst > 1e-6) {
    throw NumericalFailure("radial inverse-CDF table did not converge (max CDF error " +
                           std::to_string(worst) + ")");
  }
}

double RadialLaw::cdf(double r) const {
  if (r <= 0.0) return 0.0;
  return boost::math::gamma_p(shape_, std::pow(r, theta_));
}

double RadialLaw::survival(double r) const {
  if (r <= 0.0) return 1.0;
  return boost::math::gamma_q(shape_, std::pow(r, theta_));
}

double RadialLaw::density(double r) const {
  if (r <= 0.0) return 0.0;
  const double logf = std::log(theta_) + (d_ - 1) * std::log(r) - std::pow(r, theta_) -
                      boost::math::lgamma(shape_);
  return std::exp(logf);
}

double RadialLaw::quantile(double u) const {
  if (!(u > 0.0 && u < 1.0)) throw InvalidArgument("radial quantile needs u in (0,1)");
  double lo = 0.0;
  double hi = kInfinity;
  double r = 0.0;
  if (u < F_.front()) {
    r = std::pow(u * std::tgamma(shape_ + 1.0), 1.0 / d_);
    hi = r_.front();
    r = std::min(r, hi);
  } else if (u >= F_.back()) {
    lo = r_.back();
    r = lo;
  } else {
    const auto it = std::upper_bound(F_.begin(), F_.end(), u);
    const std::size_t i = static_cast<std::size_t>(it - F_.begin()) - 1;
    lo = r_[i];
    hi = r_[i + 1];
    r = hermite(F_[i], F_[i + 1], r_[i], r_[i + 1], slope_[i], slope_[i + 1], u);
    r = std::clamp(r, lo, hi);
  }

  const bool upper_tail = u > 0.5;
  const double q = 1.0 - u;
  for (int iter = 0; iter < 100; ++iter) {
    // g is increasing in r and vanishes at the quantile.
    const double g = upper_tail ? q - survival(r) : cdf(r) - u;
    if (std::abs(g) <= kCdfTolerance) return r;
    if (g > 0) hi = r;
    else lo = r;
    const double f = density(r);
    double next = f > 0.0 ? r - g / f : std::numeric_limits<double>::quiet_NaN();
    if (!(next > lo && next < hi)) {
      next = std::isfinite(hi) ? 0.5 * (lo + hi) : std::max(2.0 * r, 1.0);
    }
    if (std::isfinite(hi) && hi - lo <= 1e-15 * hi) return r;
    r = next;
  }
  throw NumericalFailure("radial quantile did not converge for u = " + std::to_string(u));
}

double RadialLaw::normalizer() const {
  // integral of exp(-|x|^theta) over R^d = |S^{d-1}| Gamma(d/theta) / theta
  const double sphere =
      2.0 * std::pow(std::numbers::pi, 0.5 * d_) / std::tgamma(0.5 * d_);
  return theta_ / (sphere * std::tgamma(shape_));
}

double RadialLaw::mean_radius() const {
  return std::exp(boost::math::lgamma((d_ + 1.0) / theta_) - boost::math::lgamma(shape_));
}

}  // namespace trapping
