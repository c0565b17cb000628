#include "trapping/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "trapping/error.hpp"

namespace trapping {

std::size_t BoxRegion::site_count() const {
  std::size_t n = 1;
  for (int i = 0; i < d; ++i) n *= static_cast<std::size_t>(2 * R);
  return n;
}

void BoxRegion::validate() const {
  if (d < 1 || d > kMaxDim) throw InvalidArgument("box dimension must be in 1..3");
  if (R < 1) throw InvalidArgument("box half side R must be positive");
  if (!(h > 0.0) || !std::isfinite(h)) throw InvalidArgument("mesh h must be positive");
}

Window::Window(const BoxRegion& box) : d(box.d), h(box.h) {
  box.validate();
  for (int i = 0; i < d; ++i) {
    lo[i] = -box.R;
    extent[i] = 2 * box.R;
  }
}

Window Window::centered(int d, int half_side, double h) {
  return Window(BoxRegion{d, half_side, h});
}

Window Window::from_corner(int d, Site lo, Site extent, double h) {
  Window w;
  w.d = d;
  w.h = h;
  for (int i = 0; i < kMaxDim; ++i) {
    w.lo[i] = i < d ? lo[i] : 0;
    w.extent[i] = i < d ? extent[i] : 1;
  }
  w.validate();
  return w;
}

std::size_t Window::site_count() const {
  std::size_t n = 1;
  for (int i = 0; i < d; ++i) n *= static_cast<std::size_t>(extent[i]);
  return n;
}

bool Window::contains(const Site& x) const {
  for (int i = 0; i < d; ++i) {
    if (x[i] < lo[i] || x[i] >= lo[i] + extent[i]) return false;
  }
  return true;
}

bool Window::contains(const Window& other) const {
  if (other.d != d) return false;
  for (int i = 0; i < d; ++i) {
    if (other.lo[i] < lo[i] || other.lo[i] + other.extent[i] > lo[i] + extent[i]) return false;
  }
  return true;
}

std::size_t Window::index(const Site& x) const {
  std::size_t idx = 0;
  for (int i = 0; i < d; ++i) {
    idx = idx * static_cast<std::size_t>(extent[i]) + static_cast<std::size_t>(x[i] - lo[i]);
  }
  return idx;
}

Site Window::site(std::size_t index) const {
  Site x{0, 0, 0};
  for (int i = d - 1; i >= 0; --i) {
    const auto e = static_cast<std::size_t>(extent[i]);
    x[i] = lo[i] + static_cast<int>(index % e);
    index /= e;
  }
  return x;
}

Site Window::hi() const {
  Site x{0, 0, 0};
  for (int i = 0; i < d; ++i) x[i] = lo[i] + extent[i] - 1;
  return x;
}

Window Window::padded(int margin) const {
  Window w = *this;
  for (int i = 0; i < d; ++i) {
    w.lo[i] -= margin;
    w.extent[i] += 2 * margin;
  }
  return w;
}

Window Window::hull(const Window& other) const {
  if (other.d != d) throw InvalidArgument("hull of windows with different dimension");
  Window w = *this;
  for (int i = 0; i < d; ++i) {
    const int a = std::min(lo[i], other.lo[i]);
    const int b = std::max(lo[i] + extent[i], other.lo[i] + other.extent[i]);
    w.lo[i] = a;
    w.extent[i] = b - a;
  }
  return w;
}

double Window::diameter() const {
  double s = 0.0;
  for (int i = 0; i < d; ++i) {
    const double e = (extent[i] - 1) * h;
    s += e * e;
  }
  return std::sqrt(s);
}

void Window::validate() const {
  if (d < 1 || d > kMaxDim) throw InvalidArgument("window dimension must be in 1..3");
  for (int i = 0; i < d; ++i) {
    if (extent[i] < 1) throw InvalidArgument("window extent must be positive");
  }
  if (!(h > 0.0) || !std::isfinite(h)) throw InvalidArgument("mesh h must be positive");
}

bool Window::operator==(const Window& other) const {
  if (d != other.d || h != other.h) return false;
  for (int i = 0; i < d; ++i) {
    if (lo[i] != other.lo[i] || extent[i] != other.extent[i]) return false;
  }
  return true;
}

double distance(const Window& a, const Window& b) {
  if (a.d != b.d) throw InvalidArgument("distance between windows with different dimension");
  double s = 0.0;
  for (int i = 0; i < a.d; ++i) {
    const int a_hi = a.lo[i] + a.extent[i] - 1;
    const int b_hi = b.lo[i] + b.extent[i] - 1;
    int gap = 0;
    if (b.lo[i] > a_hi) gap = b.lo[i] - a_hi;
    else if (a.lo[i] > b_hi) gap = a.lo[i] - b_hi;
    const double g = gap * a.h;
    s += g * g;
  }
  return std::sqrt(s);
}

std::string to_string(const Site& x, int d) {
  std::ostringstream os;
  os << '(';
  for (int i = 0; i < d; ++i) {
    if (i) os << ',';
    os << x[i];
  }
  os << ')';
  return os.str();
}

}  // namespace trapping
