#include "trapping/random_media.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>

#include "trapping/error.hpp"
#include "trapping/io.hpp"
#include "trapping/radial_law.hpp"

namespace trapping {

static_assert(std::endian::native == std::endian::little, "binary field format assumes little endian");

int TrapProfile::reach_sites(double h) const {
  if (shape == Shape::kSpike) return 0;
  return static_cast<int>(std::floor(radius / h + 1e-9));
}

void TrapProfile::validate() const {
  if (!(radius >= 0.0) || !std::isfinite(radius)) throw InvalidArgument("profile radius must be >= 0");
  if (!(height >= 0.0)) throw InvalidArgument("profile height must be >= 0 (or +inf)");
}

ModelSpec ModelSpec::bernoulli(double p, TrapProfile profile, double kappa) {
  ModelSpec m;
  m.variant = Variant::kBernoulli;
  m.p = p;
  m.profile = profile;
  m.kappa = kappa;
  return m;
}

ModelSpec ModelSpec::iid_tail(double gamma, double kappa) {
  ModelSpec m;
  m.variant = Variant::kIidTail;
  m.gamma = gamma;
  m.kappa = kappa;
  return m;
}

ModelSpec ModelSpec::poisson(double nu, TrapProfile profile, double kappa) {
  ModelSpec m;
  m.variant = Variant::kPoisson;
  m.nu = nu;
  m.profile = profile;
  m.kappa = kappa;
  return m;
}

ModelSpec ModelSpec::perturbed_lattice(double theta, TrapProfile profile, double kappa) {
  ModelSpec m;
  m.variant = Variant::kPerturbedLattice;
  m.theta = theta;
  m.profile = profile;
  m.kappa = kappa;
  return m;
}

void ModelSpec::validate() const {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw InvalidArgument("kappa must be positive");
  switch (variant) {
    case Variant::kBernoulli:
      if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("p must lie in [0, 1]");
      profile.validate();
      break;
    case Variant::kIidTail:
      if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidArgument("gamma must be positive");
      break;
    case Variant::kPoisson:
      if (!(nu >= 0.0) || !std::isfinite(nu)) throw InvalidArgument("nu must be >= 0");
      profile.validate();
      break;
    case Variant::kPerturbedLattice:
      if (!(theta > 0.0) || !std::isfinite(theta)) throw InvalidArgument("theta must be positive");
      profile.validate();
      break;
  }
}

int ModelSpec::reach_sites(double h) const {
  return variant == Variant::kIidTail ? 0 : profile.reach_sites(h);
}

bool ModelSpec::bounded() const {
  return variant == Variant::kBernoulli && !profile.hard();
}

std::string_view to_string(ModelSpec::Variant v) {
  switch (v) {
    case ModelSpec::Variant::kBernoulli: return "bernoulli";
    case ModelSpec::Variant::kIidTail: return "iid-tail";
    case ModelSpec::Variant::kPoisson: return "poisson";
    case ModelSpec::Variant::kPerturbedLattice: return "perturbed-lattice";
  }
  return "unknown";
}

ModelSpec::Variant parse_variant(std::string_view name) {
  if (name == "bernoulli") return ModelSpec::Variant::kBernoulli;
  if (name == "iid-tail") return ModelSpec::Variant::kIidTail;
  if (name == "poisson") return ModelSpec::Variant::kPoisson;
  if (name == "perturbed-lattice") return ModelSpec::Variant::kPerturbedLattice;
  throw InvalidArgument("unknown model variant '" + std::string(name) +
                        "' (expected bernoulli, iid-tail, poisson or perturbed-lattice)");
}

PotentialField::PotentialField(Window window, std::vector<double> values)
    : window_(window), values_(std::move(values)) {
  if (values_.size() != window_.site_count()) {
    throw InvalidArgument("potential field size does not match its window");
  }
  for (double v : values_) {
    if (!(v >= 0.0)) throw InvalidArgument("potential values must be nonnegative");
  }
}

bool PotentialField::has_hard_sites() const {
  return std::any_of(values_.begin(), values_.end(), [](double v) { return v == kInfinity; });
}

double PotentialField::max_finite() const {
  double m = 0.0;
  for (double v : values_) {
    if (v != kInfinity) m = std::max(m, v);
  }
  return m;
}

double PotentialField::sup() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, v);
  return m;
}

PotentialField PotentialField::restrict(const Window& sub) const {
  if (!window_.contains(sub)) throw InvalidArgument("sub-window not contained in field window");
  std::vector<double> vals(sub.site_count());
  for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = at(sub.site(i));
  PotentialField out(sub, std::move(vals));
  out.variant = variant;
  out.seed = seed;
  return out;
}

PotentialField PotentialField::plus(double c) const {
  std::vector<double> vals = values_;
  for (double& v : vals) v += c;
  PotentialField out(window_, std::move(vals));
  out.variant = variant;
  out.seed = seed;
  return out;
}

PotentialField superpose(std::span<const Point> centers, const TrapProfile& profile,
                         const Window& window) {
  profile.validate();
  std::vector<double> vals(window.site_count(), 0.0);
  const int reach = profile.reach_sites(window.h);
  const double r2 = profile.radius * profile.radius * (1.0 + 1e-12) + 1e-18;
  for (const Point& c : centers) {
    Site s{0, 0, 0};
    for (int i = 0; i < window.d; ++i) s[i] = static_cast<int>(std::floor(c[i] / window.h + 0.5));
    if (profile.shape == TrapProfile::Shape::kSpike) {
      if (window.contains(s)) vals[window.index(s)] += profile.height;
      continue;
    }
    Site lo{0, 0, 0};
    Site hi{0, 0, 0};
    bool empty = false;
    for (int i = 0; i < window.d; ++i) {
      lo[i] = std::max(s[i] - reach, window.lo[i]);
      hi[i] = std::min(s[i] + reach, window.lo[i] + window.extent[i] - 1);
      if (lo[i] > hi[i]) empty = true;
    }
    if (empty) continue;
    Site x = lo;
    for (;;) {
      double dist2 = 0.0;
      for (int i = 0; i < window.d; ++i) {
        const double dx = (x[i] - s[i]) * window.h;
        dist2 += dx * dx;
      }
      if (dist2 <= r2) vals[window.index(x)] += profile.height;
      int axis = window.d - 1;
      while (axis >= 0 && ++x[axis] > hi[axis]) {
        x[axis] = lo[axis];
        --axis;
      }
      if (axis < 0) break;
    }
  }
  return PotentialField(window, std::move(vals));
}

std::vector<Point> bernoulli_centers(const Window& region, double p, const SeedPath& seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("p must lie in [0, 1]");
  std::vector<Point> centers;
  const std::uint64_t key = seed.key();
  const std::size_t n = region.site_count();
  for (std::size_t i = 0; i < n; ++i) {
    const Site x = region.site(i);
    SplitMix64 eng(site_key(key, x, region.d));
    if (uniform01(eng) < p) {
      Point c{0.0, 0.0, 0.0};
      for (int a = 0; a < region.d; ++a) c[a] = x[a] * region.h;
      centers.push_back(c);
    }
  }
  return centers;
}

std::vector<Point> poisson_centers(const Window& region, double nu, const SeedPath& seed) {
  if (!(nu >= 0.0) || !std::isfinite(nu)) throw InvalidArgument("nu must be >= 0");
  std::vector<Point> centers;
  if (nu == 0.0) return centers;
  const double cell_mean = nu * std::pow(region.h, region.d);
  const std::uint64_t key = seed.key();
  const std::size_t n = region.site_count();
  for (std::size_t i = 0; i < n; ++i) {
    const Site x = region.site(i);
    SplitMix64 eng(site_key(key, x, region.d));
    std::poisson_distribution<int> count(cell_mean);
    const int k = count(eng);
    for (int j = 0; j < k; ++j) {
      Point c{0.0, 0.0, 0.0};
      for (int a = 0; a < region.d; ++a) c[a] = (x[a] + uniform01(eng) - 0.5) * region.h;
      centers.push_back(c);
    }
  }
  return centers;
}

namespace {

const RadialLaw& cached_law(int d, double theta) {
  static std::mutex mu;
  static std::map<std::pair<int, double>, std::unique_ptr<RadialLaw>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[{d, theta}];
  if (!slot) slot = std::make_unique<RadialLaw>(d, theta);
  return *slot;
}

}  // namespace

double perturbed_lattice_margin(double theta, int d, const TrapProfile& profile) {
  const RadialLaw& law = cached_law(d, theta);
  return std::max(8.0 * law.quantile(0.999999), profile.radius);
}

std::vector<Point> perturbed_lattice_centers(const Window& region, double theta, double margin,
                                             const SeedPath& seed) {
  if (!(theta > 0.0) || !std::isfinite(theta)) throw InvalidArgument("theta must be positive");
  const RadialLaw& law = cached_law(region.d, theta);
  Site qlo{0, 0, 0};
  Site qext{1, 1, 1};
  for (int i = 0; i < region.d; ++i) {
    const double a = region.lo[i] * region.h - margin;
    const double b = (region.lo[i] + region.extent[i] - 1) * region.h + margin;
    qlo[i] = static_cast<int>(std::ceil(a));
    qext[i] = static_cast<int>(std::floor(b)) - qlo[i] + 1;
  }
  const Window lattice = Window::from_corner(region.d, qlo, qext, 1.0);
  const std::uint64_t key = seed.key();
  std::vector<Point> centers;
  centers.reserve(lattice.site_count());
  for (std::size_t i = 0; i < lattice.site_count(); ++i) {
    const Site q = lattice.site(i);
    SplitMix64 eng(site_key(key, q, region.d));
    Point c = law.sample(eng);
    for (int a = 0; a < region.d; ++a) c[a] += q[a];
    centers.push_back(c);
  }
  return centers;
}

PotentialField sample_bernoulli(const Window& window, double p, const TrapProfile& profile,
                                const SeedPath& seed) {
  window.validate();
  const auto centers = bernoulli_centers(window.padded(profile.reach_sites(window.h)), p, seed);
  PotentialField f = superpose(centers, profile, window);
  f.variant = ModelSpec::Variant::kBernoulli;
  f.seed = seed;
  return f;
}

double iid_tail_quantile(double u, double gamma) {
  return std::pow(-std::log(u), -1.0 / gamma);
}

PotentialField sample_iid_tail(const Window& window, double gamma, const SeedPath& seed) {
  window.validate();
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidArgument("gamma must be positive");
  std::vector<double> vals(window.site_count());
  const std::uint64_t key = seed.key();
  for (std::size_t i = 0; i < vals.size(); ++i) {
    SplitMix64 eng(site_key(key, window.site(i), window.d));
    vals[i] = iid_tail_quantile(uniform_open(eng), gamma);
  }
  PotentialField f(window, std::move(vals));
  f.variant = ModelSpec::Variant::kIidTail;
  f.seed = seed;
  return f;
}

PotentialField sample_poisson(const Window& window, double nu, const TrapProfile& profile,
                              const SeedPath& seed) {
  window.validate();
  const auto centers = poisson_centers(window.padded(profile.reach_sites(window.h)), nu, seed);
  PotentialField f = superpose(centers, profile, window);
  f.variant = ModelSpec::Variant::kPoisson;
  f.seed = seed;
  return f;
}

PotentialField sample_perturbed_lattice(const Window& window, double theta,
                                        const TrapProfile& profile, const SeedPath& seed) {
  window.validate();
  const double margin = perturbed_lattice_margin(theta, window.d, profile);
  const auto centers = perturbed_lattice_centers(window, theta, margin, seed);
  PotentialField f = superpose(centers, profile, window);
  f.variant = ModelSpec::Variant::kPerturbedLattice;
  f.seed = seed;
  return f;
}

PotentialField generate(const ModelSpec& spec, const Window& window, const SeedPath& seed) {
  spec.validate();
  switch (spec.variant) {
    case ModelSpec::Variant::kBernoulli:
      return sample_bernoulli(window, spec.p, spec.profile, seed);
    case ModelSpec::Variant::kIidTail:
      return sample_iid_tail(window, spec.gamma, seed);
    case ModelSpec::Variant::kPoisson:
      return sample_poisson(window, spec.nu, spec.profile, seed);
    case ModelSpec::Variant::kPerturbedLattice:
      return sample_perturbed_lattice(window, spec.theta, spec.profile, seed);
  }
  throw InvalidArgument("unknown model variant");
}

namespace {

template <class T>
void put(std::ostream& os, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  os.write(buf, sizeof(T));
}

template <class T>
T get(std::istream& is) {
  char buf[sizeof(T)];
  if (!is.read(buf, sizeof(T))) throw InvalidArgument("truncated binary potential field");
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

int centered_half_side(const Window& w) {
  const int R = w.extent[0] / 2;
  for (int i = 0; i < w.d; ++i) {
    if (w.extent[i] != 2 * R || w.lo[i] != -R) return -1;
  }
  return R;
}

}  // namespace

void write_binary(std::ostream& os, const PotentialField& field) {
  const Window& w = field.window();
  os.write("TRPF", 4);
  put<std::uint32_t>(os, 1);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(w.d));
  put<std::int32_t>(os, centered_half_side(w));
  put<double>(os, w.h);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(field.variant));
  put<std::uint64_t>(os, field.seed.master_seed);
  put<std::uint64_t>(os, field.seed.realization_index);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(field.seed.stream_tag));
  for (int i = 0; i < w.d; ++i) put<std::int32_t>(os, w.lo[i]);
  for (int i = 0; i < w.d; ++i) put<std::int32_t>(os, w.extent[i]);
  for (double v : field.values()) put<double>(os, v);
}

PotentialField read_binary(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "TRPF", 4) != 0) {
    throw InvalidArgument("not a binary potential field (bad magic)");
  }
  if (get<std::uint32_t>(is) != 1) throw InvalidArgument("unsupported potential field version");
  const int d = static_cast<int>(get<std::uint32_t>(is));
  if (d < 1 || d > kMaxDim) throw InvalidArgument("bad dimension in potential field");
  (void)get<std::int32_t>(is);
  const double h = get<double>(is);
  const auto variant = static_cast<ModelSpec::Variant>(get<std::uint32_t>(is));
  SeedPath seed;
  seed.master_seed = get<std::uint64_t>(is);
  seed.realization_index = get<std::uint64_t>(is);
  seed.stream_tag = static_cast<StreamTag>(get<std::uint32_t>(is));
  Site lo{0, 0, 0};
  Site ext{1, 1, 1};
  for (int i = 0; i < d; ++i) lo[i] = get<std::int32_t>(is);
  for (int i = 0; i < d; ++i) ext[i] = get<std::int32_t>(is);
  const Window w = Window::from_corner(d, lo, ext, h);
  std::vector<double> vals(w.site_count());
  for (double& v : vals) v = get<double>(is);
  PotentialField f(w, std::move(vals));
  f.variant = variant;
  f.seed = seed;
  return f;
}

void write_csv(std::ostream& os, const PotentialField& field) {
  const Window& w = field.window();
  for (int i = 0; i < w.d; ++i) os << 'x' << i << ',';
  os << "value\n";
  for (std::size_t k = 0; k < field.size(); ++k) {
    const Site x = w.site(k);
    for (int i = 0; i < w.d; ++i) os << x[i] << ',';
    os << format_double(field[k]) << '\n';
  }
}

}  // namespace trapping
