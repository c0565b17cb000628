#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string_view>

#include "trapping/lattice.hpp"

namespace trapping {

/// Purpose label that separates random streams drawn from one master seed.
enum class StreamTag : std::uint32_t {
  kPotential = 1,
  kWalk = 2,
  kBootstrap = 3,
  kDisplacement = 4,
  kStartVector = 5,
  kPerturbation = 6,
};

std::string_view to_string(StreamTag tag);

/// Addresses one independent random stream.
struct SeedPath {
  std::uint64_t master_seed = 0;
  std::uint64_t realization_index = 0;
  StreamTag stream_tag = StreamTag::kPotential;

  /// 64-bit key identifying the stream; distinct triples give distinct keys.
  std::uint64_t key() const;
  SeedPath with_index(std::uint64_t index) const { return {master_seed, index, stream_tag}; }
  SeedPath with_tag(StreamTag tag) const { return {master_seed, realization_index, tag}; }

  bool operator==(const SeedPath&) const = default;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ splitmix64(b + 0x632BE59BD9B4E019ULL));
}

/// Key of the stream attached to one lattice coordinate within a stream.
std::uint64_t site_key(std::uint64_t stream_key, const Site& x, int d);

/// SplitMix64 as a UniformRandomBitGenerator. Cheap to construct, so it is
/// used for short coordinate-keyed streams.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Uniform on the open interval (0, 1), 53-bit resolution.
template <class Engine>
double uniform_open(Engine& eng) {
  for (;;) {
    const double u = static_cast<double>(eng() >> 11) * 0x1.0p-53;
    if (u > 0.0) return u;
  }
}

/// Uniform on [0, 1).
template <class Engine>
double uniform01(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

template <class Engine>
double exponential(Engine& eng, double rate) {
  return -std::log(uniform_open(eng)) / rate;
}

/// Box-Muller; deterministic across standard libraries.
template <class Engine>
double standard_normal(Engine& eng) {
  const double u1 = uniform_open(eng);
  const double u2 = uniform01(eng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

inline std::mt19937_64 make_engine(const SeedPath& path, std::uint64_t block = 0) {
  return std::mt19937_64(hash_combine(path.key(), block));
}

}  // namespace trapping
