#include "trapping/rng.hpp"

namespace trapping {

std::string_view to_string(StreamTag tag) {
  switch (tag) {
    case StreamTag::kPotential: return "potential";
    case StreamTag::kWalk: return "walk";
    case StreamTag::kBootstrap: return "bootstrap";
    case StreamTag::kDisplacement: return "displacement";
    case StreamTag::kStartVector: return "start-vector";
    case StreamTag::kPerturbation: return "perturbation";
  }
  return "unknown";
}

std::uint64_t SeedPath::key() const {
  std::uint64_t k = splitmix64(master_seed);
  k = hash_combine(k, realization_index);
  k = hash_combine(k, static_cast<std::uint64_t>(stream_tag));
  return k;
}

std::uint64_t site_key(std::uint64_t stream_key, const Site& x, int d) {
  std::uint64_t k = hash_combine(stream_key, static_cast<std::uint64_t>(d));
  for (int i = 0; i < d; ++i) {
    k = hash_combine(k, static_cast<std::uint64_t>(static_cast<std::int64_t>(x[i])));
  }
  return k;
}

}  // namespace trapping
