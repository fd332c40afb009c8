#pragma once

#include <cstdint>
#include <string_view>

#include "flowforge/error.hpp"

namespace flowforge {

// Counter-based random stream with a SplitMix64 core. Two streams built from
// the same 64-bit key produce the same draw sequence on every platform; the
// implementation never calls std:: facilities with unspecified behaviour.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t key) : state_(key) {}

  std::uint64_t next_u64();

  // Uniform in [0, 1), 53-bit resolution.
  double next_double();

  // Uniform in [lo, hi]; degenerate ranges return lo. Throws InvalidRangeError
  // if lo > hi.
  double uniform(double lo, double hi);

  // Uniform integer in [lo, hi] inclusive.
  int uniform_int(int lo, int hi);

  // Symmetric draw, uniform in [-1, 1].
  double symmetric() { return uniform(-1.0, 1.0); }

  // Standard normal via Box-Muller; consumes exactly two uniform draws.
  double normal();

 private:
  std::uint64_t state_;
};

// Identifies a random stream by (root seed, path of (tag, index) hops).
// Identical paths yield identical streams; sibling paths are statistically
// independent. Splitting is O(1): the path is folded into a single key, so
// sample k of a run is reproducible without touching samples 0..k-1.
class SeedPath {
 public:
  explicit SeedPath(std::uint64_t root_seed);

  SeedPath child(std::string_view tag, std::uint64_t index = 0) const;

  RandomStream stream() const;

  std::uint64_t root_seed() const { return root_; }
  std::uint64_t key() const { return key_; }

 private:
  SeedPath(std::uint64_t root, std::uint64_t key) : root_(root), key_(key) {}

  std::uint64_t root_ = 0;
  std::uint64_t key_ = 0;
};

// Uniform draw on [lo, hi] from a dedicated stream of `path`.
double sample_uniform(double lo, double hi, const SeedPath& path);

}  // namespace flowforge
