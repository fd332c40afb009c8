#include "flowforge/rng.hpp"

#include <cmath>

namespace flowforge {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// SplitMix64 finalizer; full-avalanche 64-bit mix.
std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ull;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBull;
  x ^= x >> 31;
  return x;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

}  // namespace

std::uint64_t RandomStream::next_u64() {
  state_ += kGolden;
  return mix64(state_);
}

double RandomStream::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomStream::uniform(double lo, double hi) {
  if (lo > hi) {
    throw InvalidRangeError("uniform range inverted: lo=" + std::to_string(lo) +
                            " hi=" + std::to_string(hi));
  }
  if (lo == hi) {
    next_u64();  // keep draw counts independent of the range
    return lo;
  }
  return lo + next_double() * (hi - lo);
}

int RandomStream::uniform_int(int lo, int hi) {
  if (lo > hi) {
    throw InvalidRangeError("uniform_int range inverted: lo=" + std::to_string(lo) +
                            " hi=" + std::to_string(hi));
  }
  const double span = static_cast<double>(hi) - static_cast<double>(lo) + 1.0;
  int v = lo + static_cast<int>(next_double() * span);
  return v > hi ? hi : v;
}

double RandomStream::normal() {
  // next_double() is in [0,1); shift to (0,1] so the log is finite.
  const double u1 = 1.0 - next_double();
  const double u2 = next_double();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

SeedPath::SeedPath(std::uint64_t root_seed)
    : root_(root_seed), key_(mix64(root_seed ^ kGolden)) {}

SeedPath SeedPath::child(std::string_view tag, std::uint64_t index) const {
  std::uint64_t k = key_;
  k = mix64(k ^ fnv1a(tag));
  k = mix64(k + kGolden * (index + 1));
  return SeedPath(root_, k);
}

RandomStream SeedPath::stream() const { return RandomStream(mix64(key_ ^ 0xD1B54A32D192ED03ull)); }

double sample_uniform(double lo, double hi, const SeedPath& path) {
  RandomStream rng = path.stream();
  return rng.uniform(lo, hi);
}

}  // namespace flowforge
