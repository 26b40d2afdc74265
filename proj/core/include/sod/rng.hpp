#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace sod {

/// SplitMix64 finaliser; used to turn structured keys into engine seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Random stream keyed by (seed, replication, stream). Streams with different
/// keys are independent, so generation order does not matter. Draws use only
/// the raw 64-bit engine output, keeping results identical across standard
/// library implementations.
class KeyedStream {
 public:
  KeyedStream(std::uint64_t seed, std::uint64_t replication, std::uint64_t stream)
      : engine_(mix64(mix64(mix64(seed) ^ replication) ^ (stream * 0xd1b54a32d192ed03ULL))) {}

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Exponential with the given rate (events per unit).
  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace sod
