#pragma once

#include <cstdint>
#include <utility>

namespace viana::rng {

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// SplitMix64 stream.  Streams are keyed by (seed, stream id) so that every
/// Monte Carlo sample owns an independent generator: results never depend on
/// how samples are distributed over worker threads.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t stream_id)
      : state_(mix64(seed + 0x9E3779B97F4A7C15ULL * (stream_id + 1))) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix64(state_);
  }

  /// Uniform on [0,1).
  double next_double() {
    return double(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform on (0,1]; suitable for base coordinates living on (0,1].
  double open_unit() {
    return double((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  double uniform(double a, double b) {
    return a + (b - a) * next_double();
  }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    return next_u64() % n;
  }

 private:
  std::uint64_t state_;
};

}  // namespace viana::rng
