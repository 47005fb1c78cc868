#pragma once

#include <cstdint>

namespace rwcap {

// Counter-based generator: output = mix(seed, stream, counter).  Any stream
// is reachable in O(1), which is what makes parallel experiments replayable
// without generating the streams in between.
class CounterRng {
 public:
  CounterRng(uint64_t seed, uint64_t stream_id)
      : key_(mix(mix(seed ^ 0x2545f4914f6cdd1dULL) ^ stream_id)) {}

  uint64_t next_u64() { return mix(key_ ^ counter_++); }

  /// Uniform on [0,1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform on {0,...,7}; 8 divides 2^64 so the low bits are exact.
  int next_step_code() { return static_cast<int>(next_u64() & 7u); }

  /// Uniform on {0,...,n-1} by rejection.
  uint64_t next_below(uint64_t n) {
    uint64_t threshold = (0 - n) % n;
    for (;;) {
      uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  static uint64_t mix(uint64_t z) {  // splitmix64 finalizer
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  uint64_t key_;
  uint64_t counter_ = 0;
};

}  // namespace rwcap
