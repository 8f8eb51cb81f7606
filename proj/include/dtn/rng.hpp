#pragma once

#include <cmath>
#include <cstdint>

namespace dtn {

// Counter-based generator (splitmix64 output function over an affine
// counter). Substreams are derived from (seed, stream index), so
// replications are reproducible and order-independent.
class CounterRng {
 public:
  CounterRng(uint64_t seed, uint64_t stream) {
    state_ = mix(seed + 0x9E3779B97F4A7C15ULL * (stream + 1));
    state_ = mix(state_ ^ (stream * 0xBF58476D1CE4E5B9ULL));
  }

  uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Exponential with the given rate.
  double exponential(double rate) {
    double v;
    do { v = uniform(); } while (v <= 0.0);
    return -std::log(v) / rate;
  }

  // Uniform integer in [0, n).
  uint64_t below(uint64_t n) {
    // Lemire-style rejection-free multiply-shift (bias < 2^-64, negligible
    // at desk scale and still deterministic).
    return static_cast<uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

 private:
  static uint64_t mix(uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
  }

  uint64_t state_;
};

}  // namespace dtn
