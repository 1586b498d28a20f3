#pragma once

#include <cstdint>

namespace rbll {

// Counter-based uniform stream. Every draw is a stateless hash of
// (seed, stream, counter), so independent tasks derive their own stream
// from one seed and results do not depend on scheduling.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix(seed + 0x9e3779b97f4a7c15ull) ^
             mix(stream * 0xbf58476d1ce4e5b9ull + 0x94d049bb133111ebull)),
        ctr_(0) {}

  std::uint64_t next_u64() { return mix(key_ + 0x9e3779b97f4a7c15ull * ++ctr_); }

  // uniform in [0,1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // index in [0,n)
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t ctr_;
};

}  // namespace rbll
