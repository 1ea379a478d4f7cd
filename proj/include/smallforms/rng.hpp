#pragma once

#include <cstdint>

namespace smallforms {

// Counter-based splittable generator (splitmix64 core).  Batches key one
// stream per (master seed, point index), so results are reproducible and
// independent of scheduling.
class SplitMix64 {
  public:
    explicit SplitMix64(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double next_double() { return (next() >> 11) * 0x1.0p-53; }

    // uniform in [lo, hi)
    double next_in(double lo, double hi) { return lo + next_double() * (hi - lo); }

    // uniform integer in [lo, hi] (inclusive), hi >= lo
    long long next_int(long long lo, long long hi) {
        uint64_t span = (uint64_t)(hi - lo) + 1;
        return lo + (long long)(next() % span);
    }

  private:
    uint64_t state_;
};

inline SplitMix64 stream_for(uint64_t master_seed, uint64_t index) {
    SplitMix64 keyer(master_seed ^ (0x6a09e667f3bcc909ULL + index * 0x9e3779b97f4a7c15ULL));
    return SplitMix64(keyer.next());
}

}  // namespace smallforms
