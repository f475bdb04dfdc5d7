#pragma once

#include <cstdint>

namespace dsnav {

/// xoshiro256++ with splitmix64 seeding. Named, seedable and portable so
/// campaigns are bit-reproducible; gaussians come from the Marsaglia polar
/// transform (no libm trig in the hot path).
class Rng {
  public:
    explicit Rng(std::uint64_t seed);

    /// Independent stream derived from (seed, stream); used to give each
    /// Monte-Carlo trial its own generator regardless of scheduling.
    static Rng for_stream(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next_u64();
    /// Uniform in [0, 1).
    double uniform();
    /// Standard normal.
    double gaussian();

  private:
    std::uint64_t s_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace dsnav
