#pragma once

#include <cstdint>
#include <random>

namespace seqcopy {

// Deterministic random source. Every stochastic operation in the library
// draws from an Rng so that a seed pins the full draw sequence, run to run
// and platform to platform.
//
// Generator: std::mt19937_64, whose output sequence is fixed by the C++
// standard. Derived draws (all documented because checkpoint determinism
// depends on them staying put):
//   uniform01() = (next_u64() >> 11) * 2^-53            in [0, 1)
//   gaussian()  = sqrt(-2 ln u1) * cos(2 pi u2) with
//                 u1 = ((next_u64() >> 11) + 1) * 2^-53  in (0, 1]
//                 u2 = (next_u64() >> 11) * 2^-53        in [0, 1)
// One gaussian deviate consumes exactly two raw draws; the Box-Muller sine
// half is discarded rather than cached.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), gen_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return gen_(); }

    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double gaussian();

    // Uniform integer in [0, n). Uses rejection sampling so the distribution
    // is exact for any n.
    std::uint64_t below(std::uint64_t n);

    // Derives an independent, reproducible child seed for stream `index`.
    // Used to give each training instance its own dropout stream so results
    // do not depend on batch partitioning or thread scheduling.
    static std::uint64_t child_seed(std::uint64_t seed, std::uint64_t index);

private:
    std::uint64_t seed_;
    std::mt19937_64 gen_;
};

}  // namespace seqcopy
