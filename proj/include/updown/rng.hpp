#pragma once

#include "updown/rational.hpp"

#include <cstdint>
#include <random>
#include <string_view>

namespace updown {

/// splitmix64 finalizer (Steele, Lea, Flood). Constants:
///   increment 0x9E3779B97F4A7C15, multipliers 0xBF58476D1CE4E5B9 and 0x94D049BB133111EB,
///   shifts 30, 27, 31.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed of substream `index` under `master_seed`:
///   splitmix64(master_seed ^ splitmix64(index ^ (tag * 0xD1B54A32D192ED03))).
/// tag = 0 is the trajectory dynamics stream; other tags derive auxiliary streams.
constexpr std::uint64_t substream_seed(std::uint64_t master_seed, std::uint64_t index,
                                       std::uint64_t tag = 0) {
    return splitmix64(master_seed ^ splitmix64(index ^ (tag * 0xD1B54A32D192ED03ULL)));
}

/// Random source with a portable, fully specified output sequence: std::mt19937_64
/// (its output is fixed by the standard) plus hand-specified reductions, since the
/// std:: distributions are implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    static Rng substream(std::uint64_t master_seed, std::uint64_t index, std::uint64_t tag = 0) {
        return Rng(substream_seed(master_seed, index, tag));
    }

    std::uint64_t next() { return engine_(); }

    /// Uniform on {0, ..., bound-1} by rejection of the top partial block.
    std::uint64_t uniform_below(std::uint64_t bound);

    /// Uniform on [0, 1) with 53 random bits: (next() >> 11) * 2^-53.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Exact Bernoulli(p) for rational p with denominator below 2^63.
    bool bernoulli(const Rational& p);

private:
    std::mt19937_64 engine_;
};

}  // namespace updown
