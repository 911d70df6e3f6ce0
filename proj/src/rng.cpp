#include "updown/rng.hpp"

#include "updown/error.hpp"

#include <limits>

namespace updown {

std::uint64_t Rng::uniform_below(std::uint64_t bound) {
    if (bound == 0) throw InvalidArgument("uniform_below: empty range");
    constexpr std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    // 2^64 mod bound; draws above max - rem would bias the low residues.
    const std::uint64_t rem = (max % bound + 1) % bound;
    for (;;) {
        const std::uint64_t x = next();
        if (rem == 0 || x <= max - rem) return x % bound;
    }
}

bool Rng::bernoulli(const Rational& p) {
    if (sgn(p) <= 0) return false;
    if (cmp(p.get_num(), p.get_den()) >= 0) return true;
    static const Integer limit = Integer(1) << 63;
    if (!p.get_den().fits_ulong_p() || p.get_den() > limit) {
        throw InvalidArgument("bernoulli: denominator of p too large for exact sampling");
    }
    const std::uint64_t den = p.get_den().get_ui();
    const std::uint64_t num = p.get_num().get_ui();
    return uniform_below(den) < num;
}

}  // namespace updown
