#pragma once

#include "updown/rational.hpp"

#include <cstdint>
#include <map>
#include <string>

namespace updown::stats {

struct ChiSquare {
    double statistic = 0;
    double critical = 0;
    int cells = 0;
    bool pass() const { return statistic < critical; }
};

/// Pearson goodness of fit of observed counts against exact probabilities. Cells with
/// expectation below 5 are pooled into one; a count on a zero-probability state fails.
ChiSquare chi_square(const std::map<std::string, std::uint64_t>& observed,
                     const std::map<std::string, Rational>& expected, std::uint64_t samples, double level = 0.99);

}  // namespace updown::stats
