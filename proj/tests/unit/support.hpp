#pragma once

#include "updown/rational.hpp"
#include "updown/stats.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace test_support {

/// {statistic, 99% critical value} of the library's pooled Pearson test.
inline std::pair<double, double> chi_square(const std::map<std::string, std::uint64_t>& observed,
                                            const std::map<std::string, updown::Rational>& expected,
                                            std::uint64_t samples) {
    const updown::stats::ChiSquare r = updown::stats::chi_square(observed, expected, samples);
    return {r.statistic, r.critical};
}

}  // namespace test_support
