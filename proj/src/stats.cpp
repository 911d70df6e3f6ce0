#include "updown/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <limits>

namespace updown::stats {

ChiSquare chi_square(const std::map<std::string, std::uint64_t>& observed,
                     const std::map<std::string, Rational>& expected, std::uint64_t samples, double level) {
    ChiSquare r;
    double pooled_obs = 0;
    double pooled_exp = 0;
    for (const auto& [state, prob] : expected) {
        const double e = to_double(prob) * static_cast<double>(samples);
        const auto it = observed.find(state);
        const double o = it == observed.end() ? 0.0 : static_cast<double>(it->second);
        if (e < 5) {
            pooled_obs += o;
            pooled_exp += e;
            continue;
        }
        r.statistic += (o - e) * (o - e) / e;
        ++r.cells;
    }
    if (pooled_exp > 0) {
        r.statistic += (pooled_obs - pooled_exp) * (pooled_obs - pooled_exp) / pooled_exp;
        ++r.cells;
    }
    for (const auto& [state, count] : observed) {
        if (count > 0 && (!expected.count(state) || expected.at(state) == 0)) r.statistic = std::numeric_limits<double>::infinity();
    }
    const boost::math::chi_squared dist(std::max(1, r.cells - 1));
    r.critical = boost::math::quantile(dist, level);
    return r;
}

}  // namespace updown::stats
