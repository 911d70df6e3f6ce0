#include "doctest.h"
#include "support.hpp"

#include "updown/error.hpp"
#include "updown/graph.hpp"
#include "updown/perm.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <set>

using namespace updown;
using perm::Direction;
using perm::Permutation;

namespace {

Permutation P(const char* s) { return Permutation::parse(s); }

// Oracle: enumerate every k-subset of positions and compare extracted patterns.
std::uint64_t occ_bruteforce(const Permutation& pi, const Permutation& sigma) {
    const int n = sigma.size();
    const int k = pi.size();
    if (k > n) return 0;
    std::uint64_t count = 0;
    for (std::uint32_t mask = 0; mask < (1U << n); ++mask) {
        if (std::popcount(mask) != k) continue;
        std::vector<int> pos;
        for (int i = 0; i < n; ++i) {
            if ((mask >> i) & 1U) pos.push_back(i);
        }
        if (perm::pattern(sigma, pos) == pi) ++count;
    }
    return count;
}

}  // namespace

TEST_CASE("parse and encode") {
    CHECK(P("2413").encode() == "2413");
    CHECK(P("1,2").encode() == "12");
    CHECK(Permutation::parse("10,9,8,7,6,5,4,3,2,1").encode() == "10,9,8,7,6,5,4,3,2,1");
    CHECK_THROWS_AS(P("112"), InvalidArgument);
    CHECK_THROWS_AS(P("23"), InvalidArgument);
    CHECK_THROWS_AS(P(""), InvalidArgument);
    CHECK_THROWS_AS(P("1,,2"), InvalidArgument);
}

TEST_CASE("occurrence counts") {
    CHECK(perm::occ(P("1"), P("35142")) == 5);
    CHECK(perm::occ(P("12"), P("2413")) == 3);
    CHECK(perm::occ(P("21"), P("321")) == 3);
    CHECK(perm::occ(P("123"), P("12")) == 0);
    CHECK(perm::density(P("12"), P("2413")) == Rational(1, 2));

    SUBCASE("matches subset enumeration") {
        Rng rng(7);
        for (int trial = 0; trial < 60; ++trial) {
            const int n = 3 + static_cast<int>(rng.uniform_below(6));
            std::vector<int> v(static_cast<std::size_t>(n));
            std::iota(v.begin(), v.end(), 1);
            for (int i = n - 1; i > 0; --i) std::swap(v[static_cast<std::size_t>(i)], v[rng.uniform_below(static_cast<std::uint64_t>(i) + 1)]);
            const Permutation sigma(v);
            for (int k = 1; k <= std::min(n, 4); ++k) {
                for (const Permutation& pi : perm::all_permutations(k)) {
                    REQUIRE(perm::occ(pi, sigma) == occ_bruteforce(pi, sigma));
                }
            }
        }
    }
}

TEST_CASE("pattern extraction composes") {
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform_below(7));
        std::vector<int> v(static_cast<std::size_t>(n));
        std::iota(v.begin(), v.end(), 1);
        for (int i = n - 1; i > 0; --i) std::swap(v[static_cast<std::size_t>(i)], v[rng.uniform_below(static_cast<std::uint64_t>(i) + 1)]);
        const Permutation sigma(v);
        std::vector<int> outer;
        for (int i = 0; i < n; ++i) {
            if (rng.uniform_below(3) != 0) outer.push_back(i);
        }
        if (outer.empty()) outer.push_back(0);
        std::vector<int> inner;
        std::vector<int> composed;
        for (std::size_t j = 0; j < outer.size(); ++j) {
            if (rng.uniform_below(2) != 0) {
                inner.push_back(static_cast<int>(j));
                composed.push_back(outer[j]);
            }
        }
        if (inner.empty()) continue;
        CHECK(perm::pattern(perm::pattern(sigma, outer), inner) == perm::pattern(sigma, composed));
    }
}

TEST_CASE("inflation and deletion") {
    CHECK(perm::inflate(P("1"), 1, Direction::increasing) == P("12"));
    CHECK(perm::inflate(P("1"), 1, Direction::decreasing) == P("21"));
    CHECK(perm::inflate(P("12"), 1, Direction::decreasing) == P("213"));
    CHECK(perm::inflate(P("21"), 2, Direction::increasing) == P("312"));
    CHECK(perm::remove_point(P("213"), 3) == P("21"));
    CHECK(perm::remove_point(P("12"), 1) == P("1"));
    CHECK(perm::remove_point(P("2413"), 2) == P("213"));
    CHECK_THROWS_AS(perm::remove_point(P("1"), 1), InvalidArgument);
    CHECK_THROWS_AS(perm::inflate(P("12"), 3, Direction::increasing), InvalidArgument);

    SUBCASE("deleting either new point recovers the original") {
        for (int n = 1; n <= 5; ++n) {
            for (const Permutation& s : perm::all_permutations(n)) {
                for (int i = 1; i <= n; ++i) {
                    for (Direction d : {Direction::increasing, Direction::decreasing}) {
                        const Permutation big = perm::inflate(s, i, d);
                        REQUIRE(big.size() == n + 1);
                        CHECK(perm::remove_point(big, i) == s);
                        CHECK(perm::remove_point(big, i + 1) == s);
                        const bool up = big(i) < big(i + 1);
                        CHECK(up == (d == Direction::increasing));
                    }
                }
            }
        }
    }
}

TEST_CASE("up-step sampler matches the exact row") {
    const Rational p(1, 3);
    Rng rng(2024);
    CHECK(perm::down_step_sample(P("12"), rng) == P("1"));
    const Permutation start = P("132");
    std::map<std::string, Rational> exact;
    for (int i = 1; i <= 3; ++i) {
        exact[perm::inflate(start, i, Direction::increasing).encode()] += p / 3;
        exact[perm::inflate(start, i, Direction::decreasing).encode()] += (1 - p) / 3;
    }
    std::map<std::string, std::uint64_t> seen;
    const std::uint64_t samples = 100000;
    for (std::uint64_t s = 0; s < samples; ++s) ++seen[perm::up_step_sample(start, p, rng).encode()];
    const auto [stat, crit] = test_support::chi_square(seen, exact, samples);
    CHECK(stat < crit);
}

TEST_CASE("nonseparable core") {
    CHECK(perm::nonseparable_core(P("2413")) == P("2413"));
    CHECK(perm::nonseparable_core(P("3412")) == P("1"));
    CHECK(perm::nonseparable_core(P("25314")) == P("25314"));
    CHECK(perm::nonseparable_core(P("246135")) == P("246135"));
    CHECK(perm::nonseparable_core(P("23514")) == P("2413"));
    CHECK(perm::nonseparable_core(P("35142")) == P("35142"));
    CHECK(perm::is_separable(P("2143")));
    CHECK_FALSE(perm::is_separable(P("3142")));

    SUBCASE("shrink order does not matter") {
        Rng rng(5);
        for (int n = 1; n <= 6; ++n) {
            for (const Permutation& s : perm::all_permutations(n)) {
                const Permutation leftmost = perm::nonseparable_core(s);
                for (int rep = 0; rep < 3; ++rep) {
                    const Permutation other = perm::nonseparable_core(
                        s, [&](const std::vector<int>& adj) { return static_cast<std::size_t>(rng.uniform_below(adj.size())); });
                    REQUIRE(other == leftmost);
                }
                CHECK(perm::adjacencies(leftmost).empty());
            }
        }
    }
}

TEST_CASE("recursive separable samples are separable") {
    Rng rng(99);
    for (int i = 0; i < 500; ++i) {
        const Permutation s = perm::recursive_separable_sample(7, Rational(2, 5), rng);
        CHECK(s.size() == 7);
        CHECK(perm::is_separable(s));
    }
}

TEST_CASE("inversion graph") {
    CHECK(perm::inversion_graph(P("1234")).bits() == 0);
    CHECK(perm::inversion_graph(P("21")) == graph::named_graph("K2"));
    CHECK(perm::inversion_graph(P("2413")) == graph::named_graph("P4"));
    const graph::LabeledGraph g = perm::inversion_graph_labeled(P("2413"));
    CHECK(g.adjacent(0, 2));
    CHECK(g.adjacent(1, 2));
    CHECK(g.adjacent(1, 3));
    CHECK(g.edge_count() == 3);
}

TEST_CASE("run insertion sets") {
    SUBCASE("m = 1 lists every point") {
        const Permutation pi = P("2413");
        const auto sets = perm::run_insertion_sets(pi, 1);
        REQUIRE(sets.increasing.size() == 4);
        for (int i = 1; i <= 4; ++i) {
            CHECK(sets.increasing[static_cast<std::size_t>(i - 1)] == perm::RunInsertion{pi, i});
        }
        CHECK(sets.decreasing.size() == 4);
    }
    SUBCASE("small example") {
        const auto sets = perm::run_insertion_sets(P("123"), 2);
        CHECK(sets.increasing == std::vector<perm::RunInsertion>{{P("12"), 1}, {P("12"), 2}});
        CHECK(sets.decreasing.empty());
    }
    SUBCASE("scan agrees with reconstruction") {
        for (int k = 1; k <= 6; ++k) {
            for (const Permutation& pi : perm::all_permutations(k)) {
                for (int m = 1; m <= k; ++m) {
                    std::set<perm::RunInsertion> inc;
                    std::set<perm::RunInsertion> dec;
                    for (const Permutation& tau : perm::all_permutations(k - m + 1)) {
                        for (int i = 1; i <= tau.size(); ++i) {
                            if (perm::inflate_run(tau, i, m, Direction::increasing) == pi) inc.insert({tau, i});
                            if (perm::inflate_run(tau, i, m, Direction::decreasing) == pi) dec.insert({tau, i});
                        }
                    }
                    const auto sets = perm::run_insertion_sets(pi, m);
                    REQUIRE(std::set<perm::RunInsertion>(sets.increasing.begin(), sets.increasing.end()) == inc);
                    REQUIRE(std::set<perm::RunInsertion>(sets.decreasing.begin(), sets.decreasing.end()) == dec);
                    REQUIRE(sets.increasing.size() == inc.size());
                    REQUIRE(sets.decreasing.size() == dec.size());
                }
            }
        }
    }
}
