#include "doctest.h"
#include "support.hpp"

#include "updown/error.hpp"
#include "updown/graph.hpp"

#include <numeric>
#include <set>

using namespace updown;
using graph::LabeledGraph;
using graph::UGraph;

namespace {

LabeledGraph random_graph(int n, Rng& rng) {
    LabeledGraph g(n);
    for (int u = 0; u < n; ++u) {
        for (int v = u + 1; v < n; ++v) {
            if (rng.uniform_below(2)) g.set_edge(u, v, true);
        }
    }
    return g;
}

LabeledGraph relabel(const LabeledGraph& g, Rng& rng) {
    std::vector<int> order(static_cast<std::size_t>(g.size()));
    std::iota(order.begin(), order.end(), 0);
    for (int i = g.size() - 1; i > 0; --i) std::swap(order[static_cast<std::size_t>(i)], order[rng.uniform_below(static_cast<std::uint64_t>(i) + 1)]);
    return g.induced(order);
}

}  // namespace

TEST_CASE("canonical form") {
    CHECK(graph::named_graph("E4").bitstring() == "000000");
    CHECK(graph::named_graph("K1").encode() == "1:");
    CHECK(graph::named_graph("P3") != graph::canonical_form(LabeledGraph::from_matrix({{0, 1, 0}, {1, 0, 0}, {0, 0, 0}})));
    CHECK_THROWS_AS(LabeledGraph::from_matrix({{0, 1}, {0, 0}}), InvalidArgument);
    CHECK_THROWS_AS(LabeledGraph::from_matrix({{1, 0}, {0, 0}}), InvalidArgument);

    SUBCASE("relabelings of C5 agree") {
        Rng rng(3);
        const LabeledGraph c5 = graph::named_graph("C5").labeled();
        const UGraph ref = graph::canonical_form(c5);
        for (int i = 0; i < 100; ++i) CHECK(graph::canonical_form(relabel(c5, rng)) == ref);
    }
    SUBCASE("pruned search equals exhaustive minimum") {
        Rng rng(17);
        for (int trial = 0; trial < 300; ++trial) {
            const int n = 1 + static_cast<int>(rng.uniform_below(7));
            const LabeledGraph g = random_graph(n, rng);
            REQUIRE(graph::canonical_form(g).bits() == graph::canonical_bits_bruteforce(g));
        }
    }
    SUBCASE("isomorphism invariant and idempotent up to n = 8") {
        Rng rng(23);
        for (int trial = 0; trial < 100; ++trial) {
            const int n = 2 + static_cast<int>(rng.uniform_below(7));
            const LabeledGraph g = random_graph(n, rng);
            const UGraph c = graph::canonical_form(g);
            CHECK(graph::canonical_form(relabel(g, rng)) == c);
            CHECK(graph::canonical_form(c.labeled()) == c);
            CHECK(UGraph::parse(c.encode()) == c);
        }
    }
}

TEST_CASE("enumeration counts") {
    const std::vector<std::size_t> expected{1, 2, 4, 11, 34, 156};
    for (int n = 1; n <= 6; ++n) CHECK(graph::all_graphs(n).size() == expected[static_cast<std::size_t>(n - 1)]);

    SUBCASE("n = 4 agrees with canonicalizing all labeled graphs") {
        std::set<UGraph> seen;
        for (std::uint32_t mask = 0; mask < 64; ++mask) {
            LabeledGraph g(4);
            int bit = 0;
            for (int u = 0; u < 4; ++u) {
                for (int v = u + 1; v < 4; ++v, ++bit) {
                    if ((mask >> bit) & 1U) g.set_edge(u, v, true);
                }
            }
            seen.insert(graph::canonical_form(g));
        }
        const auto all = graph::all_graphs(4);
        CHECK(std::vector<UGraph>(seen.begin(), seen.end()) == all);
    }
}

TEST_CASE("induced densities") {
    const UGraph k1 = graph::named_graph("K1");
    const UGraph k2 = graph::named_graph("K2");
    CHECK(graph::graph_density(k1, graph::named_graph("C5")) == 1);
    CHECK(graph::graph_density(k2, graph::named_graph("P3")) == Rational(2, 3));
    CHECK(graph::graph_density(graph::named_graph("K3"), graph::named_graph("K4")) == 1);
    CHECK(graph::induced_occ(graph::named_graph("P3"), graph::named_graph("C5")) == 5);
    CHECK(graph::induced_occ(graph::named_graph("P4"), graph::named_graph("C5")) == 5);
    CHECK(graph::induced_occ(graph::named_graph("K3"), graph::named_graph("K2")) == 0);

    SUBCASE("six-vertex patterns fall back to canonicalization") {
        const UGraph c6 = graph::named_graph("C6");
        CHECK(graph::induced_occ(c6, graph::named_graph("C6")) == 1);
        CHECK(graph::induced_occ(graph::named_graph("E6"), graph::named_graph("E8")) == 28);
    }
}

TEST_CASE("duplication and deletion") {
    const UGraph k1 = graph::named_graph("K1");
    const UGraph k2 = graph::named_graph("K2");
    CHECK(graph::duplicate_vertex(k1, 1, true) == k2);
    CHECK(graph::duplicate_vertex(k2, 1, true) == graph::named_graph("K3"));
    CHECK(graph::duplicate_vertex(k2, 2, false) == graph::named_graph("P3"));
    CHECK(graph::duplicate_vertex(graph::named_graph("E2"), 1, false) == graph::named_graph("E3"));
    CHECK_THROWS_AS(graph::delete_vertex(k1, 1), InvalidArgument);
    CHECK_THROWS_AS(graph::duplicate_vertex(k2, 3, true), InvalidArgument);

    SUBCASE("deleting either twin recovers the graph") {
        Rng rng(8);
        for (int trial = 0; trial < 200; ++trial) {
            const int n = 1 + static_cast<int>(rng.uniform_below(12));
            const LabeledGraph g = random_graph(n, rng);
            const int v = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n)));
            LabeledGraph a = g;
            a.duplicate_vertex(v, rng.uniform_below(2) != 0);
            REQUIRE(a.size() == n + 1);
            for (int u = 0; u < n; ++u) {
                if (u != v) CHECK(a.adjacent(u, n) == g.adjacent(u, v));
            }
            LabeledGraph b = a;
            b.delete_vertex(n);
            CHECK(b == g);
            // Swap-remove of the original: the copy takes label v.
            LabeledGraph c = a;
            c.delete_vertex(v);
            CHECK(c == g);
        }
    }
    SUBCASE("swap-remove matches induced subgraph") {
        Rng rng(31);
        for (int trial = 0; trial < 200; ++trial) {
            const int n = 2 + static_cast<int>(rng.uniform_below(70));
            const LabeledGraph g = random_graph(n, rng);
            const int v = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n)));
            std::vector<int> keep;
            for (int u = 0; u < n - 1; ++u) keep.push_back(u == v ? n - 1 : u);
            LabeledGraph d = g;
            d.delete_vertex(v);
            CHECK(d == g.induced(keep));
        }
    }
}

TEST_CASE("step samplers") {
    Rng rng(77);
    CHECK(graph::down_step_sample(graph::named_graph("K2"), rng) == graph::named_graph("K1"));
    const Rational p(1, 3);
    const UGraph k2 = graph::named_graph("K2");
    std::map<std::string, std::uint64_t> seen;
    const std::uint64_t samples = 100000;
    for (std::uint64_t i = 0; i < samples; ++i) ++seen[graph::up_step_sample(k2, p, rng).encode()];
    const std::map<std::string, Rational> exact{{graph::named_graph("K3").encode(), 1 - p},
                                                {graph::named_graph("P3").encode(), p}};
    const auto [stat, crit] = test_support::chi_square(seen, exact, samples);
    CHECK(stat < crit);
}

TEST_CASE("cographs") {
    CHECK(graph::is_cograph(graph::named_graph("C4")));
    CHECK_FALSE(graph::is_cograph(graph::named_graph("P4")));
    CHECK_FALSE(graph::is_cograph(graph::named_graph("C5")));
    CHECK(graph::twin_reduction_core(graph::named_graph("C5")) == graph::named_graph("C5"));

    SUBCASE("samples are P4-free") {
        Rng rng(41);
        const UGraph p4 = graph::named_graph("P4");
        for (int i = 0; i < 10000; ++i) {
            const LabeledGraph g = graph::cograph_sample_labeled(8, Rational(1, 2), rng);
            REQUIRE(graph::induced_occ(p4, g) == 0);
        }
    }
    SUBCASE("twin reduction agrees with P4-freeness on all graphs up to 6 vertices") {
        const UGraph p4 = graph::named_graph("P4");
        for (int n = 1; n <= 6; ++n) {
            for (const UGraph& g : graph::all_graphs(n)) CHECK(graph::is_cograph(g) == (graph::induced_occ(p4, g) == 0));
        }
    }
}

TEST_CASE("edge-list ingestion") {
    const LabeledGraph g = LabeledGraph::from_edge_list_json(R"({"n": 4, "edges": [[1, 2], [2, 3], [3, 4]]})");
    CHECK(graph::canonical_form(g) == graph::named_graph("P4"));
    CHECK_THROWS_AS(LabeledGraph::from_edge_list_json(R"({"n": 2, "edges": [[1, 1]]})"), InvalidArgument);
    CHECK_THROWS_AS(LabeledGraph::from_edge_list_json("{"), InvalidArgument);
}
