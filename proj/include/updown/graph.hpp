#pragma once

#include "updown/rational.hpp"
#include "updown/rng.hpp"

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace updown::graph {

/// Largest vertex count accepted by canonical_form (exhaustive labeling search).
inline constexpr int kMaxCanonicalVertices = 9;

/// Simple undirected graph on vertices 0..n-1 with a fixed labeling. Adjacency rows are
/// packed 64-bit words, so duplication and deletion cost O(n).
class LabeledGraph {
public:
    LabeledGraph() = default;
    explicit LabeledGraph(int n);

    /// Builds from a full 0/1 adjacency matrix; rejects asymmetric input and self-loops.
    static LabeledGraph from_matrix(const std::vector<std::vector<int>>& adjacency);
    /// Edge-list JSON: {"n": 4, "edges": [[1, 2], [2, 3]]} with 1-based endpoints.
    static LabeledGraph from_edge_list_json(std::string_view json_text);
    static LabeledGraph complete(int n);

    int size() const { return n_; }
    bool adjacent(int u, int v) const {
        return (rows_[static_cast<std::size_t>(u) * words_ + static_cast<std::size_t>(v >> 6)] >> (v & 63)) & 1U;
    }
    void set_edge(int u, int v, bool present);
    int degree(int v) const;
    std::size_t edge_count() const;

    /// Appends a copy w of vertex v (same neighbourhood); edge {v, w} iff `connect`.
    void duplicate_vertex(int v, bool connect);
    /// Removes vertex v; the last vertex takes its label (swap-remove).
    void delete_vertex(int v);

    /// Subgraph induced on the given vertices, relabeled 0..k-1 in the given order.
    LabeledGraph induced(const std::vector<int>& vertices) const;

    friend bool operator==(const LabeledGraph& a, const LabeledGraph& b);

private:
    void reserve_for(int n);

    int n_ = 0;
    int capacity_ = 0;
    std::size_t words_ = 0;
    std::vector<std::uint64_t> rows_;
};

/// Unlabeled graph stored as the lexicographically minimal upper-triangle adjacency
/// bitstring (row-major: (0,1), (0,2), ..., (0,n-1), (1,2), ...) over all labelings.
class UGraph {
public:
    UGraph() = default;

    int size() const { return n_; }
    /// The bitstring, first pair as most significant bit.
    std::uint64_t bits() const { return bits_; }
    std::string bitstring() const;

    /// "n:bitstring"
    std::string encode() const;
    /// Accepts "n:bitstring" for any labeling and canonicalizes it.
    static UGraph parse(std::string_view text);

    /// A labeled representative (the canonical labeling).
    LabeledGraph labeled() const;

    friend auto operator<=>(const UGraph&, const UGraph&) = default;
    friend bool operator==(const UGraph&, const UGraph&) = default;

private:
    friend UGraph canonical_form(const LabeledGraph& g);
    UGraph(int n, std::uint64_t bits) : n_(n), bits_(bits) {}

    int n_ = 0;
    std::uint64_t bits_ = 0;
};

/// Canonical form by exhaustive search over labelings, restricted to labelings where the
/// first vertex has minimum degree and its neighbours take the last labels (any other
/// labeling has a lexicographically larger first row). Requires n <= kMaxCanonicalVertices.
UGraph canonical_form(const LabeledGraph& g);

/// Same minimum computed without pruning over all n! labelings; used as a test oracle.
std::uint64_t canonical_bits_bruteforce(const LabeledGraph& g);

/// Upper-triangle bitstring of a labeled graph without canonicalization.
std::uint64_t labeled_bits(const LabeledGraph& g);

/// All unlabeled graphs on n vertices, sorted by bitstring.
std::vector<UGraph> all_graphs(int n);

/// Number of k-subsets I of V(G) with G[I] isomorphic to H.
std::uint64_t induced_occ(const UGraph& h, const LabeledGraph& g);
std::uint64_t induced_occ(const UGraph& h, const UGraph& g);

/// induced_occ / C(|G|, |H|); 0 when |H| > |G|.
Rational graph_density(const UGraph& h, const UGraph& g);
Rational graph_density(const UGraph& h, const LabeledGraph& g);

/// Copy of vertex v (1-based) with the same neighbourhood; connected to v iff `connect`.
UGraph duplicate_vertex(const UGraph& g, int v, bool connect);
/// Deletes vertex v (1-based) with its incident edges. Requires |G| >= 2.
UGraph delete_vertex(const UGraph& g, int v);

/// Up-step: duplicate a uniform vertex, connect original and copy with probability 1 - p.
void up_step_in_place(LabeledGraph& g, const Rational& p, Rng& rng);
/// Down-step: delete a uniform vertex. Requires |G| >= 2.
void down_step_in_place(LabeledGraph& g, Rng& rng);

UGraph up_step_sample(const UGraph& g, const Rational& p, Rng& rng);
UGraph down_step_sample(const UGraph& g, Rng& rng);

/// n-1 up-steps from K1; the law of the recursive cograph of size n.
LabeledGraph cograph_sample_labeled(int n, const Rational& p, Rng& rng);
UGraph cograph_sample(int n, const Rational& p, Rng& rng);

/// Repeatedly merges twins (vertices with equal neighbourhoods outside the pair).
/// Reduces to K1 exactly for cographs; otherwise the size bounds the density decay rate.
UGraph twin_reduction_core(const UGraph& g);
bool is_cograph(const UGraph& g);

/// Named small graphs accepted on the command line: K1..K9, P2..P9, C3..C9, E1..E9 (empty).
UGraph named_graph(std::string_view name);

}  // namespace updown::graph
