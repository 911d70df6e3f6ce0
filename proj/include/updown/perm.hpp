#pragma once

#include "updown/rational.hpp"
#include "updown/rng.hpp"

#include <compare>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace updown::graph {
class UGraph;
class LabeledGraph;
}  // namespace updown::graph

namespace updown::perm {

/// A permutation of {1, ..., n} in one-line notation.
class Permutation {
public:
    Permutation() = default;
    /// Validates that `values` is a permutation of 1..n with n >= 1.
    explicit Permutation(std::vector<int> values);

    static Permutation identity(int n);
    static Permutation reverse(int n);

    /// Digit string for n <= 9 ("2413"), comma separated otherwise.
    static Permutation parse(std::string_view text);
    std::string encode() const;

    int size() const { return static_cast<int>(values_.size()); }
    /// 1-based access: sigma(i).
    int operator()(int i) const { return values_[static_cast<std::size_t>(i - 1)]; }
    std::span<const int> values() const { return values_; }

    friend auto operator<=>(const Permutation&, const Permutation&) = default;
    friend bool operator==(const Permutation&, const Permutation&) = default;

private:
    std::vector<int> values_;
};

/// Pattern of sigma restricted to the given increasing 0-based positions.
Permutation pattern(const Permutation& sigma, std::span<const int> positions);

/// Relative order of arbitrary distinct values, as a permutation (ranks are 1-based).
Permutation standardize(std::span<const int> values);
Permutation standardize(std::span<const double> values);

/// All permutations of size n in lexicographic order of one-line notation.
std::vector<Permutation> all_permutations(int n);

/// Number of index subsets I with pat_I(sigma) = pi; 0 if |pi| > |sigma|.
/// Enumerates subsets with prefix pruning; cost grows like C(|sigma|, |pi|).
std::uint64_t occ(const Permutation& pi, const Permutation& sigma);

/// Pattern density occ(pi, sigma) / C(|sigma|, |pi|); 0 when |pi| > |sigma|.
Rational density(const Permutation& pi, const Permutation& sigma);

enum class Direction { increasing, decreasing };

/// Replaces the point (i, sigma(i)) by two points consecutive in position and value.
/// The new points occupy positions i, i+1 and values sigma(i), sigma(i)+1; `dir`
/// decides which of them carries the lower value. 1-based i.
Permutation inflate(const Permutation& sigma, int i, Direction dir);

/// Replaces the point (i, tau(i)) by a monotone run of length m (m = 2 is inflate).
Permutation inflate_run(const Permutation& tau, int i, int m, Direction dir);

/// Removes the point at 1-based position j and standardizes.
Permutation remove_point(const Permutation& sigma, int j);

/// One draw of the up-step: uniform point, increasing with probability p.
Permutation up_step_sample(const Permutation& sigma, const Rational& p, Rng& rng);
/// One draw of the down-step: remove a uniform point. Requires |sigma| >= 2.
Permutation down_step_sample(const Permutation& sigma, Rng& rng);

/// In-place variants used by the simulator (O(n) per step, no allocation churn).
void up_step_in_place(std::vector<int>& values, const Rational& p, Rng& rng);
void down_step_in_place(std::vector<int>& values, Rng& rng);

/// 1-based positions i such that (i, i+1) is an adjacency: consecutive in position and value.
std::vector<int> adjacencies(const Permutation& sigma);

/// Shrinks the adjacency starting at 1-based position i into a single point.
Permutation shrink_adjacency(const Permutation& sigma, int i);

/// Repeatedly shrinks adjacencies, always the leftmost one first.
Permutation nonseparable_core(const Permutation& sigma);

/// Same fixed point, but `choose` picks which of the current adjacencies to shrink
/// (it receives the list and returns an index into it). Used to test order independence.
Permutation nonseparable_core(const Permutation& sigma,
                              const std::function<std::size_t(const std::vector<int>&)>& choose);

bool is_separable(const Permutation& sigma);

/// n-1 up-steps from the size-1 permutation: the random recursive separable permutation.
Permutation recursive_separable_sample(int n, const Rational& p, Rng& rng);

/// Inversion graph: edge {i, j} iff (j - i)(sigma(j) - sigma(i)) < 0.
graph::LabeledGraph inversion_graph_labeled(const Permutation& sigma);
graph::UGraph inversion_graph(const Permutation& sigma);

struct RunInsertion {
    Permutation tau;
    int position;  // 1-based i

    friend bool operator==(const RunInsertion&, const RunInsertion&) = default;
    friend auto operator<=>(const RunInsertion&, const RunInsertion&) = default;
};

struct RunInsertionSets {
    std::vector<RunInsertion> increasing;  // I_m(pi)
    std::vector<RunInsertion> decreasing;  // D_m(pi)
};

/// Pairs (tau, i) such that replacing (i, tau(i)) by a monotone run of length m gives pi.
/// Found by scanning pi for runs of m points consecutive in position and value.
RunInsertionSets run_insertion_sets(const Permutation& pi, int m);

}  // namespace updown::perm
