#include "updown/perm.hpp"

#include "updown/error.hpp"
#include "updown/graph.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>

namespace updown::perm {

Permutation::Permutation(std::vector<int> values) : values_(std::move(values)) {
    const int n = size();
    if (n < 1) throw InvalidArgument("permutation must have at least one point");
    std::vector<char> seen(static_cast<std::size_t>(n) + 1, 0);
    for (int v : values_) {
        if (v < 1 || v > n || seen[static_cast<std::size_t>(v)]) {
            throw InvalidArgument("not a permutation of 1.." + std::to_string(n));
        }
        seen[static_cast<std::size_t>(v)] = 1;
    }
}

Permutation Permutation::identity(int n) {
    std::vector<int> v(static_cast<std::size_t>(n));
    std::iota(v.begin(), v.end(), 1);
    return Permutation(std::move(v));
}

Permutation Permutation::reverse(int n) {
    std::vector<int> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = n - i;
    return Permutation(std::move(v));
}

Permutation Permutation::parse(std::string_view text) {
    std::vector<int> values;
    if (text.find(',') != std::string_view::npos) {
        std::size_t start = 0;
        while (start <= text.size()) {
            const std::size_t end = std::min(text.find(',', start), text.size());
            std::string_view item = text.substr(start, end - start);
            int v = 0;
            auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
            if (item.empty() || ec != std::errc{} || ptr != item.data() + item.size()) {
                throw InvalidArgument("malformed permutation '" + std::string(text) + "'");
            }
            values.push_back(v);
            start = end + 1;
        }
    } else {
        for (char c : text) {
            if (c < '1' || c > '9') {
                throw InvalidArgument("malformed permutation '" + std::string(text) + "'");
            }
            values.push_back(c - '0');
        }
    }
    try {
        return Permutation(std::move(values));
    } catch (const InvalidArgument& e) {
        throw InvalidArgument("'" + std::string(text) + "' is " + e.what());
    }
}

std::string Permutation::encode() const {
    std::string out;
    if (size() <= 9) {
        for (int v : values_) out.push_back(static_cast<char>('0' + v));
        return out;
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (i) out.push_back(',');
        out += std::to_string(values_[i]);
    }
    return out;
}

namespace {

template <typename T>
std::vector<int> ranks_of(std::span<const T> values) {
    std::vector<int> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return values[static_cast<std::size_t>(a)] < values[static_cast<std::size_t>(b)];
    });
    std::vector<int> rank(values.size());
    for (std::size_t r = 0; r < order.size(); ++r) rank[static_cast<std::size_t>(order[r])] = static_cast<int>(r) + 1;
    return rank;
}

}  // namespace

Permutation standardize(std::span<const int> values) {
    return Permutation(ranks_of(values));
}

Permutation standardize(std::span<const double> values) {
    return Permutation(ranks_of(values));
}

Permutation pattern(const Permutation& sigma, std::span<const int> positions) {
    std::vector<int> vals;
    vals.reserve(positions.size());
    for (int pos : positions) {
        if (pos < 0 || pos >= sigma.size()) throw InvalidArgument("pattern position out of range");
        vals.push_back(sigma.values()[static_cast<std::size_t>(pos)]);
    }
    return standardize(std::span<const int>(vals));
}

std::vector<Permutation> all_permutations(int n) {
    if (n < 1) throw InvalidArgument("all_permutations: n must be >= 1");
    std::vector<int> v(static_cast<std::size_t>(n));
    std::iota(v.begin(), v.end(), 1);
    std::vector<Permutation> out;
    do {
        out.emplace_back(v);
    } while (std::next_permutation(v.begin(), v.end()));
    return out;
}

namespace {

// For pattern position t, the earlier pattern positions holding the closest smaller and
// closest larger values (or -1). A candidate point extends a partial occurrence iff its
// value lies strictly between the values chosen for those two positions.
struct PatternBounds {
    std::vector<int> below;
    std::vector<int> above;
};

PatternBounds bounds_of(const Permutation& pi) {
    const int k = pi.size();
    PatternBounds b{std::vector<int>(static_cast<std::size_t>(k), -1), std::vector<int>(static_cast<std::size_t>(k), -1)};
    for (int t = 0; t < k; ++t) {
        const int v = pi.values()[static_cast<std::size_t>(t)];
        int best_below = 0;
        int best_above = k + 1;
        for (int s = 0; s < t; ++s) {
            const int w = pi.values()[static_cast<std::size_t>(s)];
            if (w < v && w > best_below) {
                best_below = w;
                b.below[static_cast<std::size_t>(t)] = s;
            }
            if (w > v && w < best_above) {
                best_above = w;
                b.above[static_cast<std::size_t>(t)] = s;
            }
        }
    }
    return b;
}

std::uint64_t count_occurrences(const PatternBounds& b, std::span<const int> sigma, int k, int t, int start,
                                std::vector<int>& chosen) {
    if (t == k) return 1;
    const int n = static_cast<int>(sigma.size());
    std::uint64_t total = 0;
    const int lo = b.below[static_cast<std::size_t>(t)];
    const int hi = b.above[static_cast<std::size_t>(t)];
    const int lo_val = lo < 0 ? 0 : chosen[static_cast<std::size_t>(lo)];
    const int hi_val = hi < 0 ? n + 1 : chosen[static_cast<std::size_t>(hi)];
    for (int i = start; i <= n - (k - t); ++i) {
        const int v = sigma[static_cast<std::size_t>(i)];
        if (v <= lo_val || v >= hi_val) continue;
        chosen[static_cast<std::size_t>(t)] = v;
        total += count_occurrences(b, sigma, k, t + 1, i + 1, chosen);
    }
    return total;
}

}  // namespace

std::uint64_t occ(const Permutation& pi, const Permutation& sigma) {
    if (pi.size() > sigma.size()) return 0;
    const PatternBounds b = bounds_of(pi);
    std::vector<int> chosen(static_cast<std::size_t>(pi.size()));
    return count_occurrences(b, sigma.values(), pi.size(), 0, 0, chosen);
}

Rational density(const Permutation& pi, const Permutation& sigma) {
    if (pi.size() > sigma.size()) return 0;
    Rational d(Integer(static_cast<unsigned long>(occ(pi, sigma))),
               binomial(static_cast<unsigned long>(sigma.size()), static_cast<unsigned long>(pi.size())));
    d.canonicalize();
    return d;
}

Permutation inflate_run(const Permutation& tau, int i, int m, Direction dir) {
    const int n = tau.size();
    if (i < 1 || i > n) throw InvalidArgument("inflation position out of range");
    if (m < 1) throw InvalidArgument("run length must be >= 1");
    const int pivot = tau(i);
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(n + m - 1));
    for (int j = 1; j <= n; ++j) {
        const int v = tau(j);
        if (j == i) {
            for (int r = 0; r < m; ++r) {
                out.push_back(dir == Direction::increasing ? pivot + r : pivot + m - 1 - r);
            }
        } else {
            out.push_back(v > pivot ? v + m - 1 : v);
        }
    }
    return Permutation(std::move(out));
}

Permutation inflate(const Permutation& sigma, int i, Direction dir) {
    return inflate_run(sigma, i, 2, dir);
}

Permutation remove_point(const Permutation& sigma, int j) {
    const int n = sigma.size();
    if (n < 2) throw InvalidArgument("cannot remove a point from a size-1 permutation");
    if (j < 1 || j > n) throw InvalidArgument("removal position out of range");
    const int removed = sigma(j);
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(n - 1));
    for (int k = 1; k <= n; ++k) {
        if (k == j) continue;
        const int v = sigma(k);
        out.push_back(v > removed ? v - 1 : v);
    }
    return Permutation(std::move(out));
}

void up_step_in_place(std::vector<int>& values, const Rational& p, Rng& rng) {
    const auto i = static_cast<std::size_t>(rng.uniform_below(values.size()));
    const bool increasing = rng.bernoulli(p);
    const int pivot = values[i];
    for (int& v : values) {
        if (v > pivot) ++v;
    }
    if (increasing) {
        values.insert(values.begin() + static_cast<std::ptrdiff_t>(i) + 1, pivot + 1);
    } else {
        values[i] = pivot + 1;
        values.insert(values.begin() + static_cast<std::ptrdiff_t>(i) + 1, pivot);
    }
}

void down_step_in_place(std::vector<int>& values, Rng& rng) {
    if (values.size() < 2) throw InvalidArgument("down-step needs at least two points");
    const auto j = static_cast<std::size_t>(rng.uniform_below(values.size()));
    const int removed = values[j];
    values.erase(values.begin() + static_cast<std::ptrdiff_t>(j));
    for (int& v : values) {
        if (v > removed) --v;
    }
}

Permutation up_step_sample(const Permutation& sigma, const Rational& p, Rng& rng) {
    std::vector<int> v(sigma.values().begin(), sigma.values().end());
    up_step_in_place(v, p, rng);
    return Permutation(std::move(v));
}

Permutation down_step_sample(const Permutation& sigma, Rng& rng) {
    std::vector<int> v(sigma.values().begin(), sigma.values().end());
    down_step_in_place(v, rng);
    return Permutation(std::move(v));
}

std::vector<int> adjacencies(const Permutation& sigma) {
    std::vector<int> out;
    for (int i = 1; i < sigma.size(); ++i) {
        if (std::abs(sigma(i + 1) - sigma(i)) == 1) out.push_back(i);
    }
    return out;
}

Permutation shrink_adjacency(const Permutation& sigma, int i) {
    if (i < 1 || i >= sigma.size() || std::abs(sigma(i + 1) - sigma(i)) != 1) {
        throw InvalidArgument("no adjacency at position " + std::to_string(i));
    }
    return remove_point(sigma, i + 1);
}

Permutation nonseparable_core(const Permutation& sigma,
                              const std::function<std::size_t(const std::vector<int>&)>& choose) {
    Permutation current = sigma;
    for (;;) {
        const std::vector<int> adj = adjacencies(current);
        if (adj.empty()) return current;
        const std::size_t pick = choose(adj);
        if (pick >= adj.size()) throw InvalidArgument("adjacency chooser returned an invalid index");
        current = shrink_adjacency(current, adj[pick]);
    }
}

Permutation nonseparable_core(const Permutation& sigma) {
    return nonseparable_core(sigma, [](const std::vector<int>&) { return std::size_t{0}; });
}

bool is_separable(const Permutation& sigma) {
    return nonseparable_core(sigma).size() == 1;
}

Permutation recursive_separable_sample(int n, const Rational& p, Rng& rng) {
    if (n < 1) throw InvalidArgument("size must be >= 1");
    std::vector<int> v{1};
    v.reserve(static_cast<std::size_t>(n));
    for (int k = 1; k < n; ++k) up_step_in_place(v, p, rng);
    return Permutation(std::move(v));
}

graph::LabeledGraph inversion_graph_labeled(const Permutation& sigma) {
    const int n = sigma.size();
    graph::LabeledGraph g(n);
    for (int i = 1; i <= n; ++i) {
        for (int j = i + 1; j <= n; ++j) {
            if (sigma(j) < sigma(i)) g.set_edge(i - 1, j - 1, true);
        }
    }
    return g;
}

graph::UGraph inversion_graph(const Permutation& sigma) {
    return graph::canonical_form(inversion_graph_labeled(sigma));
}

RunInsertionSets run_insertion_sets(const Permutation& pi, int m) {
    const int k = pi.size();
    if (m < 1 || m > k) throw InvalidArgument("run length must satisfy 1 <= m <= |pi|");
    RunInsertionSets sets;
    for (int j = 1; j + m - 1 <= k; ++j) {
        bool up = true;
        bool down = true;
        for (int t = 1; t < m; ++t) {
            up = up && pi(j + t) == pi(j) + t;
            down = down && pi(j + t) == pi(j) - t;
        }
        if (!up && !down) continue;
        // Collapse positions j+1 .. j+m-1 onto j.
        std::vector<int> kept;
        kept.reserve(static_cast<std::size_t>(k - m + 1));
        for (int q = 1; q <= k; ++q) {
            if (q <= j || q > j + m - 1) kept.push_back(pi(q));
        }
        Permutation tau = standardize(std::span<const int>(kept));
        if (up) sets.increasing.push_back({tau, j});
        if (down) sets.decreasing.push_back({tau, j});
    }
    return sets;
}

}  // namespace updown::perm
