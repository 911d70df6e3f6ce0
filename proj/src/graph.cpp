#include "updown/graph.hpp"

#include "updown/error.hpp"

#include "json.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <mutex>
#include <set>

namespace updown::graph {

LabeledGraph::LabeledGraph(int n) {
    if (n < 0) throw InvalidArgument("graph size must be nonnegative");
    reserve_for(n);
    n_ = n;
}

void LabeledGraph::reserve_for(int n) {
    if (n <= capacity_) return;
    const int new_capacity = std::max({n, 2 * capacity_, 8});
    const std::size_t new_words = (static_cast<std::size_t>(new_capacity) + 63) / 64;
    std::vector<std::uint64_t> rows(static_cast<std::size_t>(new_capacity) * new_words, 0);
    for (int u = 0; u < n_; ++u) {
        for (std::size_t w = 0; w < words_; ++w) {
            rows[static_cast<std::size_t>(u) * new_words + w] = rows_[static_cast<std::size_t>(u) * words_ + w];
        }
    }
    rows_ = std::move(rows);
    words_ = new_words;
    capacity_ = new_capacity;
}

LabeledGraph LabeledGraph::from_matrix(const std::vector<std::vector<int>>& adjacency) {
    const int n = static_cast<int>(adjacency.size());
    LabeledGraph g(n);
    for (int u = 0; u < n; ++u) {
        if (static_cast<int>(adjacency[static_cast<std::size_t>(u)].size()) != n) {
            throw InvalidArgument("adjacency matrix is not square");
        }
    }
    for (int u = 0; u < n; ++u) {
        if (adjacency[static_cast<std::size_t>(u)][static_cast<std::size_t>(u)] != 0) {
            throw InvalidArgument("adjacency matrix has a self-loop at vertex " + std::to_string(u + 1));
        }
        for (int v = u + 1; v < n; ++v) {
            const int a = adjacency[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)];
            const int b = adjacency[static_cast<std::size_t>(v)][static_cast<std::size_t>(u)];
            if (a != b || (a != 0 && a != 1)) {
                throw InvalidArgument("adjacency matrix is not a symmetric 0/1 matrix");
            }
            if (a) g.set_edge(u, v, true);
        }
    }
    return g;
}

LabeledGraph LabeledGraph::from_edge_list_json(std::string_view json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("edge-list JSON: ") + e.what());
    }
    if (!doc.contains("n") || !doc["n"].is_number_integer()) throw InvalidArgument("edge-list JSON needs integer 'n'");
    const int n = doc["n"].get<int>();
    if (n < 1) throw InvalidArgument("edge-list JSON: n must be >= 1");
    LabeledGraph g(n);
    for (const auto& e : doc.value("edges", nlohmann::json::array())) {
        if (!e.is_array() || e.size() != 2) throw InvalidArgument("edge-list JSON: edges must be pairs");
        const int u = e[0].get<int>();
        const int v = e[1].get<int>();
        if (u < 1 || v < 1 || u > n || v > n || u == v) {
            throw InvalidArgument("edge-list JSON: invalid edge [" + std::to_string(u) + ", " + std::to_string(v) + "]");
        }
        g.set_edge(u - 1, v - 1, true);
    }
    return g;
}

LabeledGraph LabeledGraph::complete(int n) {
    LabeledGraph g(n);
    for (int u = 0; u < n; ++u) {
        for (int v = u + 1; v < n; ++v) g.set_edge(u, v, true);
    }
    return g;
}

void LabeledGraph::set_edge(int u, int v, bool present) {
    if (u == v) throw InvalidArgument("self-loops are not allowed");
    const auto set_bit = [&](int a, int b) {
        std::uint64_t& word = rows_[static_cast<std::size_t>(a) * words_ + static_cast<std::size_t>(b >> 6)];
        const std::uint64_t mask = std::uint64_t{1} << (b & 63);
        word = present ? (word | mask) : (word & ~mask);
    };
    set_bit(u, v);
    set_bit(v, u);
}

int LabeledGraph::degree(int v) const {
    int d = 0;
    for (std::size_t w = 0; w < words_; ++w) d += std::popcount(rows_[static_cast<std::size_t>(v) * words_ + w]);
    return d;
}

std::size_t LabeledGraph::edge_count() const {
    std::size_t total = 0;
    for (int v = 0; v < n_; ++v) total += static_cast<std::size_t>(degree(v));
    return total / 2;
}

void LabeledGraph::duplicate_vertex(int v, bool connect) {
    if (v < 0 || v >= n_) throw InvalidArgument("vertex out of range");
    reserve_for(n_ + 1);
    const int w = n_;
    ++n_;
    std::uint64_t* row_v = &rows_[static_cast<std::size_t>(v) * words_];
    std::uint64_t* row_w = &rows_[static_cast<std::size_t>(w) * words_];
    for (std::size_t k = 0; k < words_; ++k) row_w[k] = row_v[k];
    const std::size_t word = static_cast<std::size_t>(w >> 6);
    const std::uint64_t mask = std::uint64_t{1} << (w & 63);
    for (int u = 0; u < w; ++u) {
        if (adjacent(v, u)) rows_[static_cast<std::size_t>(u) * words_ + word] |= mask;
    }
    set_edge(v, w, connect);
}

void LabeledGraph::delete_vertex(int v) {
    if (v < 0 || v >= n_) throw InvalidArgument("vertex out of range");
    const int last = n_ - 1;
    const std::size_t last_word = static_cast<std::size_t>(last >> 6);
    const std::uint64_t last_mask = std::uint64_t{1} << (last & 63);
    if (v != last) {
        for (int u = 0; u < last; ++u) {
            if (u == v) continue;
            const bool bit = (rows_[static_cast<std::size_t>(u) * words_ + last_word] & last_mask) != 0;
            std::uint64_t& word = rows_[static_cast<std::size_t>(u) * words_ + static_cast<std::size_t>(v >> 6)];
            const std::uint64_t mask = std::uint64_t{1} << (v & 63);
            word = bit ? (word | mask) : (word & ~mask);
        }
        for (std::size_t k = 0; k < words_; ++k) {
            rows_[static_cast<std::size_t>(v) * words_ + k] = rows_[static_cast<std::size_t>(last) * words_ + k];
        }
        // Drop the edge between the deleted vertex and `last`, now living at label v.
        rows_[static_cast<std::size_t>(v) * words_ + static_cast<std::size_t>(v >> 6)] &= ~(std::uint64_t{1} << (v & 63));
    }
    for (int u = 0; u < last; ++u) rows_[static_cast<std::size_t>(u) * words_ + last_word] &= ~last_mask;
    for (std::size_t k = 0; k < words_; ++k) rows_[static_cast<std::size_t>(last) * words_ + k] = 0;
    --n_;
}

LabeledGraph LabeledGraph::induced(const std::vector<int>& vertices) const {
    const int k = static_cast<int>(vertices.size());
    LabeledGraph h(k);
    for (int a = 0; a < k; ++a) {
        for (int b = a + 1; b < k; ++b) {
            if (adjacent(vertices[static_cast<std::size_t>(a)], vertices[static_cast<std::size_t>(b)])) h.set_edge(a, b, true);
        }
    }
    return h;
}

bool operator==(const LabeledGraph& a, const LabeledGraph& b) {
    if (a.n_ != b.n_) return false;
    for (int u = 0; u < a.n_; ++u) {
        for (int v = u + 1; v < a.n_; ++v) {
            if (a.adjacent(u, v) != b.adjacent(u, v)) return false;
        }
    }
    return true;
}

namespace {

int pair_count(int n) { return n * (n - 1) / 2; }

std::uint64_t bits_under(const LabeledGraph& g, const std::vector<int>& label_to_vertex) {
    const int n = g.size();
    std::uint64_t bits = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            bits = (bits << 1) | (g.adjacent(label_to_vertex[static_cast<std::size_t>(i)],
                                             label_to_vertex[static_cast<std::size_t>(j)]) ? 1U : 0U);
        }
    }
    return bits;
}

// Bits of g under the labeling if they are lexicographically < best; otherwise stops
// at the first bit that makes the candidate larger and returns best.
std::uint64_t improve(const LabeledGraph& g, const std::vector<int>& lab, std::uint64_t best, int total_bits) {
    int pos = total_bits - 1;
    bool below = false;
    std::uint64_t bits = 0;
    const int n = g.size();
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j, --pos) {
            const std::uint64_t bit = g.adjacent(lab[static_cast<std::size_t>(i)], lab[static_cast<std::size_t>(j)]) ? 1U : 0U;
            if (!below) {
                const std::uint64_t best_bit = (best >> pos) & 1U;
                if (bit > best_bit) return best;
                if (bit < best_bit) below = true;
            }
            bits = (bits << 1) | bit;
        }
    }
    return below ? bits : best;
}

}  // namespace

std::uint64_t labeled_bits(const LabeledGraph& g) {
    std::vector<int> lab(static_cast<std::size_t>(g.size()));
    for (int i = 0; i < g.size(); ++i) lab[static_cast<std::size_t>(i)] = i;
    return bits_under(g, lab);
}

UGraph canonical_form(const LabeledGraph& g) {
    const int n = g.size();
    if (n < 1) throw InvalidArgument("graph must have at least one vertex");
    if (n > kMaxCanonicalVertices) {
        throw InvalidArgument("canonical form supports at most " + std::to_string(kMaxCanonicalVertices) + " vertices");
    }
    const int total_bits = pair_count(n);
    if (n <= 2) return UGraph(n, labeled_bits(g));
    int min_degree = n;
    for (int v = 0; v < n; ++v) min_degree = std::min(min_degree, g.degree(v));
    std::uint64_t best = labeled_bits(g);
    std::vector<int> lab(static_cast<std::size_t>(n));
    for (int v0 = 0; v0 < n; ++v0) {
        if (g.degree(v0) != min_degree) continue;
        std::vector<int> outside;
        std::vector<int> inside;
        for (int u = 0; u < n; ++u) {
            if (u == v0) continue;
            (g.adjacent(v0, u) ? inside : outside).push_back(u);
        }
        // Both groups start sorted, so next_permutation visits every order.
        do {
            do {
                lab[0] = v0;
                std::copy(outside.begin(), outside.end(), lab.begin() + 1);
                std::copy(inside.begin(), inside.end(), lab.begin() + 1 + static_cast<std::ptrdiff_t>(outside.size()));
                best = improve(g, lab, best, total_bits);
            } while (std::next_permutation(inside.begin(), inside.end()));
        } while (std::next_permutation(outside.begin(), outside.end()));
    }
    return UGraph(n, best);
}

std::uint64_t canonical_bits_bruteforce(const LabeledGraph& g) {
    const int n = g.size();
    std::vector<int> lab(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) lab[static_cast<std::size_t>(i)] = i;
    std::uint64_t best = bits_under(g, lab);
    while (std::next_permutation(lab.begin(), lab.end())) best = std::min(best, bits_under(g, lab));
    return best;
}

std::string UGraph::bitstring() const {
    const int total = pair_count(n_);
    std::string s(static_cast<std::size_t>(total), '0');
    for (int k = 0; k < total; ++k) {
        if ((bits_ >> (total - 1 - k)) & 1U) s[static_cast<std::size_t>(k)] = '1';
    }
    return s;
}

std::string UGraph::encode() const { return std::to_string(n_) + ":" + bitstring(); }

LabeledGraph UGraph::labeled() const {
    LabeledGraph g(n_);
    int pos = pair_count(n_) - 1;
    for (int i = 0; i < n_; ++i) {
        for (int j = i + 1; j < n_; ++j, --pos) {
            if ((bits_ >> pos) & 1U) g.set_edge(i, j, true);
        }
    }
    return g;
}

UGraph UGraph::parse(std::string_view text) {
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) {
        throw InvalidArgument("malformed graph '" + std::string(text) + "' (expected n:bitstring)");
    }
    int n = 0;
    for (char c : text.substr(0, colon)) {
        if (c < '0' || c > '9' || n > 1000) throw InvalidArgument("malformed graph size in '" + std::string(text) + "'");
        n = n * 10 + (c - '0');
    }
    if (colon == 0 || n < 1 || n > kMaxCanonicalVertices) {
        throw InvalidArgument("graph size must be in 1.." + std::to_string(kMaxCanonicalVertices));
    }
    const std::string_view bits = text.substr(colon + 1);
    if (static_cast<int>(bits.size()) != pair_count(n)) {
        throw InvalidArgument("graph '" + std::string(text) + "' needs " + std::to_string(pair_count(n)) + " bits");
    }
    LabeledGraph g(n);
    std::size_t k = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j, ++k) {
            if (bits[k] == '1') {
                g.set_edge(i, j, true);
            } else if (bits[k] != '0') {
                throw InvalidArgument("graph bitstring must contain only 0 and 1");
            }
        }
    }
    return canonical_form(g);
}

std::vector<UGraph> all_graphs(int n) {
    if (n < 1) throw InvalidArgument("all_graphs: n must be >= 1");
    if (n > kMaxCanonicalVertices) throw InvalidArgument("all_graphs: n too large");
    std::set<UGraph> level{canonical_form(LabeledGraph(1))};
    for (int size = 2; size <= n; ++size) {
        std::set<UGraph> next;
        for (const UGraph& h : level) {
            const LabeledGraph base = h.labeled();
            for (std::uint32_t mask = 0; mask < (1U << (size - 1)); ++mask) {
                LabeledGraph g(size);
                for (int u = 0; u < size - 1; ++u) {
                    for (int v = u + 1; v < size - 1; ++v) {
                        if (base.adjacent(u, v)) g.set_edge(u, v, true);
                    }
                    if ((mask >> u) & 1U) g.set_edge(u, size - 1, true);
                }
                next.insert(canonical_form(g));
            }
        }
        level = std::move(next);
    }
    return {level.begin(), level.end()};
}

namespace {

constexpr int kTableMax = 5;

// Canonical bits of every labeled graph on k <= kTableMax vertices, indexed by labeled bits.
const std::vector<std::uint64_t>& canonical_table(int k) {
    static std::array<std::vector<std::uint64_t>, kTableMax + 1> tables;
    static std::once_flag once;
    std::call_once(once, [] {
        for (int size = 1; size <= kTableMax; ++size) {
            const int total = pair_count(size);
            auto& table = tables[static_cast<std::size_t>(size)];
            table.resize(std::size_t{1} << total);
            for (std::uint64_t code = 0; code < table.size(); ++code) {
                LabeledGraph g(size);
                int pos = total - 1;
                for (int i = 0; i < size; ++i) {
                    for (int j = i + 1; j < size; ++j, --pos) {
                        if ((code >> pos) & 1U) g.set_edge(i, j, true);
                    }
                }
                table[code] = canonical_form(g).bits();
            }
        }
    });
    return tables[static_cast<std::size_t>(k)];
}

std::uint64_t induced_bits(const LabeledGraph& g, const std::vector<int>& subset) {
    std::uint64_t bits = 0;
    const std::size_t k = subset.size();
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a + 1; b < k; ++b) bits = (bits << 1) | (g.adjacent(subset[a], subset[b]) ? 1U : 0U);
    }
    return bits;
}

}  // namespace

std::uint64_t induced_occ(const UGraph& h, const LabeledGraph& g) {
    const int k = h.size();
    const int n = g.size();
    if (k > n) return 0;
    if (k == 1) return static_cast<std::uint64_t>(n);
    const std::vector<std::uint64_t>* table = k <= kTableMax ? &canonical_table(k) : nullptr;
    std::vector<int> subset(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) subset[static_cast<std::size_t>(i)] = i;
    std::uint64_t count = 0;
    for (;;) {
        const std::uint64_t bits = induced_bits(g, subset);
        const std::uint64_t canon = table ? (*table)[bits] : canonical_form(g.induced(subset)).bits();
        if (canon == h.bits()) ++count;
        int i = k - 1;
        while (i >= 0 && subset[static_cast<std::size_t>(i)] == n - k + i) --i;
        if (i < 0) break;
        ++subset[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j) subset[static_cast<std::size_t>(j)] = subset[static_cast<std::size_t>(j - 1)] + 1;
    }
    return count;
}

std::uint64_t induced_occ(const UGraph& h, const UGraph& g) { return induced_occ(h, g.labeled()); }

Rational graph_density(const UGraph& h, const LabeledGraph& g) {
    if (h.size() > g.size()) return 0;
    Rational d(Integer(static_cast<unsigned long>(induced_occ(h, g))),
               binomial(static_cast<unsigned long>(g.size()), static_cast<unsigned long>(h.size())));
    d.canonicalize();
    return d;
}

Rational graph_density(const UGraph& h, const UGraph& g) { return graph_density(h, g.labeled()); }

UGraph duplicate_vertex(const UGraph& g, int v, bool connect) {
    if (v < 1 || v > g.size()) throw InvalidArgument("vertex out of range");
    LabeledGraph l = g.labeled();
    l.duplicate_vertex(v - 1, connect);
    return canonical_form(l);
}

UGraph delete_vertex(const UGraph& g, int v) {
    if (g.size() < 2) throw InvalidArgument("cannot delete the only vertex");
    if (v < 1 || v > g.size()) throw InvalidArgument("vertex out of range");
    LabeledGraph l = g.labeled();
    l.delete_vertex(v - 1);
    return canonical_form(l);
}

void up_step_in_place(LabeledGraph& g, const Rational& p, Rng& rng) {
    const int v = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(g.size())));
    const bool separate = rng.bernoulli(p);
    g.duplicate_vertex(v, !separate);
}

void down_step_in_place(LabeledGraph& g, Rng& rng) {
    if (g.size() < 2) throw InvalidArgument("down-step needs at least two vertices");
    const int v = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(g.size())));
    g.delete_vertex(v);
}

UGraph up_step_sample(const UGraph& g, const Rational& p, Rng& rng) {
    LabeledGraph l = g.labeled();
    up_step_in_place(l, p, rng);
    return canonical_form(l);
}

UGraph down_step_sample(const UGraph& g, Rng& rng) {
    LabeledGraph l = g.labeled();
    down_step_in_place(l, rng);
    return canonical_form(l);
}

LabeledGraph cograph_sample_labeled(int n, const Rational& p, Rng& rng) {
    if (n < 1) throw InvalidArgument("size must be >= 1");
    LabeledGraph g(1);
    for (int k = 1; k < n; ++k) up_step_in_place(g, p, rng);
    return g;
}

UGraph cograph_sample(int n, const Rational& p, Rng& rng) {
    return canonical_form(cograph_sample_labeled(n, p, rng));
}

UGraph twin_reduction_core(const UGraph& g) {
    LabeledGraph l = g.labeled();
    bool merged = true;
    while (merged && l.size() > 1) {
        merged = false;
        for (int u = 0; u < l.size() && !merged; ++u) {
            for (int v = u + 1; v < l.size() && !merged; ++v) {
                bool twins = true;
                for (int w = 0; w < l.size() && twins; ++w) {
                    if (w != u && w != v) twins = l.adjacent(u, w) == l.adjacent(v, w);
                }
                if (twins) {
                    l.delete_vertex(v);
                    merged = true;
                }
            }
        }
    }
    return canonical_form(l);
}

bool is_cograph(const UGraph& g) { return twin_reduction_core(g).size() == 1; }

UGraph named_graph(std::string_view name) {
    if (name.size() != 2 || name[1] < '1' || name[1] > '9') {
        throw InvalidArgument("unknown graph name '" + std::string(name) + "' (use K1..K9, P2..P9, C3..C9, E1..E9)");
    }
    const int n = name[1] - '0';
    LabeledGraph g(n);
    switch (name[0]) {
        case 'K':
            g = LabeledGraph::complete(n);
            break;
        case 'E':
            break;
        case 'P':
            if (n < 2) throw InvalidArgument("path needs at least 2 vertices");
            for (int i = 0; i + 1 < n; ++i) g.set_edge(i, i + 1, true);
            break;
        case 'C':
            if (n < 3) throw InvalidArgument("cycle needs at least 3 vertices");
            for (int i = 0; i < n; ++i) g.set_edge(i, (i + 1) % n, true);
            break;
        default:
            throw InvalidArgument("unknown graph name '" + std::string(name) + "'");
    }
    return canonical_form(g);
}

}  // namespace updown::graph
