#include "updown/instances.hpp"

#include "updown/error.hpp"
#include "updown/graph.hpp"
#include "updown/perm.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>

namespace updown {

ChainSpec perm_chain(const Rational& p, int cap) {
    using perm::Permutation;
    ChainHooks hooks;
    hooks.enumerate = [](int n) {
        std::vector<std::string> out;
        for (const Permutation& s : perm::all_permutations(n)) out.push_back(s.encode());
        std::sort(out.begin(), out.end());
        return out;
    };
    hooks.up_row = [](const std::string& state, const Rational& q) {
        const Permutation s = Permutation::parse(state);
        const Rational share = Rational(1, static_cast<unsigned long>(s.size()));
        KernelRow row;
        for (int i = 1; i <= s.size(); ++i) {
            if (q != 0) row.emplace_back(perm::inflate(s, i, perm::Direction::increasing).encode(), share * q);
            if (q != 1) row.emplace_back(perm::inflate(s, i, perm::Direction::decreasing).encode(), share * (1 - q));
        }
        return row;
    };
    hooks.down_row = [](const std::string& state) {
        const Permutation s = Permutation::parse(state);
        const Rational share = Rational(1, static_cast<unsigned long>(s.size()));
        KernelRow row;
        for (int j = 1; j <= s.size(); ++j) row.emplace_back(perm::remove_point(s, j).encode(), share);
        return row;
    };
    hooks.sample_up = [](const std::string& state, const Rational& q, Rng& rng) {
        return perm::up_step_sample(Permutation::parse(state), q, rng).encode();
    };
    hooks.sample_down = [](const std::string& state, Rng& rng) {
        return perm::down_step_sample(Permutation::parse(state), rng).encode();
    };
    hooks.level_of = [](const std::string& state) { return Permutation::parse(state).size(); };
    return ChainSpec("perm", cap, p, std::move(hooks));
}

namespace {

std::vector<std::string> graph_level(int n) {
    std::filesystem::path cache_file;
    if (const char* dir = std::getenv("UPDOWN_CACHE_DIR"); dir && *dir) {
        cache_file = std::filesystem::path(dir) / ("graph_level_" + std::to_string(n) + ".txt");
        std::ifstream in(cache_file);
        std::vector<std::string> states;
        for (std::string line; std::getline(in, line);) {
            if (!line.empty()) states.push_back(line);
        }
        if (!states.empty()) {
            // Re-validate: a cached level must round-trip through canonicalization.
            bool valid = true;
            for (const std::string& s : states) {
                try {
                    valid = valid && graph::UGraph::parse(s).encode() == s;
                } catch (const InvalidArgument&) {
                    valid = false;
                }
            }
            if (valid && std::is_sorted(states.begin(), states.end())) return states;
        }
    }
    std::vector<std::string> states;
    for (const graph::UGraph& g : graph::all_graphs(n)) states.push_back(g.encode());
    if (!cache_file.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(cache_file.parent_path(), ec);
        const std::filesystem::path tmp = cache_file.string() + ".tmp";
        {
            std::ofstream out(tmp);
            for (const std::string& s : states) out << s << '\n';
        }
        std::filesystem::rename(tmp, cache_file, ec);
    }
    return states;
}

}  // namespace

ChainSpec graph_chain(const Rational& p, int cap) {
    using graph::UGraph;
    if (cap > graph::kMaxCanonicalVertices) {
        throw InvalidArgument("graph chain cap is limited to " + std::to_string(graph::kMaxCanonicalVertices));
    }
    ChainHooks hooks;
    hooks.enumerate = graph_level;
    hooks.up_row = [](const std::string& state, const Rational& q) {
        const UGraph g = UGraph::parse(state);
        const Rational share = Rational(1, static_cast<unsigned long>(g.size()));
        KernelRow row;
        for (int v = 1; v <= g.size(); ++v) {
            if (q != 1) row.emplace_back(graph::duplicate_vertex(g, v, true).encode(), share * (1 - q));
            if (q != 0) row.emplace_back(graph::duplicate_vertex(g, v, false).encode(), share * q);
        }
        return row;
    };
    hooks.down_row = [](const std::string& state) {
        const UGraph g = UGraph::parse(state);
        const Rational share = Rational(1, static_cast<unsigned long>(g.size()));
        KernelRow row;
        for (int v = 1; v <= g.size(); ++v) row.emplace_back(graph::delete_vertex(g, v).encode(), share);
        return row;
    };
    hooks.sample_up = [](const std::string& state, const Rational& q, Rng& rng) {
        return graph::up_step_sample(UGraph::parse(state), q, rng).encode();
    };
    hooks.sample_down = [](const std::string& state, Rng& rng) {
        return graph::down_step_sample(UGraph::parse(state), rng).encode();
    };
    hooks.level_of = [](const std::string& state) { return UGraph::parse(state).size(); };
    return ChainSpec("graph", cap, p, std::move(hooks));
}

ChainSpec make_chain(const std::string& instance, const Rational& p, int cap) {
    if (instance == "perm") return perm_chain(p, cap);
    if (instance == "graph") return graph_chain(p, cap);
    throw InvalidArgument("unknown instance '" + instance + "' (expected perm or graph)");
}

}  // namespace updown
