#include "doctest.h"
#include "support.hpp"

#include "updown/error.hpp"
#include "updown/instances.hpp"
#include "updown/montecarlo.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

using namespace updown;
using mc::Instance;
using mc::SimConfig;

namespace {

std::string canonical_state(const mc::ChainState& state) {
    if (state.instance() == Instance::perm) return perm::Permutation(state.perm_values()).encode();
    return graph::canonical_form(state.graph()).encode();
}

SimConfig base(Instance instance, int n, Rational p) {
    SimConfig c;
    c.instance = instance;
    c.n = n;
    c.p = std::move(p);
    return c;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("step budget") {
    CHECK(mc::steps_at(100, parse_rational("0.1")) == 1010);
    CHECK(mc::steps_at(100, Rational(1, 3)) == 3366);
    CHECK(mc::steps_at(7, 0) == 0);
    CHECK_THROWS_AS(mc::steps_at(3, -1), InvalidArgument);

    SimConfig c = base(Instance::perm, 5, Rational(1, 2));
    c.t_grid = {Rational(1, 2), Rational(1, 4)};
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c.t_grid = {0, 1};
    c.trajectories = 0;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
}

TEST_CASE("size one is constant") {
    for (Instance instance : {Instance::perm, Instance::graph}) {
        SimConfig c = base(instance, 1, Rational(1, 2));
        c.t_grid = {0, 5, 100};
        c.trajectories = 3;
        c.initial = mc::parse_initial("uniform");
        const auto obs = mc::simulate(c, [](const mc::ChainState& s, std::uint64_t, std::size_t) {
            return std::vector<double>{static_cast<double>(s.size()), static_cast<double>(s.encode_labeled().size())};
        });
        for (const auto& traj : obs) {
            for (const auto& row : traj) CHECK(row == traj.front());
        }
    }
}

TEST_CASE("worker count does not change trajectories") {
    for (Instance instance : {Instance::perm, Instance::graph}) {
        SimConfig c = base(instance, 12, Rational(2, 5));
        c.t_grid = {0, Rational(1, 10), Rational(1, 2), 2};
        c.trajectories = 37;
        c.master_seed = 99;
        c.initial = mc::parse_initial("uniform");
        auto observe = [](const mc::ChainState& s, std::uint64_t, std::size_t) {
            const std::string e = s.encode_labeled();
            return std::vector<double>(e.begin(), e.end());
        };
        const auto one = mc::simulate(c, observe);
        c.workers = 8;
        CHECK(mc::simulate(c, observe) == one);
        c.master_seed = 100;
        CHECK(mc::simulate(c, observe) != one);
    }
}

TEST_CASE("one-step marginals match the exact kernel") {
    struct Case {
        Instance instance;
        int n;
        std::string start;
    };
    const Rational p(1, 3);
    for (const Case& k : {Case{Instance::perm, 3, "123"}, Case{Instance::perm, 4, "2413"}, Case{Instance::graph, 3, "P3"},
                          Case{Instance::graph, 4, "P4"}}) {
        const ChainSpec spec = make_chain(mc::to_string(k.instance), p, 5);
        SimConfig c = base(k.instance, k.n, p);
        c.initial = mc::parse_initial(k.start);
        c.t_grid = {Rational(1, k.n * (k.n + 1))};
        c.trajectories = 100000;
        c.workers = 4;
        c.master_seed = 5;
        const LevelSpace& level = enumerate_level(spec, k.n);
        const auto obs = mc::simulate(c, [&](const mc::ChainState& s, std::uint64_t, std::size_t) {
            return std::vector<double>{static_cast<double>(level.index(canonical_state(s)))};
        });
        const std::string start = canonical_state(mc::initial_state(c, 0));
        const RationalMatrix& t = updown_operator(spec, k.n).entries;
        std::map<std::string, std::uint64_t> seen;
        std::map<std::string, Rational> exact;
        for (const auto& traj : obs) ++seen[level.states[static_cast<std::size_t>(traj[0][0])]];
        for (std::size_t j = 0; j < level.size(); ++j) {
            if (t(level.index(start), j) != 0) exact[level.states[j]] = t(level.index(start), j);
        }
        const auto [stat, crit] = test_support::chi_square(seen, exact, c.trajectories);
        CHECK_MESSAGE(stat < crit, mc::to_string(k.instance) << " n=" << k.n);
    }
}

TEST_CASE("long-run law approaches the stationary distribution") {
    const Rational p(2, 5);
    for (Instance instance : {Instance::perm, Instance::graph}) {
        const ChainSpec spec = make_chain(mc::to_string(instance), p, 4);
        SimConfig c = base(instance, 4, p);
        c.initial = mc::parse_initial(instance == Instance::perm ? "reverse" : "empty");
        c.t_grid = {10};
        c.trajectories = 100000;
        c.workers = 8;
        c.master_seed = 11;
        const LevelSpace& level = enumerate_level(spec, 4);
        const auto obs = mc::simulate(c, [&](const mc::ChainState& s, std::uint64_t, std::size_t) {
            return std::vector<double>{static_cast<double>(level.index(canonical_state(s)))};
        });
        std::map<std::string, std::uint64_t> seen;
        std::map<std::string, Rational> exact;
        for (const auto& traj : obs) ++seen[level.states[static_cast<std::size_t>(traj[0][0])]];
        const std::vector<Rational> m = stationary(spec, 4);
        for (std::size_t j = 0; j < level.size(); ++j) {
            if (m[j] != 0) exact[level.states[j]] = m[j];
        }
        const auto [stat, crit] = test_support::chi_square(seen, exact, c.trajectories);
        CHECK(stat < crit);
    }
}

TEST_CASE("initial states") {
    SimConfig c = base(Instance::perm, 6, Rational(1, 2));
    c.t_grid = {0};
    c.initial = mc::parse_initial("reverse");
    CHECK(mc::initial_state(c, 0).encode_labeled() == "654321");
    c.initial = mc::parse_initial("stationary");
    for (std::uint64_t i = 0; i < 50; ++i) CHECK(perm::is_separable(perm::Permutation(mc::initial_state(c, i).perm_values())));
    c.initial = mc::parse_initial("1234");
    CHECK_THROWS_AS(mc::initial_state(c, 0), InvalidArgument);

    SimConfig g = base(Instance::graph, 5, Rational(1, 2));
    g.initial = mc::parse_initial("complete");
    CHECK(mc::initial_state(g, 0).graph().edge_count() == 10);
    g.initial = mc::parse_initial(R"({"n": 5, "edges": [[1, 2]]})");
    CHECK(mc::initial_state(g, 0).graph().edge_count() == 1);
}

TEST_CASE("subsampled densities are unbiased") {
    Rng rng(8);
    SimConfig c = base(Instance::perm, 40, Rational(1, 2));
    c.initial = mc::parse_initial("uniform");
    const mc::ChainState state = mc::initial_state(c, 3);
    const double exact = to_double(perm::density(perm::Permutation::parse("21354"), perm::Permutation(state.perm_values())));
    const double estimate = mc::state_density(state, "21354", rng);
    const double sd = std::sqrt(exact * (1 - exact) / static_cast<double>(mc::kSubsetSamples));
    CHECK(std::abs(estimate - exact) < 4 * sd);

    SimConfig g = base(Instance::graph, 30, Rational(1, 2));
    g.initial = mc::parse_initial("uniform");
    const mc::ChainState gs = mc::initial_state(g, 1);
    const double gexact = to_double(graph::graph_density(graph::named_graph("P5"), gs.graph()));
    const double gestimate = mc::state_density(gs, "P5", rng);
    CHECK(std::abs(gestimate - gexact) < 4 * std::sqrt(gexact * (1 - gexact) / static_cast<double>(mc::kSubsetSamples)));
}

TEST_CASE("density curve") {
    SUBCASE("size-2 pattern follows the exact mean") {
        SimConfig c = base(Instance::perm, 30, Rational(1, 2));
        c.initial = mc::parse_initial("reverse");
        c.t_grid = {Rational(1, 4), Rational(1, 2), 1, 2};
        c.trajectories = 64;
        c.master_seed = 4;
        c.workers = 4;
        const mc::DensityCurve curve = mc::estimate_density_curve(c, "12");
        CHECK(curve.initial_mean == 0);
        for (std::size_t g = 0; g < curve.t.size(); ++g) {
            CHECK(curve.prediction[g] == doctest::Approx(0.5 * (1 - std::exp(-2 * to_double(curve.t[g])))));
            CHECK(std::abs(curve.estimate[g] - curve.prediction[g]) < 4 * curve.stderr_[g] + 0.02);
            CHECK(curve.stderr_[g] >= 0);
        }
    }
    SUBCASE("graph edge density from the empty graph") {
        SimConfig c = base(Instance::graph, 20, Rational(1, 3));
        c.initial = mc::parse_initial("empty");
        c.t_grid = {0, 1};
        c.trajectories = 16;
        const mc::DensityCurve curve = mc::estimate_density_curve(c, "K2");
        CHECK(curve.estimate[0] == 0);
        CHECK(curve.prediction[1] == doctest::Approx((2.0 / 3) * (1 - std::exp(-2.0))));
    }
    SUBCASE("nonseparable pattern gets an envelope at rate j(j-1)") {
        SimConfig c = base(Instance::perm, 12, Rational(1, 2));
        c.initial = mc::parse_initial("2413");
        c.n = 4;
        c.t_grid = {0, Rational(1, 20), 1};
        c.trajectories = 8;
        const mc::DensityCurve curve = mc::estimate_density_curve(c, "2413");
        CHECK(curve.rate == 12);
        CHECK(curve.prediction[0] == 0);
        CHECK(curve.envelope_constant >= 1);
    }
    SimConfig c = base(Instance::perm, 3, Rational(1, 2));
    c.t_grid = {0};
    CHECK_THROWS_AS(mc::estimate_density_curve(c, "1234"), InvalidArgument);
}

TEST_CASE("frames") {
    SimConfig c = base(Instance::perm, 5, Rational(1, 2));
    c.initial = mc::parse_initial("identity");
    const std::string id = mc::render_pgm(mc::initial_state(c, 0));
    const std::string header = "P5\n5 5\n255\n";
    REQUIRE(id.size() == header.size() + 25);
    for (int row = 0; row < 5; ++row) {
        for (int col = 0; col < 5; ++col) {
            const char px = id[header.size() + static_cast<std::size_t>(row * 5 + col)];
            CHECK((px == 0) == (row + col == 4));
        }
    }
    SimConfig g = base(Instance::graph, 7, Rational(1, 2));
    g.initial = mc::parse_initial("empty");
    const std::string white = mc::render_pgm(mc::initial_state(g, 0));
    CHECK(white.substr(header.size() + 0) == std::string(49, static_cast<char>(255)));

    const std::filesystem::path dir = std::filesystem::temp_directory_path() / "updown_frames_test";
    std::filesystem::remove_all(dir);
    c.n = 20;
    c.initial = mc::parse_initial("reverse");
    const auto files = mc::emit_frames(c, {0, 10, 10, 400}, dir);
    CHECK(files.size() == 4);
    CHECK(read_file(files[1]) == read_file(files[2]));
    CHECK(read_file(files[0]).rfind("P5\n20 20\n255\n", 0) == 0);
    std::filesystem::remove_all(dir);
}
