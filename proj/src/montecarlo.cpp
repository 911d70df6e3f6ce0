#include "updown/montecarlo.hpp"

#include "updown/error.hpp"
#include "updown/instances.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

namespace updown::mc {

namespace {

constexpr std::uint64_t kDynamicsTag = 0;
constexpr std::uint64_t kInitialTag = 1;
constexpr std::uint64_t kSubsampleTag = 2;

std::vector<int> parse_perm_state(const std::string& text, int n) {
    const perm::Permutation sigma = text == "identity"  ? perm::Permutation::identity(n)
                                    : text == "reverse" ? perm::Permutation::reverse(n)
                                                        : perm::Permutation::parse(text);
    if (sigma.size() != n) throw InvalidArgument("initial permutation has size " + std::to_string(sigma.size()) + ", expected " + std::to_string(n));
    return {sigma.values().begin(), sigma.values().end()};
}

graph::LabeledGraph parse_graph_state(const std::string& text, int n) {
    if (text == "empty") return graph::LabeledGraph(n);
    if (text == "complete") return graph::LabeledGraph::complete(n);
    graph::LabeledGraph g;
    if (!text.empty() && text.front() == '{') {
        g = graph::LabeledGraph::from_edge_list_json(text);
    } else if (text.find(':') != std::string::npos) {
        g = graph::UGraph::parse(text).labeled();
    } else {
        g = graph::named_graph(text).labeled();
    }
    if (g.size() != n) throw InvalidArgument("initial graph has " + std::to_string(g.size()) + " vertices, expected " + std::to_string(n));
    return g;
}

// Floyd's algorithm: k distinct values in [0, n), returned sorted.
std::vector<int> random_subset(int n, int k, Rng& rng) {
    std::vector<int> chosen;
    chosen.reserve(static_cast<std::size_t>(k));
    for (int j = n - k; j < n; ++j) {
        const int t = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(j) + 1));
        if (std::find(chosen.begin(), chosen.end(), t) == chosen.end()) {
            chosen.push_back(t);
        } else {
            chosen.push_back(j);
        }
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

struct Pattern {
    Instance instance;
    perm::Permutation perm;
    graph::UGraph graph;
    int size = 0;
};

Pattern parse_pattern(Instance instance, const std::string& text) {
    Pattern pat{instance, {}, {}, 0};
    if (instance == Instance::perm) {
        pat.perm = perm::Permutation::parse(text);
        pat.size = pat.perm.size();
    } else {
        pat.graph = text.find(':') != std::string::npos ? graph::UGraph::parse(text) : graph::named_graph(text);
        pat.size = pat.graph.size();
    }
    return pat;
}

double density_of(const ChainState& state, const Pattern& pat, Rng& rng) {
    const int n = state.size();
    const int k = pat.size;
    if (k > n) throw InvalidArgument("pattern larger than the simulated size");
    if (k <= kExactPatternSize) {
        if (state.instance() == Instance::perm) {
            return to_double(perm::density(pat.perm, perm::Permutation(state.perm_values())));
        }
        return to_double(graph::graph_density(pat.graph, state.graph()));
    }
    std::uint64_t hits = 0;
    std::vector<int> values(static_cast<std::size_t>(k));
    for (std::uint64_t s = 0; s < kSubsetSamples; ++s) {
        const std::vector<int> subset = random_subset(n, k, rng);
        if (state.instance() == Instance::perm) {
            for (int i = 0; i < k; ++i) values[static_cast<std::size_t>(i)] = state.perm_values()[static_cast<std::size_t>(subset[static_cast<std::size_t>(i)])];
            if (perm::standardize(values) == pat.perm) ++hits;
        } else {
            if (graph::canonical_form(state.graph().induced(subset)) == pat.graph) ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(kSubsetSamples);
}

std::size_t core_size(const Pattern& pat) {
    if (pat.instance == Instance::perm) return static_cast<std::size_t>(perm::nonseparable_core(pat.perm).size());
    return static_cast<std::size_t>(graph::twin_reduction_core(pat.graph).size());
}

std::string pattern_state(const Pattern& pat) {
    return pat.instance == Instance::perm ? pat.perm.encode() : pat.graph.encode();
}

}  // namespace

Instance parse_instance(const std::string& name) {
    if (name == "perm") return Instance::perm;
    if (name == "graph") return Instance::graph;
    throw InvalidArgument("unknown instance '" + name + "' (expected perm or graph)");
}

std::string to_string(Instance instance) {
    return instance == Instance::perm ? "perm" : "graph";
}

InitialSpec parse_initial(const std::string& text) {
    if (text == "uniform") return {InitialSpec::Kind::uniform, {}};
    if (text == "stationary") return {InitialSpec::Kind::stationary, {}};
    return {InitialSpec::Kind::explicit_state, text};
}

void SimConfig::validate() const {
    if (n < 1) throw InvalidArgument("n must be >= 1");
    if (trajectories < 1) throw InvalidArgument("trajectories must be >= 1");
    if (workers < 1) throw InvalidArgument("workers must be >= 1");
    if (p < 0 || p > 1) throw InvalidArgument("p must lie in [0, 1]");
    if (t_grid.empty()) throw InvalidArgument("time grid is empty");
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (t_grid[i] < 0) throw InvalidArgument("time grid must be nonnegative");
        if (i > 0 && t_grid[i] <= t_grid[i - 1]) throw InvalidArgument("time grid must be strictly increasing");
    }
    if (instance == Instance::graph && n > 4096) throw InvalidArgument("graph simulation supports n <= 4096");
}

std::uint64_t steps_at(int n, const Rational& t) {
    if (t < 0) throw InvalidArgument("time must be >= 0");
    const Integer s = floor(Rational(Integer(n) * (n + 1)) * t);
    if (!s.fits_ulong_p()) throw InvalidArgument("step count overflows");
    return s.get_ui();
}

ChainState::ChainState(Instance instance, int n) : instance_(instance) {
    if (n < 1) throw InvalidArgument("size must be >= 1");
    if (instance == Instance::perm) {
        perm_.resize(static_cast<std::size_t>(n));
        std::iota(perm_.begin(), perm_.end(), 1);
    } else {
        graph_ = graph::LabeledGraph(n);
    }
}

int ChainState::size() const {
    return instance_ == Instance::perm ? static_cast<int>(perm_.size()) : graph_.size();
}

void ChainState::step(const Rational& p, Rng& rng) {
    if (instance_ == Instance::perm) {
        perm::up_step_in_place(perm_, p, rng);
        perm::down_step_in_place(perm_, rng);
    } else {
        graph::up_step_in_place(graph_, p, rng);
        graph::down_step_in_place(graph_, rng);
    }
}

std::string ChainState::encode_labeled() const {
    if (instance_ == Instance::perm) return perm::Permutation(perm_).encode();
    std::string bits;
    for (int u = 0; u < graph_.size(); ++u) {
        for (int v = u + 1; v < graph_.size(); ++v) bits.push_back(graph_.adjacent(u, v) ? '1' : '0');
    }
    return std::to_string(graph_.size()) + ":" + bits;
}

ChainState initial_state(const SimConfig& config, std::uint64_t index) {
    ChainState state(config.instance, config.n);
    Rng rng = Rng::substream(config.master_seed, index, kInitialTag);
    const int n = config.n;
    switch (config.initial.kind) {
        case InitialSpec::Kind::explicit_state:
            if (config.instance == Instance::perm) {
                state.perm_values() = parse_perm_state(config.initial.state, n);
            } else {
                state.graph() = parse_graph_state(config.initial.state, n);
            }
            break;
        case InitialSpec::Kind::uniform:
            if (config.instance == Instance::perm) {
                std::vector<int>& v = state.perm_values();
                for (int i = n - 1; i > 0; --i) std::swap(v[static_cast<std::size_t>(i)], v[rng.uniform_below(static_cast<std::uint64_t>(i) + 1)]);
            } else {
                for (int u = 0; u < n; ++u) {
                    for (int v = u + 1; v < n; ++v) state.graph().set_edge(u, v, (rng.next() >> 63) != 0);
                }
            }
            break;
        case InitialSpec::Kind::stationary:
            if (config.instance == Instance::perm) {
                const perm::Permutation sigma = perm::recursive_separable_sample(n, config.p, rng);
                state.perm_values().assign(sigma.values().begin(), sigma.values().end());
            } else {
                state.graph() = graph::cograph_sample_labeled(n, config.p, rng);
            }
            break;
    }
    return state;
}

void run_trajectory(const SimConfig& config, std::uint64_t index,
                    const std::function<void(std::size_t, std::uint64_t, const ChainState&)>& visit) {
    ChainState state = initial_state(config, index);
    Rng rng = Rng::substream(config.master_seed, index, kDynamicsTag);
    std::uint64_t done = 0;
    for (std::size_t g = 0; g < config.t_grid.size(); ++g) {
        const std::uint64_t target = steps_at(config.n, config.t_grid[g]);
        // n = 1: both kernels are trivial, the state never changes.
        if (config.n > 1) {
            for (; done < target; ++done) state.step(config.p, rng);
        }
        done = target;
        visit(g, target, state);
    }
}

Observations simulate(const SimConfig& config, const Observer& observer) {
    config.validate();
    const auto total = static_cast<std::size_t>(config.trajectories);
    Observations result(total);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&]() {
        for (std::size_t i = next++; i < total; i = next++) {
            try {
                std::vector<std::vector<double>> rows(config.t_grid.size());
                run_trajectory(config, i, [&](std::size_t g, std::uint64_t, const ChainState& state) { rows[g] = observer(state, i, g); });
                result[i] = std::move(rows);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = total;
            }
        }
    };
    const int workers = std::min<int>(config.workers, config.trajectories);
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (std::thread& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    return result;
}

double pairwise_sum(const std::vector<double>& values) {
    const std::function<double(std::size_t, std::size_t)> sum = [&](std::size_t lo, std::size_t hi) -> double {
        if (hi - lo <= 8) {
            double s = 0;
            for (std::size_t i = lo; i < hi; ++i) s += values[i];
            return s;
        }
        const std::size_t mid = lo + (hi - lo) / 2;
        return sum(lo, mid) + sum(mid, hi);
    };
    return sum(0, values.size());
}

double state_density(const ChainState& state, const std::string& pattern, Rng& rng) {
    return density_of(state, parse_pattern(state.instance(), pattern), rng);
}

DensityCurve estimate_density_curve(const SimConfig& config, const std::string& pattern) {
    config.validate();
    const Pattern pat = parse_pattern(config.instance, pattern);
    if (pat.size > config.n) throw InvalidArgument("pattern of size " + std::to_string(pat.size) + " exceeds n = " + std::to_string(config.n));

    // Observe at t = 0 as well; the prediction needs the mean initial density.
    SimConfig run = config;
    const bool has_zero = run.t_grid.front() == 0;
    if (!has_zero) run.t_grid.insert(run.t_grid.begin(), Rational(0));
    const Observations obs = simulate(run, [&](const ChainState& state, std::uint64_t traj, std::size_t g) {
        Rng rng(substream_seed(substream_seed(config.master_seed, traj, kSubsampleTag), g, kSubsampleTag));
        return std::vector<double>{density_of(state, pat, rng)};
    });

    const std::size_t offset = has_zero ? 0 : 1;
    const auto count = static_cast<double>(config.trajectories);
    auto column = [&](std::size_t g) {
        std::vector<double> values;
        for (const auto& traj : obs) values.push_back(traj[g][0]);
        return values;
    };

    DensityCurve curve;
    curve.pattern = pattern_state(pat);
    curve.initial_mean = pairwise_sum(column(0)) / count;
    for (std::size_t g = 0; g < config.t_grid.size(); ++g) {
        const std::vector<double> values = column(g + offset);
        const double mean = pairwise_sum(values) / count;
        std::vector<double> sq;
        for (double v : values) sq.push_back((v - mean) * (v - mean));
        const double var = config.trajectories > 1 ? pairwise_sum(sq) / (count - 1) : 0.0;
        curve.t.push_back(config.t_grid[g]);
        curve.steps.push_back(steps_at(config.n, config.t_grid[g]));
        curve.estimate.push_back(mean);
        curve.stderr_.push_back(std::sqrt(var / count));
    }

    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::optional<double> limit;
    if (pat.size <= kDefaultPermCap) {
        const ChainSpec spec = make_chain(to_string(config.instance), config.p, std::max(pat.size, 1));
        const LevelSpace& level = enumerate_level(spec, pat.size);
        limit = to_double(stationary(spec, pat.size)[level.index(pattern_state(pat))]);
    } else if (core_size(pat) > 1) {
        limit = 0.0;
    }

    if (pat.size == 2) {
        curve.prediction_method = "size-2 exact mean";
        curve.rate = 2;
        for (const Rational& tq : curve.t) {
            const double decay = std::exp(-2 * to_double(tq));
            curve.prediction.push_back(*limit * (1 - decay) + decay * curve.initial_mean);
            curve.envelope.push_back(nan);
        }
        return curve;
    }
    if (!limit || pat.size < 2) {
        curve.prediction_method = pat.size < 2 ? "constant" : "none";
        for (std::size_t g = 0; g < curve.t.size(); ++g) {
            curve.prediction.push_back(pat.size < 2 ? 1.0 : nan);
            curve.envelope.push_back(nan);
        }
        return curve;
    }

    // Slowest relevant level: the core size j for nonseparable patterns, level 2 otherwise.
    const double j = static_cast<double>(std::max<std::size_t>(core_size(pat), 2));
    curve.rate = j * (j - 1);
    curve.prediction_method = "limit with fitted envelope";
    // Fit B on the early part of the grid (t <= 1/rate, and always t = 0).
    double b = std::abs(curve.initial_mean - *limit);
    for (std::size_t g = 0; g < curve.t.size(); ++g) {
        const double tg = to_double(curve.t[g]);
        if (tg * curve.rate <= 1.0) b = std::max(b, std::abs(curve.estimate[g] - *limit) * std::exp(curve.rate * tg));
    }
    curve.envelope_constant = b;
    for (const Rational& tq : curve.t) {
        curve.prediction.push_back(*limit);
        curve.envelope.push_back(b * std::exp(-curve.rate * to_double(tq)));
    }
    return curve;
}

void write_curve_csv(std::ostream& out, const DensityCurve& curve) {
    auto num = [](double v) {
        if (std::isnan(v)) return std::string("nan");
        std::ostringstream s;
        s << std::setprecision(17) << v;
        return s.str();
    };
    out << "pattern,t,steps,estimate,stderr,prediction,envelope\n";
    for (std::size_t g = 0; g < curve.t.size(); ++g) {
        out << curve.pattern << ',' << to_decimal_string(curve.t[g]) << ',' << curve.steps[g] << ',' << num(curve.estimate[g]) << ','
            << num(curve.stderr_[g]) << ',' << num(curve.prediction[g]) << ',' << num(curve.envelope[g]) << '\n';
    }
}

std::string render_pgm(const ChainState& state) {
    const int n = state.size();
    std::string header = "P5\n" + std::to_string(n) + " " + std::to_string(n) + "\n255\n";
    std::string pixels(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), static_cast<char>(255));
    auto at = [&](int row, int col) -> char& { return pixels[static_cast<std::size_t>(row) * static_cast<std::size_t>(n) + static_cast<std::size_t>(col)]; };
    if (state.instance() == Instance::perm) {
        for (int i = 1; i <= n; ++i) at(n - state.perm_values()[static_cast<std::size_t>(i - 1)], i - 1) = 0;
    } else {
        for (int u = 0; u < n; ++u) {
            for (int v = 0; v < n; ++v) {
                if (u != v && state.graph().adjacent(u, v)) at(u, v) = 0;
            }
        }
    }
    return header + pixels;
}

std::vector<std::filesystem::path> emit_frames(const SimConfig& config, const std::vector<std::uint64_t>& steps,
                                               const std::filesystem::path& out_dir) {
    if (steps.empty()) throw InvalidArgument("no frame steps requested");
    for (std::size_t i = 1; i < steps.size(); ++i) {
        if (steps[i] < steps[i - 1]) throw InvalidArgument("frame steps must be nondecreasing");
    }
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec || !std::filesystem::is_directory(out_dir)) throw Error("cannot create frame directory " + out_dir.string());

    ChainState state = initial_state(config, 0);
    Rng rng = Rng::substream(config.master_seed, 0, kDynamicsTag);
    std::uint64_t done = 0;
    std::vector<std::filesystem::path> written;
    for (std::size_t f = 0; f < steps.size(); ++f) {
        if (config.n > 1) {
            for (; done < steps[f]; ++done) state.step(config.p, rng);
        }
        done = steps[f];
        std::ostringstream name;
        name << "frame_" << std::setw(4) << std::setfill('0') << f << ".pgm";
        const std::filesystem::path path = out_dir / name.str();
        std::ofstream out(path, std::ios::binary);
        const std::string image = render_pgm(state);
        out.write(image.data(), static_cast<std::streamsize>(image.size()));
        if (!out) throw Error("cannot write frame " + path.string());
        written.push_back(path);
    }
    return written;
}

}  // namespace updown::mc
