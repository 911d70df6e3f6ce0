#pragma once

#include "updown/graph.hpp"
#include "updown/perm.hpp"
#include "updown/rational.hpp"
#include "updown/rng.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace updown::mc {

enum class Instance { perm, graph };

Instance parse_instance(const std::string& name);
std::string to_string(Instance instance);

/// How trajectories start. `state` is used by `explicit_state`: a permutation/graph
/// encoding, or one of the names identity, reverse (perm), empty, complete (graph).
struct InitialSpec {
    enum class Kind { explicit_state, uniform, stationary };
    Kind kind = Kind::explicit_state;
    std::string state = "identity";
};

/// Parses "uniform", "stationary", or anything else as an explicit state.
InitialSpec parse_initial(const std::string& text);

struct SimConfig {
    Instance instance = Instance::perm;
    int n = 1;
    Rational p = Rational(1, 2);
    /// Scaled times; the chain has made floor(n(n+1) t) steps at time t.
    std::vector<Rational> t_grid;
    int trajectories = 1;
    std::uint64_t master_seed = 0;
    InitialSpec initial;
    /// Trajectory-level parallelism only; results do not depend on it.
    int workers = 1;

    /// Throws InvalidArgument when the configuration is inconsistent.
    void validate() const;
};

/// floor(n(n+1) t).
std::uint64_t steps_at(int n, const Rational& t);

/// The state of one trajectory: a one-line permutation or a labeled graph.
class ChainState {
public:
    ChainState(Instance instance, int n);

    Instance instance() const { return instance_; }
    int size() const;

    /// One up-step followed by one down-step.
    void step(const Rational& p, Rng& rng);

    const std::vector<int>& perm_values() const { return perm_; }
    const graph::LabeledGraph& graph() const { return graph_; }
    std::vector<int>& perm_values() { return perm_; }
    graph::LabeledGraph& graph() { return graph_; }

    /// Permutation encoding, or "n:bits" of the carried labeling (not canonicalized).
    std::string encode_labeled() const;

private:
    Instance instance_;
    std::vector<int> perm_;
    graph::LabeledGraph graph_;
};

/// Initial state of trajectory `index`, drawn from substream tag 1 when random.
ChainState initial_state(const SimConfig& config, std::uint64_t index);

/// Runs trajectory `index` and calls `visit(grid_index, steps, state)` at every grid point.
void run_trajectory(const SimConfig& config, std::uint64_t index,
                    const std::function<void(std::size_t, std::uint64_t, const ChainState&)>& visit);

/// Per-trajectory observations: result[trajectory][grid point] = observer(state).
using Observer = std::function<std::vector<double>(const ChainState& state, std::uint64_t trajectory, std::size_t grid_index)>;
using Observations = std::vector<std::vector<std::vector<double>>>;

/// Runs all trajectories on `config.workers` threads. Output order is by trajectory index,
/// so it is identical for any worker count.
Observations simulate(const SimConfig& config, const Observer& observer);

/// Pairwise (cascade) summation in index order.
double pairwise_sum(const std::vector<double>& values);

/// Number of random k-subsets used per state when a pattern has more than kExactPatternSize points.
inline constexpr int kExactPatternSize = 4;
inline constexpr std::uint64_t kSubsetSamples = 20000;

/// Density of `pattern` in a simulated state: exact for |pattern| <= kExactPatternSize,
/// otherwise the fraction of kSubsetSamples uniform k-subsets drawn from `rng`.
double state_density(const ChainState& state, const std::string& pattern, Rng& rng);

struct DensityCurve {
    std::string pattern;
    std::vector<Rational> t;
    std::vector<std::uint64_t> steps;
    std::vector<double> estimate;
    std::vector<double> stderr_;
    /// Predicted mean (size-2 patterns) or limiting value; NaN when not available.
    std::vector<double> prediction;
    /// Fitted envelope B e^{-rate t} for the deviation from the limit; NaN for size-2 patterns.
    std::vector<double> envelope;
    std::string prediction_method;
    /// Decay rate used by the envelope and the fitted constant.
    double rate = 0;
    double envelope_constant = 0;
    /// Mean density at t = 0.
    double initial_mean = 0;
};

/// Estimates E[d_pattern(X(t))] on the grid. Subset subsampling for large patterns uses
/// substream tag 2 of each trajectory.
DensityCurve estimate_density_curve(const SimConfig& config, const std::string& pattern);

/// CSV: t,steps,estimate,stderr,prediction,envelope.
void write_curve_csv(std::ostream& out, const DensityCurve& curve);

/// Grayscale P5 image of side n: permutations put a black pixel at row n - sigma(i),
/// column i - 1 (the identity is the diagonal from bottom-left to top-right); graphs draw
/// the adjacency matrix of the carried labeling. Background is white.
std::string render_pgm(const ChainState& state);

/// Runs trajectory 0 and writes one frame per requested step count (nondecreasing) as
/// frame_XXXX.pgm. Returns the written paths.
std::vector<std::filesystem::path> emit_frames(const SimConfig& config, const std::vector<std::uint64_t>& steps,
                                               const std::filesystem::path& out_dir);

}  // namespace updown::mc
