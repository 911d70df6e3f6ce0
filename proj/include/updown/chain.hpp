#pragma once

#include "updown/rational.hpp"
#include "updown/rng.hpp"

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace updown {

/// All states of one size, in the instance's deterministic order.
struct LevelSpace {
    int level = 0;
    std::vector<std::string> states;
    std::unordered_map<std::string, std::size_t> index_of;

    std::size_t size() const { return states.size(); }
    /// Position of a state; throws InvalidArgument for unknown encodings.
    std::size_t index(const std::string& state) const;
};

/// Exact row-stochastic matrix between two levels.
struct StochKernel {
    int from_level = 0;
    int to_level = 0;
    RationalMatrix entries;

    bool is_stochastic() const;
};

/// (target state, probability) pairs; repeated targets are summed when a kernel is built.
using KernelRow = std::vector<std::pair<std::string, Rational>>;

/// Instance hooks. Every hook works on canonical state encodings.
struct ChainHooks {
    std::function<std::vector<std::string>(int n)> enumerate;
    std::function<KernelRow(const std::string& state, const Rational& p)> up_row;
    std::function<KernelRow(const std::string& state)> down_row;
    std::function<std::string(const std::string& state, const Rational& p, Rng& rng)> sample_up;
    std::function<std::string(const std::string& state, Rng& rng)> sample_down;
    /// Size of a state given its encoding; throws InvalidArgument when malformed.
    std::function<int(const std::string& state)> level_of;
};

/// Instance descriptor plus a shared, thread-safe memo of levels and kernels. Copies share
/// the memo, so a spec can be passed by value cheaply.
class ChainSpec {
public:
    /// `rates` defaults to c_n = n(n+1).
    ChainSpec(std::string name, int max_exact_level, Rational p, ChainHooks hooks,
              std::function<Rational(int)> rates = {});

    const std::string& name() const { return name_; }
    int max_exact_level() const { return max_exact_level_; }
    const Rational& p() const { return p_; }
    const ChainHooks& hooks() const { return hooks_; }

    /// c_n, with c_0 = 0.
    Rational rate(int n) const;
    /// beta_n = c_{n-1} / c_n.
    Rational beta(int n) const;
    /// omega_{k,n} = c_{k-1} / c_n.
    Rational omega(int k, int n) const;

    /// Throws LevelCapExceeded unless 1 <= n <= max_exact_level.
    void require_level(int n) const;

    /// When set, kernel builds above ~10^5 entries log a memory estimate to stderr.
    bool verbose = false;

private:
    friend struct ChainCacheAccess;
    struct Cache;

    std::string name_;
    int max_exact_level_;
    Rational p_;
    ChainHooks hooks_;
    std::function<Rational(int)> rates_;
    std::shared_ptr<Cache> cache_;
};

const LevelSpace& enumerate_level(const ChainSpec& spec, int n);

/// U_n: level n -> n+1.
const StochKernel& build_up_kernel(const ChainSpec& spec, int n);
/// D_n: level n -> n-1 (n >= 2).
const StochKernel& build_down_kernel(const ChainSpec& spec, int n);
/// T_n = U_n D_{n+1}.
const StochKernel& updown_operator(const ChainSpec& spec, int n);
/// D_{n,k} = D_n D_{n-1} ... D_{k+1}; identity when k = n.
const StochKernel& extended_down(const ChainSpec& spec, int n, int k);
/// U_{k,n} = U_k U_{k+1} ... U_{n-1}; identity when k = n.
const StochKernel& up_product(const ChainSpec& spec, int k, int n);

struct Violation {
    std::string row_state;
    std::string col_state;
    Rational lhs;
    Rational rhs;
};

struct CommutationReport {
    bool holds = true;
    Rational beta_checked;
    /// At most a handful of offending entries.
    std::vector<Violation> violations;
};

/// Exact check of U_n D_{n+1} = beta_n D_n U_{n-1} + (1 - beta_n) I.
CommutationReport verify_commutation(const ChainSpec& spec, int n);

/// c_{n-1}(D_n U_{n-1} - I) = c_n(T_n - I).
bool verify_alternative_form(const ChainSpec& spec, int n);

/// U_n D_{n+1,k} = omega_{k,n} D_{n,k-1} U_{k-1} + (1 - omega_{k,n}) D_{n,k}, 2 <= k <= n.
bool verify_extended_commutation(const ChainSpec& spec, int n, int k);

struct DensityVector {
    std::string pattern;
    int level = 0;
    std::vector<Rational> values;
};

/// (d_s)_n(u) = D_{n,|s|}(u, s), where |s| is the level `s` belongs to.
DensityVector density_vector(const ChainSpec& spec, const std::string& s, int n);

/// Size of a state encoding. Throws InvalidArgument for malformed encodings.
int state_level(const ChainSpec& spec, const std::string& s);

/// eta_{i,j} = prod_{m=i}^{j-1} c_m / (c_{m-1} - c_{j-1}).
Rational eta_coeff(const ChainSpec& spec, int i, int j);
/// theta_{i,j} = prod_{m=i}^{j-1} c_m / (c_m - c_{i-1}).
Rational theta_coeff(const ChainSpec& spec, int i, int j);

struct EigenVector {
    std::string pattern;
    int level = 0;
    std::vector<Rational> values;
    Rational eigenvalue;
};

/// h_s = sum_{|r| <= |s|} U_{|r|,|s|}(r, s) eta_{|r|,|s|} d_r, evaluated at level n.
EigenVector eigenfunction(const ChainSpec& spec, const std::string& s, int n);

/// d_s rebuilt from eigenfunctions: sum_{|r| <= |s|} U_{|r|,|s|}(r, s) theta_{|r|,|s|} h_r.
std::vector<Rational> density_from_eigenfunctions(const ChainSpec& spec, const std::string& s, int n);

struct SpectrumLevel {
    int k = 0;
    Rational eigenvalue;
    std::size_t expected_multiplicity = 0;  // |E_k| - |E_{k-1}|
    std::size_t rank = 0;                   // rank of span{(h_s)_n : |s| = k}
    bool eigen_relations_hold = true;       // T_n h_s = eigenvalue h_s for all |s| = k
};

struct SpectrumReport {
    int n = 0;
    std::vector<SpectrumLevel> levels;
    std::size_t state_count = 0;

    bool consistent() const;
};

SpectrumReport spectrum_report(const ChainSpec& spec, int n);

/// M_n = U_{1,n}(root, .).
std::vector<Rational> stationary(const ChainSpec& spec, int n);

struct StationaryReport {
    bool fixed_point = true;    // M_n T_n = M_n
    bool up_consistent = true;  // M_n U_n = M_{n+1}
    bool down_consistent = true;  // M_{n+1} D_{n+1} = M_n
    bool full_support = true;
    bool ok() const { return fixed_point && up_consistent && down_consistent; }
};

/// Requires n + 1 <= cap.
StationaryReport stationary_report(const ChainSpec& spec, int n);

/// T_n (d_s)_n = (1 - omega)(d_s)_n + omega sum_{|r| = |s|-1} (d_r)_n U_{|r|}(r, s), omega = omega_{|s|,n}.
bool triangular_action_check(const ChainSpec& spec, const std::string& s, int n);

/// sum_{|u| = k} (d_u)_n = 1 for every k <= n.
bool partition_of_unity_check(const ChainSpec& spec, int n);

/// D_{n+1} (d_s)_n = (d_s)_{n+1} for every |s| <= n.
bool down_consistency_check(const ChainSpec& spec, int n);

/// sum_{k=i}^{j} eta_{i,k} theta_{k,j} = delta_{ij} for all 1 <= i <= j <= jmax.
bool eta_theta_inverse_check(const ChainSpec& spec, int jmax);

/// JSON kernel export: {"from_level", "to_level", "states_from", "states_to", "entries"}.
std::string kernel_to_json(const ChainSpec& spec, const StochKernel& kernel);

}  // namespace updown
