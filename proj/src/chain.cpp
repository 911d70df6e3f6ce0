#include "updown/chain.hpp"

#include "updown/error.hpp"

#include "json.hpp"

#include <iostream>

namespace updown {

struct ChainSpec::Cache {
    std::recursive_mutex mutex;
    std::map<int, LevelSpace> levels;
    std::map<int, StochKernel> up;
    std::map<int, StochKernel> down;
    std::map<int, StochKernel> updown;
    std::map<std::pair<int, int>, StochKernel> extended_down;
    std::map<std::pair<int, int>, StochKernel> up_product;
};

struct ChainCacheAccess {
    static ChainSpec::Cache& of(const ChainSpec& spec) { return *spec.cache_; }
};

std::size_t LevelSpace::index(const std::string& state) const {
    auto it = index_of.find(state);
    if (it == index_of.end()) {
        throw InvalidArgument("state '" + state + "' is not in level " + std::to_string(level));
    }
    return it->second;
}

bool StochKernel::is_stochastic() const {
    for (std::size_t r = 0; r < entries.rows(); ++r) {
        Rational sum = 0;
        for (const Rational& x : entries.row(r)) {
            if (x < 0) return false;
            sum += x;
        }
        if (sum != 1) return false;
    }
    return true;
}

ChainSpec::ChainSpec(std::string name, int max_exact_level, Rational p, ChainHooks hooks,
                     std::function<Rational(int)> rates)
    : name_(std::move(name)),
      max_exact_level_(max_exact_level),
      p_(std::move(p)),
      hooks_(std::move(hooks)),
      rates_(std::move(rates)),
      cache_(std::make_shared<Cache>()) {
    if (p_ < 0 || p_ > 1) throw InvalidArgument("p must lie in [0, 1], got " + to_string(p_));
    if (max_exact_level_ < 1) throw InvalidArgument("exact-level cap must be >= 1");
}

Rational ChainSpec::rate(int n) const {
    if (n < 0) throw InvalidArgument("rate index must be >= 0");
    if (n == 0) return 0;
    if (rates_) return rates_(n);
    return Rational(n) * Rational(n + 1);
}

Rational ChainSpec::beta(int n) const { return Rational(rate(n - 1) / rate(n)); }

Rational ChainSpec::omega(int k, int n) const { return Rational(rate(k - 1) / rate(n)); }

void ChainSpec::require_level(int n) const {
    if (n < 1 || n > max_exact_level_) throw LevelCapExceeded(n, max_exact_level_);
}

const LevelSpace& enumerate_level(const ChainSpec& spec, int n) {
    spec.require_level(n);
    auto& cache = ChainCacheAccess::of(spec);
    std::lock_guard lock(cache.mutex);
    auto it = cache.levels.find(n);
    if (it != cache.levels.end()) return it->second;
    LevelSpace level;
    level.level = n;
    level.states = spec.hooks().enumerate(n);
    for (std::size_t i = 0; i < level.states.size(); ++i) {
        if (!level.index_of.emplace(level.states[i], i).second) {
            throw Error("duplicate state '" + level.states[i] + "' in level " + std::to_string(n));
        }
    }
    return cache.levels.emplace(n, std::move(level)).first->second;
}

namespace {

void log_estimate(const ChainSpec& spec, const char* what, std::size_t rows, std::size_t cols) {
    const double entries = static_cast<double>(rows) * static_cast<double>(cols);
    if (spec.verbose && entries > 1e5) {
        std::cerr << "[" << spec.name() << "] building " << what << " " << rows << "x" << cols
                  << " (~" << entries * static_cast<double>(sizeof(Rational)) / 1e6 << " MB before numerators)\n";
    }
}

StochKernel kernel_from_rows(const ChainSpec& spec, const LevelSpace& from, const LevelSpace& to,
                             const std::function<KernelRow(const std::string&)>& row_of, const char* what) {
    log_estimate(spec, what, from.size(), to.size());
    StochKernel k{from.level, to.level, RationalMatrix(from.size(), to.size())};
    for (std::size_t r = 0; r < from.size(); ++r) {
        for (const auto& [target, prob] : row_of(from.states[r])) {
            k.entries(r, to.index(target)) += prob;
        }
    }
    return k;
}

StochKernel identity_kernel(const LevelSpace& level) {
    return {level.level, level.level, RationalMatrix::identity(level.size())};
}

StochKernel compose(const StochKernel& a, const StochKernel& b) {
    return {a.from_level, b.to_level, a.entries * b.entries};
}

}  // namespace

const StochKernel& build_up_kernel(const ChainSpec& spec, int n) {
    spec.require_level(n + 1);
    auto& cache = ChainCacheAccess::of(spec);
    std::lock_guard lock(cache.mutex);
    if (auto it = cache.up.find(n); it != cache.up.end()) return it->second;
    const Rational p = spec.p();
    StochKernel k = kernel_from_rows(
        spec, enumerate_level(spec, n), enumerate_level(spec, n + 1),
        [&](const std::string& s) { return spec.hooks().up_row(s, p); }, "up-kernel");
    return cache.up.emplace(n, std::move(k)).first->second;
}

const StochKernel& build_down_kernel(const ChainSpec& spec, int n) {
    if (n < 2) throw InvalidArgument("down-kernel needs level >= 2");
    spec.require_level(n);
    auto& cache = ChainCacheAccess::of(spec);
    std::lock_guard lock(cache.mutex);
    if (auto it = cache.down.find(n); it != cache.down.end()) return it->second;
    StochKernel k = kernel_from_rows(spec, enumerate_level(spec, n), enumerate_level(spec, n - 1),
                                     spec.hooks().down_row, "down-kernel");
    return cache.down.emplace(n, std::move(k)).first->second;
}

const StochKernel& updown_operator(const ChainSpec& spec, int n) {
    spec.require_level(n + 1);
    auto& cache = ChainCacheAccess::of(spec);
    std::lock_guard lock(cache.mutex);
    if (auto it = cache.updown.find(n); it != cache.updown.end()) return it->second;
    StochKernel t = compose(build_up_kernel(spec, n), build_down_kernel(spec, n + 1));
    return cache.updown.emplace(n, std::move(t)).first->second;
}

const StochKernel& extended_down(const ChainSpec& spec, int n, int k) {
    if (k < 1 || k > n) throw InvalidArgument("extended_down requires 1 <= k <= n");
    spec.require_level(n);
    auto& cache = ChainCacheAccess::of(spec);
    std::lock_guard lock(cache.mutex);
    if (auto it = cache.extended_down.find({n, k}); it != cache.extended_down.end()) return it->second;
    StochKernel result = k == n ? identity_kernel(enumerate_level(spec, n))
                                : compose(build_down_kernel(spec, n), extended_down(spec, n - 1, k));
    return cache.extended_down.emplace(std::pair{n, k}, std::move(result)).first->second;
}

const StochKernel& up_product(const ChainSpec& spec, int k, int n) {
    if (k < 1 || k > n) throw InvalidArgument("up_product requires 1 <= k <= n");
    spec.require_level(n);
    auto& cache = ChainCacheAccess::of(spec);
    std::lock_guard lock(cache.mutex);
    if (auto it = cache.up_product.find({k, n}); it != cache.up_product.end()) return it->second;
    StochKernel result = k == n ? identity_kernel(enumerate_level(spec, n))
                                : compose(up_product(spec, k, n - 1), build_up_kernel(spec, n - 1));
    return cache.up_product.emplace(std::pair{k, n}, std::move(result)).first->second;
}

CommutationReport verify_commutation(const ChainSpec& spec, int n) {
    if (n < 2) throw InvalidArgument("commutation is checked for n >= 2");
    const LevelSpace& level = enumerate_level(spec, n);
    const RationalMatrix& t = updown_operator(spec, n).entries;
    const RationalMatrix du = build_down_kernel(spec, n).entries * build_up_kernel(spec, n - 1).entries;
    CommutationReport report;
    report.beta_checked = spec.beta(n);
    const Rational& b = report.beta_checked;
    for (std::size_t r = 0; r < level.size(); ++r) {
        for (std::size_t c = 0; c < level.size(); ++c) {
            Rational rhs = b * du(r, c);
            if (r == c) rhs += 1 - b;
            if (t(r, c) != rhs) {
                report.holds = false;
                if (report.violations.size() < 5) {
                    report.violations.push_back({level.states[r], level.states[c], t(r, c), rhs});
                }
            }
        }
    }
    return report;
}

bool verify_alternative_form(const ChainSpec& spec, int n) {
    const std::size_t size = enumerate_level(spec, n).size();
    const RationalMatrix id = RationalMatrix::identity(size);
    const RationalMatrix du = build_down_kernel(spec, n).entries * build_up_kernel(spec, n - 1).entries;
    const RationalMatrix lhs = (du - id).scaled(spec.rate(n - 1));
    const RationalMatrix rhs = (updown_operator(spec, n).entries - id).scaled(spec.rate(n));
    return lhs == rhs;
}

bool verify_extended_commutation(const ChainSpec& spec, int n, int k) {
    if (k < 2 || k > n) throw InvalidArgument("extended commutation needs 2 <= k <= n");
    const RationalMatrix lhs = build_up_kernel(spec, n).entries * extended_down(spec, n + 1, k).entries;
    const Rational w = spec.omega(k, n);
    const RationalMatrix rhs = (extended_down(spec, n, k - 1).entries * build_up_kernel(spec, k - 1).entries).scaled(w) +
                               extended_down(spec, n, k).entries.scaled(1 - w);
    return lhs == rhs;
}

int state_level(const ChainSpec& spec, const std::string& s) { return spec.hooks().level_of(s); }

DensityVector density_vector(const ChainSpec& spec, const std::string& s, int n) {
    const int k = state_level(spec, s);
    if (k > n) throw InvalidArgument("pattern '" + s + "' is larger than level " + std::to_string(n));
    const std::size_t col = enumerate_level(spec, k).index(s);
    const RationalMatrix& d = extended_down(spec, n, k).entries;
    DensityVector out{s, n, std::vector<Rational>(d.rows())};
    for (std::size_t r = 0; r < d.rows(); ++r) out.values[r] = d(r, col);
    return out;
}

Rational eta_coeff(const ChainSpec& spec, int i, int j) {
    if (i < 1 || i > j) throw InvalidArgument("eta_coeff requires 1 <= i <= j");
    Rational prod = 1;
    for (int m = i; m < j; ++m) {
        const Rational den = spec.rate(m - 1) - spec.rate(j - 1);
        if (den == 0) throw Error("eta_coeff: rates are not strictly increasing");
        prod *= spec.rate(m) / den;
    }
    return prod;
}

Rational theta_coeff(const ChainSpec& spec, int i, int j) {
    if (i < 1 || i > j) throw InvalidArgument("theta_coeff requires 1 <= i <= j");
    Rational prod = 1;
    for (int m = i; m < j; ++m) {
        const Rational den = spec.rate(m) - spec.rate(i - 1);
        if (den == 0) throw Error("theta_coeff: rates are not strictly increasing");
        prod *= spec.rate(m) / den;
    }
    return prod;
}

namespace {

// sum_{|r| <= |s|} U_{|r|,|s|}(r, s) coeff(|r|, |s|) f_r, with f_r a vector over level n.
std::vector<Rational> expand(const ChainSpec& spec, const std::string& s, int n,
                             const std::function<Rational(int, int)>& coeff,
                             const std::function<std::vector<Rational>(const std::string&)>& basis) {
    const int k = state_level(spec, s);
    const std::size_t col = enumerate_level(spec, k).index(s);
    std::vector<Rational> out(enumerate_level(spec, n).size());
    for (int j = 1; j <= k; ++j) {
        const LevelSpace& lj = enumerate_level(spec, j);
        const RationalMatrix& u = up_product(spec, j, k).entries;
        const Rational c = coeff(j, k);
        for (std::size_t r = 0; r < lj.size(); ++r) {
            if (u(r, col) == 0) continue;
            const Rational w = u(r, col) * c;
            const std::vector<Rational> f = basis(lj.states[r]);
            for (std::size_t x = 0; x < out.size(); ++x) out[x] += w * f[x];
        }
    }
    return out;
}

}  // namespace

EigenVector eigenfunction(const ChainSpec& spec, const std::string& s, int n) {
    const int k = state_level(spec, s);
    if (k > n) throw InvalidArgument("pattern '" + s + "' is larger than level " + std::to_string(n));
    EigenVector h;
    h.pattern = s;
    h.level = n;
    h.eigenvalue = 1 - spec.omega(k, n);
    h.values = expand(
        spec, s, n, [&](int i, int j) { return eta_coeff(spec, i, j); },
        [&](const std::string& r) { return density_vector(spec, r, n).values; });
    return h;
}

std::vector<Rational> density_from_eigenfunctions(const ChainSpec& spec, const std::string& s, int n) {
    return expand(
        spec, s, n, [&](int i, int j) { return theta_coeff(spec, i, j); },
        [&](const std::string& r) { return eigenfunction(spec, r, n).values; });
}

bool SpectrumReport::consistent() const {
    std::size_t total = 0;
    for (const SpectrumLevel& l : levels) {
        if (l.rank != l.expected_multiplicity || !l.eigen_relations_hold) return false;
        total += l.rank;
    }
    return total == state_count;
}

SpectrumReport spectrum_report(const ChainSpec& spec, int n) {
    SpectrumReport report;
    report.n = n;
    report.state_count = enumerate_level(spec, n).size();
    const RationalMatrix& t = updown_operator(spec, n).entries;
    for (int k = 1; k <= n; ++k) {
        SpectrumLevel l;
        l.k = k;
        l.eigenvalue = 1 - spec.omega(k, n);
        const std::size_t ek = enumerate_level(spec, k).size();
        l.expected_multiplicity = k == 1 ? 1 : ek - enumerate_level(spec, k - 1).size();
        std::vector<std::vector<Rational>> vectors;
        for (const std::string& s : enumerate_level(spec, k).states) {
            EigenVector h = eigenfunction(spec, s, n);
            const std::vector<Rational> th = t.apply(h.values);
            for (std::size_t x = 0; x < th.size(); ++x) {
                if (th[x] != l.eigenvalue * h.values[x]) l.eigen_relations_hold = false;
            }
            vectors.push_back(std::move(h.values));
        }
        l.rank = rank(vectors);
        report.levels.push_back(std::move(l));
    }
    return report;
}

std::vector<Rational> stationary(const ChainSpec& spec, int n) {
    const RationalMatrix& u = up_product(spec, 1, n).entries;
    std::vector<Rational> m(u.cols());
    for (std::size_t c = 0; c < u.cols(); ++c) m[c] = u(0, c);
    return m;
}

StationaryReport stationary_report(const ChainSpec& spec, int n) {
    StationaryReport report;
    const std::vector<Rational> m = stationary(spec, n);
    const std::vector<Rational> next = stationary(spec, n + 1);
    report.fixed_point = updown_operator(spec, n).entries.left_apply(m) == m;
    report.up_consistent = build_up_kernel(spec, n).entries.left_apply(m) == next;
    report.down_consistent = build_down_kernel(spec, n + 1).entries.left_apply(next) == m;
    for (const Rational& x : m) report.full_support = report.full_support && x > 0;
    return report;
}

bool triangular_action_check(const ChainSpec& spec, const std::string& s, int n) {
    const int k = state_level(spec, s);
    const std::vector<Rational> d = density_vector(spec, s, n).values;
    const std::vector<Rational> lhs = updown_operator(spec, n).entries.apply(d);
    const Rational w = spec.omega(k, n);
    std::vector<Rational> rhs(d.size());
    for (std::size_t x = 0; x < d.size(); ++x) rhs[x] = (1 - w) * d[x];
    if (k >= 2) {
        const LevelSpace& lower = enumerate_level(spec, k - 1);
        const std::size_t col = enumerate_level(spec, k).index(s);
        const RationalMatrix& u = build_up_kernel(spec, k - 1).entries;
        for (std::size_t r = 0; r < lower.size(); ++r) {
            if (u(r, col) == 0) continue;
            const std::vector<Rational> dr = density_vector(spec, lower.states[r], n).values;
            for (std::size_t x = 0; x < d.size(); ++x) rhs[x] += w * u(r, col) * dr[x];
        }
    }
    return lhs == rhs;
}

bool partition_of_unity_check(const ChainSpec& spec, int n) {
    for (int k = 1; k <= n; ++k) {
        const RationalMatrix& d = extended_down(spec, n, k).entries;
        for (std::size_t r = 0; r < d.rows(); ++r) {
            Rational sum = 0;
            for (const Rational& x : d.row(r)) sum += x;
            if (sum != 1) return false;
        }
    }
    return true;
}

bool down_consistency_check(const ChainSpec& spec, int n) {
    const RationalMatrix& down = build_down_kernel(spec, n + 1).entries;
    for (int k = 1; k <= n; ++k) {
        for (const std::string& s : enumerate_level(spec, k).states) {
            if (down.apply(density_vector(spec, s, n).values) != density_vector(spec, s, n + 1).values) return false;
        }
    }
    return true;
}

bool eta_theta_inverse_check(const ChainSpec& spec, int jmax) {
    for (int i = 1; i <= jmax; ++i) {
        for (int j = i; j <= jmax; ++j) {
            Rational sum = 0;
            for (int k = i; k <= j; ++k) sum += eta_coeff(spec, i, k) * theta_coeff(spec, k, j);
            if (sum != (i == j ? 1 : 0)) return false;
        }
    }
    return true;
}

std::string kernel_to_json(const ChainSpec& spec, const StochKernel& kernel) {
    nlohmann::ordered_json doc;
    doc["from_level"] = kernel.from_level;
    doc["to_level"] = kernel.to_level;
    doc["states_from"] = enumerate_level(spec, kernel.from_level).states;
    doc["states_to"] = enumerate_level(spec, kernel.to_level).states;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (std::size_t r = 0; r < kernel.entries.rows(); ++r) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (const Rational& x : kernel.entries.row(r)) row.push_back(to_string(x));
        rows.push_back(std::move(row));
    }
    doc["entries"] = std::move(rows);
    return doc.dump();
}

}  // namespace updown
