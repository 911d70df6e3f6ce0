#include "updown/semidiscrete.hpp"

#include "updown/error.hpp"
#include "updown/instances.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

namespace updown::semi {

namespace {

constexpr double kSupportSlack = 1e-12;

void require_eps(double eps) {
    if (!(eps > 0 && eps < 1)) throw InvalidArgument("eps must lie in (0, 1)");
}

void require_unit(double v, const char* what) {
    if (!(v >= 0 && v <= 1)) throw InvalidArgument(std::string(what) + " must lie in [0, 1]");
}

// Affine part of phi on one side of the cut.
double shift(double eps, bool above, double v) {
    return (1 - eps) * v + (above ? eps : 0.0);
}

// Map one atom through (phi^{x0}, phi^{y0}) after splitting it at the cut lines.
void push_forward(const Atom& a, double x0, double y0, double eps, double scale, std::vector<Atom>& out) {
    switch (a.type) {
        case Atom::Type::point: {
            Atom b = a;
            b.weight = a.weight * scale;
            b.x = phi_map(x0, eps, a.x);
            b.y = phi_map(y0, eps, a.y);
            out.push_back(b);
            return;
        }
        case Atom::Type::segment: {
            // Parameter u in [0, L]: (x + u, y + o u). Cuts where x + u = x0 or y + o u = y0.
            std::vector<double> cuts{0.0, a.length};
            const double ux = x0 - a.x;
            const double uy = (y0 - a.y) * a.orientation;
            for (double u : {ux, uy}) {
                if (u > 0 && u < a.length) cuts.push_back(u);
            }
            std::sort(cuts.begin(), cuts.end());
            cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
            for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
                const double lo = cuts[i];
                const double hi = cuts[i + 1];
                const double mid = 0.5 * (lo + hi);
                const bool right = a.x + mid > x0;
                const bool up = a.y + a.orientation * mid > y0;
                Atom b = a;
                b.weight = a.weight * scale * (hi - lo) / a.length;
                b.length = (1 - eps) * (hi - lo);
                b.x = shift(eps, right, a.x + lo);
                b.y = shift(eps, up, a.y + a.orientation * lo);
                out.push_back(b);
            }
            return;
        }
        case Atom::Type::box: {
            auto pieces = [](double start, double size, double cut) {
                std::vector<std::pair<double, double>> p;
                if (cut > start && cut < start + size) {
                    p.emplace_back(start, cut - start);
                    p.emplace_back(cut, start + size - cut);
                } else {
                    p.emplace_back(start, size);
                }
                return p;
            };
            for (const auto& [xs, w] : pieces(a.x, a.width, x0)) {
                for (const auto& [ys, h] : pieces(a.y, a.height, y0)) {
                    Atom b = a;
                    b.weight = a.weight * scale * (w * h) / (a.width * a.height);
                    b.x = shift(eps, xs + 0.5 * w > x0, xs);
                    b.y = shift(eps, ys + 0.5 * h > y0, ys);
                    b.width = (1 - eps) * w;
                    b.height = (1 - eps) * h;
                    out.push_back(b);
                }
            }
            return;
        }
    }
}

Atom inserted_diagonal(double x0, double y0, double eps, InflationDir dir) {
    Atom d;
    d.type = Atom::Type::segment;
    d.weight = eps;
    d.length = eps;
    d.x = (1 - eps) * x0;
    if (dir == InflationDir::increasing) {
        d.y = (1 - eps) * y0;
        d.orientation = 1;
    } else {
        d.y = (1 - eps) * y0 + eps;
        d.orientation = -1;
    }
    return d;
}

std::pair<double, double> sample_atom(const Atom& a, Rng& rng) {
    switch (a.type) {
        case Atom::Type::point:
            return {a.x, a.y};
        case Atom::Type::segment: {
            const double u = rng.uniform01() * a.length;
            return {a.x + u, a.y + a.orientation * u};
        }
        case Atom::Type::box:
            return {a.x + rng.uniform01() * a.width, a.y + rng.uniform01() * a.height};
    }
    return {0, 0};
}

// Pattern formed by points sorted by x (ties broken by draw order).
bool forms(std::vector<std::pair<double, double>>& pts, const perm::Permutation& pi) {
    std::stable_sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<double> ys;
    for (const auto& q : pts) ys.push_back(q.second);
    return perm::standardize(ys) == pi;
}

Estimate bernoulli_estimate(std::uint64_t hits, std::uint64_t samples) {
    const double n = static_cast<double>(samples);
    const double mean = static_cast<double>(hits) / n;
    return {mean, std::sqrt(mean * (1 - mean) / n)};
}

Estimate moment_estimate(double sum, double sum_sq, std::uint64_t samples) {
    const double n = static_cast<double>(samples);
    const double mean = sum / n;
    const double var = samples > 1 ? (sum_sq - n * mean * mean) / (n - 1) : 0.0;
    return {mean, std::sqrt(std::max(var, 0.0) / n)};
}

EpsPolynomial one_minus_eps_power(unsigned long e) {
    std::vector<Rational> c;
    for (unsigned long i = 0; i <= e; ++i) {
        Rational b(binomial(e, i));
        c.push_back(i % 2 == 0 ? b : Rational(-b));
    }
    return EpsPolynomial(std::move(c));
}

EpsPolynomial monomial(std::size_t power) {
    std::vector<Rational> c(power + 1);
    c[power] = 1;
    return EpsPolynomial(std::move(c));
}

}  // namespace

double phi_map(double s, double eps, double x) {
    require_unit(s, "s");
    require_unit(x, "x");
    require_eps(eps);
    return x <= s ? (1 - eps) * x : (1 - eps) * x + eps;
}

PermutonMeasure PermutonMeasure::diagonal() {
    PermutonMeasure m;
    Atom a;
    a.type = Atom::Type::segment;
    a.weight = 1;
    a.length = 1;
    m.atoms.push_back(a);
    m.permuton = true;
    return m;
}

PermutonMeasure PermutonMeasure::from_permutation(const perm::Permutation& sigma) {
    if (sigma.size() < 1) throw InvalidArgument("mu_sigma needs a nonempty permutation");
    PermutonMeasure m;
    const double n = sigma.size();
    for (int i = 1; i <= sigma.size(); ++i) {
        Atom a;
        a.type = Atom::Type::box;
        a.weight = 1 / n;
        a.x = (i - 1) / n;
        a.y = (sigma(i) - 1) / n;
        a.width = 1 / n;
        a.height = 1 / n;
        m.atoms.push_back(a);
    }
    m.permuton = true;
    return m;
}

double PermutonMeasure::total_weight() const {
    double s = 0;
    for (const Atom& a : atoms) s += a.weight;
    return s;
}

void PermutonMeasure::validate() const {
    if (atoms.empty()) throw InvalidArgument("measure has no atoms");
    auto inside = [](double v) { return v >= -kSupportSlack && v <= 1 + kSupportSlack; };
    for (const Atom& a : atoms) {
        if (!(a.weight > 0)) throw InvalidArgument("atom weights must be positive");
        bool ok = inside(a.x) && inside(a.y);
        if (a.type == Atom::Type::segment) {
            ok = ok && a.length > 0 && (a.orientation == 1 || a.orientation == -1) && inside(a.x + a.length) &&
                 inside(a.y + a.orientation * a.length);
        } else if (a.type == Atom::Type::box) {
            ok = ok && a.width > 0 && a.height > 0 && inside(a.x + a.width) && inside(a.y + a.height);
        }
        if (!ok) throw InvalidArgument("atom outside the unit square or degenerate");
    }
    if (std::abs(total_weight() - 1) > 1e-9) throw InvalidArgument("weights must sum to 1");
}

std::pair<double, double> PermutonMeasure::sample(Rng& rng) const {
    if (cumulative_.size() != atoms.size()) {
        cumulative_.clear();
        double s = 0;
        for (const Atom& a : atoms) cumulative_.push_back(s += a.weight);
    }
    const double u = rng.uniform01() * cumulative_.back();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), atoms.size() - 1);
    return sample_atom(atoms[i], rng);
}

std::string PermutonMeasure::to_json() const {
    nlohmann::ordered_json j;
    j["permuton"] = permuton;
    j["atoms"] = nlohmann::ordered_json::array();
    for (const Atom& a : atoms) {
        nlohmann::ordered_json e;
        switch (a.type) {
            case Atom::Type::point:
                e["type"] = "point";
                break;
            case Atom::Type::segment:
                e["type"] = "segment";
                break;
            case Atom::Type::box:
                e["type"] = "box";
                break;
        }
        e["weight"] = a.weight;
        e["coords"] = {a.x, a.y};
        if (a.type == Atom::Type::segment) {
            e["length"] = a.length;
            e["orientation"] = a.orientation == 1 ? "increasing" : "decreasing";
        } else if (a.type == Atom::Type::box) {
            e["size"] = {a.width, a.height};
        }
        j["atoms"].push_back(e);
    }
    return j.dump();
}

PermutonMeasure PermutonMeasure::from_json(const std::string& text) {
    PermutonMeasure m;
    try {
        const nlohmann::json j = nlohmann::json::parse(text);
        m.permuton = j.value("permuton", false);
        for (const auto& e : j.at("atoms")) {
            Atom a;
            const std::string type = e.at("type").get<std::string>();
            a.weight = e.at("weight").get<double>();
            a.x = e.at("coords").at(0).get<double>();
            a.y = e.at("coords").at(1).get<double>();
            if (type == "point") {
                a.type = Atom::Type::point;
            } else if (type == "segment") {
                a.type = Atom::Type::segment;
                a.length = e.at("length").get<double>();
                const std::string o = e.at("orientation").get<std::string>();
                if (o != "increasing" && o != "decreasing") throw InvalidArgument("segment orientation must be increasing or decreasing");
                a.orientation = o == "increasing" ? 1 : -1;
            } else if (type == "box") {
                a.type = Atom::Type::box;
                a.width = e.at("size").at(0).get<double>();
                a.height = e.at("size").at(1).get<double>();
            } else {
                throw InvalidArgument("unknown atom type '" + type + "'");
            }
            m.atoms.push_back(a);
        }
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("measure JSON: ") + e.what());
    }
    m.validate();
    return m;
}

PermutonMeasure inflate_measure(const PermutonMeasure& mu, double x0, double y0, double eps, InflationDir dir) {
    require_unit(x0, "x0");
    require_unit(y0, "y0");
    require_eps(eps);
    PermutonMeasure out;
    out.permuton = mu.permuton;
    for (const Atom& a : mu.atoms) push_forward(a, x0, y0, eps, 1 - eps, out.atoms);
    out.atoms.push_back(inserted_diagonal(x0, y0, eps, dir));
    return out;
}

PermutonMeasure random_inflation(const PermutonMeasure& mu, const Rational& p, double eps, Rng& rng) {
    const auto [x0, y0] = mu.sample(rng);
    const InflationDir dir = rng.bernoulli(p) ? InflationDir::increasing : InflationDir::decreasing;
    return inflate_measure(mu, std::clamp(x0, 0.0, 1.0), std::clamp(y0, 0.0, 1.0), eps, dir);
}

Estimate mc_pattern_density(const PermutonMeasure& mu, const perm::Permutation& pi, std::uint64_t samples, Rng& rng) {
    if (samples == 0) throw InvalidArgument("sample count must be positive");
    std::uint64_t hits = 0;
    std::vector<std::pair<double, double>> pts;
    for (std::uint64_t s = 0; s < samples; ++s) {
        pts.clear();
        for (int i = 0; i < pi.size(); ++i) pts.push_back(mu.sample(rng));
        if (forms(pts, pi)) ++hits;
    }
    return bernoulli_estimate(hits, samples);
}

MarginalMoments mc_marginal_moments(const PermutonMeasure& mu, std::uint64_t samples, Rng& rng) {
    if (samples == 0) throw InvalidArgument("sample count must be positive");
    double sx = 0, sxx = 0, sy = 0, syy = 0, sx2x2 = 0, sy2y2 = 0;
    for (std::uint64_t s = 0; s < samples; ++s) {
        const auto [x, y] = mu.sample(rng);
        sx += x;
        sxx += x * x;
        sx2x2 += x * x * x * x;
        sy += y;
        syy += y * y;
        sy2y2 += y * y * y * y;
    }
    return {moment_estimate(sx, sxx, samples), moment_estimate(sxx, sx2x2, samples), moment_estimate(sy, syy, samples),
            moment_estimate(syy, sy2y2, samples)};
}

Estimate mc_inflated_density(const PermutonMeasure& mu, const perm::Permutation& pi, const Rational& p, double eps,
                             std::uint64_t samples, Rng& rng) {
    require_eps(eps);
    if (samples == 0) throw InvalidArgument("sample count must be positive");
    std::uint64_t hits = 0;
    std::vector<std::pair<double, double>> pts;
    for (std::uint64_t s = 0; s < samples; ++s) {
        const auto [sx, sy] = mu.sample(rng);
        const double x0 = std::clamp(sx, 0.0, 1.0);
        const double y0 = std::clamp(sy, 0.0, 1.0);
        const bool up = rng.bernoulli(p);
        const Atom diag = inserted_diagonal(x0, y0, eps, up ? InflationDir::increasing : InflationDir::decreasing);
        pts.clear();
        for (int i = 0; i < pi.size(); ++i) {
            if (rng.uniform01() < eps) {
                pts.push_back(sample_atom(diag, rng));
            } else {
                const auto [x, y] = mu.sample(rng);
                pts.emplace_back(phi_map(x0, eps, std::clamp(x, 0.0, 1.0)), phi_map(y0, eps, std::clamp(y, 0.0, 1.0)));
            }
        }
        if (forms(pts, pi)) ++hits;
    }
    return bernoulli_estimate(hits, samples);
}

Rational permuton_density_exact(const perm::Permutation& sigma, const perm::Permutation& pi) {
    const int n = sigma.size();
    const int k = pi.size();
    if (k > 6) throw InvalidArgument("exact permuton densities support |pi| <= 6");
    if (n > 12) throw InvalidArgument("exact permuton densities support |sigma| <= 12");
    if (n < 1 || k < 1) throw InvalidArgument("empty permutation");
    // blocks[r] = block of the r-th point from the left; nondecreasing. A sequence with block
    // multiplicities m_b has probability k!/prod m_b! / n^k, and the within-block y orders match
    // pi with probability 1/prod m_b!. Scaled by k!, each term is the squared multinomial.
    std::vector<int> blocks(static_cast<std::size_t>(k), 1);
    std::uint64_t kfact = 1;
    for (int i = 2; i <= k; ++i) kfact *= static_cast<std::uint64_t>(i);
    std::uint64_t scaled = 0;
    for (;;) {
        bool consistent = true;
        for (int r = 0; r < k && consistent; ++r) {
            for (int s = r + 1; s < k && consistent; ++s) {
                const int br = blocks[static_cast<std::size_t>(r)];
                const int bs = blocks[static_cast<std::size_t>(s)];
                if (br != bs) consistent = (pi(r + 1) < pi(s + 1)) == (sigma(br) < sigma(bs));
            }
        }
        if (consistent) {
            std::uint64_t multinomial = kfact;
            for (int r = 0; r < k;) {
                int s = r;
                while (s < k && blocks[static_cast<std::size_t>(s)] == blocks[static_cast<std::size_t>(r)]) ++s;
                for (int i = 2; i <= s - r; ++i) multinomial /= static_cast<std::uint64_t>(i);
                r = s;
            }
            scaled += multinomial * multinomial;
        }
        int pos = k - 1;
        while (pos >= 0 && blocks[static_cast<std::size_t>(pos)] == n) --pos;
        if (pos < 0) break;
        const int v = blocks[static_cast<std::size_t>(pos)] + 1;
        for (int r = pos; r < k; ++r) blocks[static_cast<std::size_t>(r)] = v;
    }
    Integer denom;
    mpz_pow_ui(denom.get_mpz_t(), Integer(n).get_mpz_t(), static_cast<unsigned long>(k));
    denom *= static_cast<unsigned long>(kfact);
    Rational result(Integer(static_cast<unsigned long>(scaled)), denom);
    result.canonicalize();
    return result;
}

EpsPolynomial::EpsPolynomial(std::vector<Rational> coefficients) : coeffs_(std::move(coefficients)) {
    for (Rational& c : coeffs_) c.canonicalize();
    trim();
}

void EpsPolynomial::trim() {
    while (!coeffs_.empty() && coeffs_.back() == 0) coeffs_.pop_back();
}

const Rational& EpsPolynomial::coefficient(std::size_t i) const {
    static const Rational zero = 0;
    return i < coeffs_.size() ? coeffs_[i] : zero;
}

std::size_t EpsPolynomial::degree() const {
    return coeffs_.empty() ? 0 : coeffs_.size() - 1;
}

Rational EpsPolynomial::operator()(const Rational& eps) const {
    Rational v = 0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) v = v * eps + *it;
    return v;
}

double EpsPolynomial::operator()(double eps) const {
    double v = 0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) v = v * eps + to_double(*it);
    return v;
}

EpsPolynomial& EpsPolynomial::operator+=(const EpsPolynomial& other) {
    if (coeffs_.size() < other.coeffs_.size()) coeffs_.resize(other.coeffs_.size());
    for (std::size_t i = 0; i < other.coeffs_.size(); ++i) coeffs_[i] += other.coeffs_[i];
    trim();
    return *this;
}

EpsPolynomial operator-(EpsPolynomial a, const Rational& c) {
    if (a.coeffs_.empty()) a.coeffs_.emplace_back(0);
    a.coeffs_[0] -= c;
    a.trim();
    return a;
}

EpsPolynomial operator*(const Rational& c, EpsPolynomial a) {
    for (Rational& x : a.coeffs_) x *= c;
    a.trim();
    return a;
}

EpsPolynomial operator*(const EpsPolynomial& a, const EpsPolynomial& b) {
    if (a.coeffs_.empty() || b.coeffs_.empty()) return {};
    std::vector<Rational> c(a.coeffs_.size() + b.coeffs_.size() - 1);
    for (std::size_t i = 0; i < a.coeffs_.size(); ++i) {
        for (std::size_t j = 0; j < b.coeffs_.size(); ++j) c[i + j] += a.coeffs_[i] * b.coeffs_[j];
    }
    return EpsPolynomial(std::move(c));
}

std::string EpsPolynomial::to_string() const {
    if (coeffs_.empty()) return "0";
    std::ostringstream out;
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
        if (coeffs_[i] == 0) continue;
        if (out.tellp() > 0) out << " + ";
        out << '(' << updown::to_string(coeffs_[i]) << ')';
        if (i >= 1) out << " eps";
        if (i >= 2) out << '^' << i;
    }
    return out.str();
}

EpsPolynomial inf_eps_expected_density(const perm::Permutation& pi, const Rational& p, const DensityOracle& density) {
    if (!density) throw InvalidArgument("missing density inputs");
    const int k = pi.size();
    if (k < 1) throw InvalidArgument("pattern must be nonempty");
    const auto uk = static_cast<unsigned long>(k);
    EpsPolynomial result = density(pi) * one_minus_eps_power(uk);
    for (int m = 1; m <= k; ++m) {
        const perm::RunInsertionSets sets = perm::run_insertion_sets(pi, m);
        Rational inc = 0;
        Rational dec = 0;
        for (const auto& r : sets.increasing) inc += density(r.tau);
        for (const auto& r : sets.decreasing) dec += density(r.tau);
        const Rational weight = Rational(binomial(uk, static_cast<unsigned long>(m))) / (k - m + 1);
        const Rational mix = p * inc + (1 - p) * dec;
        if (mix == 0) continue;
        result += (weight * mix) * (one_minus_eps_power(static_cast<unsigned long>(k - m)) * monomial(static_cast<std::size_t>(m)));
    }
    return result;
}

Estimate inf_eps_expected_density_mc(const PermutonMeasure& mu, const perm::Permutation& pi, const Rational& p, double eps,
                                     std::uint64_t samples_per_pattern, Rng& rng) {
    require_eps(eps);
    // Coefficient of each d_tau at this eps, collected per distinct tau.
    std::map<perm::Permutation, double> coeff;
    const int k = pi.size();
    const double pd = to_double(p);
    coeff[pi] += std::pow(1 - eps, k);
    for (int m = 1; m <= k; ++m) {
        const perm::RunInsertionSets sets = perm::run_insertion_sets(pi, m);
        const double w = to_double(Rational(binomial(static_cast<unsigned long>(k), static_cast<unsigned long>(m)))) / (k - m + 1) *
                         std::pow(1 - eps, k - m) * std::pow(eps, m);
        for (const auto& r : sets.increasing) coeff[r.tau] += w * pd;
        for (const auto& r : sets.decreasing) coeff[r.tau] += w * (1 - pd);
    }
    Estimate out;
    double var = 0;
    for (const auto& [tau, c] : coeff) {
        if (c == 0) continue;
        const Estimate d = tau.size() == 1 ? Estimate{1, 0} : mc_pattern_density(mu, tau, samples_per_pattern, rng);
        out.mean += c * d.mean;
        var += c * c * d.stderr_ * d.stderr_;
    }
    out.stderr_ = std::sqrt(var);
    return out;
}

Rational generator_eps(const perm::Permutation& sigma, const perm::Permutation& pi, const Rational& p, const Rational& eps) {
    if (eps <= 0 || eps >= 1) throw InvalidArgument("eps must lie in (0, 1)");
    const EpsPolynomial poly = inf_eps_expected_density(pi, p, [&](const perm::Permutation& tau) { return permuton_density_exact(sigma, tau); });
    return 2 * (poly(eps) - permuton_density_exact(sigma, pi)) / (eps * eps);
}

GeneratorReport generator_limit_check(const perm::Permutation& sigma, const perm::Permutation& pi, const Rational& p) {
    GeneratorReport r;
    r.sigma = sigma.encode();
    r.pi = pi.encode();
    r.p = p;
    auto density = [&](const perm::Permutation& tau) { return permuton_density_exact(sigma, tau); };
    r.density = density(pi);
    r.difference = inf_eps_expected_density(pi, p, density) - r.density;
    r.c0 = r.difference.coefficient(0);
    r.c1 = r.difference.coefficient(1);
    r.c2 = r.difference.coefficient(2);
    r.limit = 2 * r.c2;
    const int k = pi.size();
    if (k == 1) {
        r.expected = 0;
        return r;
    }
    const ChainSpec spec = perm_chain(p, std::max(k, 2));
    const StochKernel& up = build_up_kernel(spec, k - 1);
    const LevelSpace& from = enumerate_level(spec, k - 1);
    const LevelSpace& to = enumerate_level(spec, k);
    const std::size_t col = to.index(pi.encode());
    Rational sum = 0;
    for (std::size_t row = 0; row < from.size(); ++row) {
        const Rational& u = up.entries(row, col);
        if (u != 0) sum += u * density(perm::Permutation::parse(from.states[row]));
    }
    r.expected = Rational(k * (k - 1)) * (sum - r.density);
    return r;
}

}  // namespace updown::semi
