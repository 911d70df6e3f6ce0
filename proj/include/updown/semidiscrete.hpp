#pragma once

#include "updown/perm.hpp"
#include "updown/rational.hpp"
#include "updown/rng.hpp"

#include <functional>
#include <string>
#include <vector>

namespace updown::semi {

/// (1 - eps) x for x <= s, (1 - eps) x + eps for x > s.
double phi_map(double s, double eps, double x);

/// One weighted piece of a measure on the unit square.
///   point:   mass at (x, y).
///   segment: uniform on the slope +-1 segment from (x, y) to (x + length, y + orientation * length).
///   box:     uniform on [x, x + width] x [y, y + height].
struct Atom {
    enum class Type { point, segment, box };
    Type type = Type::point;
    double weight = 0;
    double x = 0;
    double y = 0;
    double length = 0;
    int orientation = 1;
    double width = 0;
    double height = 0;
};

/// Finite mixture of atoms. `permuton` marks measures whose marginals should be uniform.
struct PermutonMeasure {
    std::vector<Atom> atoms;
    bool permuton = false;

    /// Uniform on the increasing diagonal.
    static PermutonMeasure diagonal();
    /// mu_sigma: mass 1/n uniformly on each square [(i-1)/n, i/n] x [(sigma(i)-1)/n, sigma(i)/n].
    static PermutonMeasure from_permutation(const perm::Permutation& sigma);

    double total_weight() const;
    /// Throws InvalidArgument unless weights are positive, sum to 1 (within 1e-9) and
    /// all atoms lie inside the unit square.
    void validate() const;

    /// One point drawn from the measure.
    std::pair<double, double> sample(Rng& rng) const;

    std::string to_json() const;
    static PermutonMeasure from_json(const std::string& text);

private:
    mutable std::vector<double> cumulative_;
};

enum class InflationDir { increasing, decreasing };

/// (1 - eps) (phi^{x0,eps}, phi^{y0,eps})_# mu + eps * (uniform on the chosen diagonal of the
/// square [(1-eps)x0, (1-eps)x0 + eps] x [(1-eps)y0, (1-eps)y0 + eps]).
/// Segments and boxes crossing x = x0 or y = y0 are split first; the piece with coordinate
/// exactly at the cut goes to the lower side ([a, s] then (s, b]).
PermutonMeasure inflate_measure(const PermutonMeasure& mu, double x0, double y0, double eps, InflationDir dir);

/// Inf^eps(mu): inflation at a mu-distributed point, increasing with probability p.
PermutonMeasure random_inflation(const PermutonMeasure& mu, const Rational& p, double eps, Rng& rng);

struct Estimate {
    double mean = 0;
    double stderr_ = 0;
};

/// Fraction of `samples` draws of |pi| i.i.d. points that form pi.
Estimate mc_pattern_density(const PermutonMeasure& mu, const perm::Permutation& pi, std::uint64_t samples, Rng& rng);

struct MarginalMoments {
    Estimate x1, x2, y1, y2;
};
/// First and second moments of both coordinates; uniform marginals give 1/2 and 1/3.
MarginalMoments mc_marginal_moments(const PermutonMeasure& mu, std::uint64_t samples, Rng& rng);

/// E[d_pi(Inf^eps(mu))] by direct simulation: per sample draw (X0, Y0) ~ mu and the direction,
/// then |pi| points from the inflated measure.
Estimate mc_inflated_density(const PermutonMeasure& mu, const perm::Permutation& pi, const Rational& p, double eps,
                             std::uint64_t samples, Rng& rng);

/// d_pi(mu_sigma) exactly: the probability that |pi| i.i.d. points of mu_sigma form pi.
/// Requires |pi| <= 6 and |sigma| <= 12.
Rational permuton_density_exact(const perm::Permutation& sigma, const perm::Permutation& pi);

/// Polynomial in eps with rational coefficients (coefficient i multiplies eps^i).
class EpsPolynomial {
public:
    EpsPolynomial() = default;
    explicit EpsPolynomial(std::vector<Rational> coefficients);

    const Rational& coefficient(std::size_t i) const;
    std::size_t degree() const;
    Rational operator()(const Rational& eps) const;
    double operator()(double eps) const;

    EpsPolynomial& operator+=(const EpsPolynomial& other);
    friend EpsPolynomial operator-(EpsPolynomial a, const Rational& c);
    friend EpsPolynomial operator*(const Rational& c, EpsPolynomial a);
    friend EpsPolynomial operator*(const EpsPolynomial& a, const EpsPolynomial& b);
    friend bool operator==(const EpsPolynomial&, const EpsPolynomial&) = default;

    std::string to_string() const;

private:
    void trim();
    std::vector<Rational> coeffs_;
};

using DensityOracle = std::function<Rational(const perm::Permutation&)>;

/// The expansion
///   (1-eps)^k d_pi + sum_{m=1}^{k} C(k,m) (1-eps)^{k-m} eps^m / (k-m+1)
///                     * (p sum_{I_m(pi)} d_tau + (1-p) sum_{D_m(pi)} d_tau)
/// with d_tau supplied by `density`. Throws InvalidArgument if `density` is empty.
EpsPolynomial inf_eps_expected_density(const perm::Permutation& pi, const Rational& p, const DensityOracle& density);

/// Same expansion evaluated at eps with Monte Carlo density inputs for mu; the error bar
/// propagates the independent per-tau standard errors.
Estimate inf_eps_expected_density_mc(const PermutonMeasure& mu, const perm::Permutation& pi, const Rational& p, double eps,
                                     std::uint64_t samples_per_pattern, Rng& rng);

/// 2 eps^{-2} (E[d_pi(Inf^eps(mu_sigma))] - d_pi(mu_sigma)), exactly.
Rational generator_eps(const perm::Permutation& sigma, const perm::Permutation& pi, const Rational& p, const Rational& eps);

struct GeneratorReport {
    std::string sigma;
    std::string pi;
    Rational p;
    Rational density;
    /// Coefficients of E[d_pi(Inf^eps)] - d_pi in eps^0, eps^1, eps^2.
    Rational c0, c1, c2;
    /// lim_{eps -> 0} A_eps d_pi = 2 c2.
    Rational limit;
    /// k(k-1)(-d_pi + sum_tau U(tau, pi) d_tau), with U from the exact up kernel.
    Rational expected;
    EpsPolynomial difference;
    bool holds() const { return c0 == 0 && c1 == 0 && limit == expected; }
};

/// Symbolic check of the generator limit at mu = mu_sigma.
GeneratorReport generator_limit_check(const perm::Permutation& sigma, const perm::Permutation& pi, const Rational& p);

}  // namespace updown::semi
