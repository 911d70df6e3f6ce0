#pragma once

#include "updown/chain.hpp"
#include "updown/rational.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace updown::sep {

/// 50 significant decimal digits.
using Float = boost::multiprecision::cpp_bin_float_50;

/// Exact sizes up to this bound use rational arithmetic for the discrete closed forms.
inline constexpr int kExactSizeLimit = 30;
/// A float evaluation whose error bound exceeds this fraction of its value is rejected.
inline constexpr double kRelativeErrorBudget = 1e-9;

/// max over z with Q(z) > 0 of 1 - P(z)/Q(z). Throws if Q has no positive entry.
Rational sep(std::span<const Rational> p, std::span<const Rational> q);

/// max over r, s with M_n(s) > 0 of 1 - T_n^m(r, s) / M_n(s). Requires p in (0, 1).
Rational sepdist_bruteforce(const ChainSpec& spec, int n, int m);
/// The same for m = 0 .. m_max, sharing the matrix powers.
std::vector<Rational> sepdist_bruteforce_curve(const ChainSpec& spec, int n, int m_max);

/// 1 - T_n^m(r, s) / M_n(s) for one pair of states (the worst pair is r = identity,
/// s = reverse for permutations).
Rational separation_at(const ChainSpec& spec, int n, int m, const std::string& r, const std::string& s);

/// A float result with an absolute error bound and the method that produced it.
struct Evaluation {
    Float value = 0;
    Float err_bound = 0;
    std::string method;
    /// Set when the exact rational is available.
    std::optional<Rational> exact;
};

/// prod_{j != i, 1 <= j <= n-1} c_j / (c_j - c_i) for i = 1..n-1, exactly.
/// `rates` holds c_1 .. c_n. Throws InvalidArgument on repeated or non-positive rates.
std::vector<Rational> lagrange_weights(std::span<const Rational> rates);

/// Delta_n(m) = sum_i (1 - c_i/c_n)^m w_i with the weights above. Exact when n <= kExactSizeLimit.
Evaluation sepdist_formula_generic(std::span<const Rational> rates, long m);
/// Exact rational version of the generic formula (any n).
Rational sepdist_formula_exact(std::span<const Rational> rates, long m);

/// Permutation/graph rates c_k = k(k+1) with coefficients
/// (-1)^{j-1} (2j+1) (n-1)! n! / ((n-1-j)! (n+j)!).
Rational perm_coefficient(int n, int j);
Evaluation sepdist_perm(int n, long m);
/// Rates c_1 .. c_n = k(k+1).
std::vector<Rational> perm_rates(int n);

/// Delta*_n(t) = sum_i e^{-c_i t} w_i.
Evaluation sepdist_formula_continuous(std::span<const Rational> rates, const Float& t);

/// Delta_F(t) = sum_{j >= 1} (-1)^{j-1} (2j+1) e^{-t j(j+1)}, truncated once terms fall
/// below 1e-18 relative to the running value. Requires t > 0.
Float sepdist_limit(const Float& t);

/// prod_{j >= 1} (1 - e^{-2jt})^3 = e^{t/4} eta(it/pi)^3 = 1 - Delta_F(t). Requires t > 0.
Float one_minus_limit_product(const Float& t);

/// Dedekind eta on the imaginary axis: eta(it/pi) = e^{-t/12} prod_j (1 - e^{-2jt}).
Float dedekind_eta(const Float& t);

/// |(1 - Delta_F(t)) - e^{-pi^2/4t + t/4} (pi/t)^{3/2} (1 - Delta_F(pi^2/t))|.
Float symmetry_residual(const Float& t);

/// (1 - Delta_F(t)) / (e^{-pi^2/4t} (pi/t)^{3/2}) - 1.
Float small_t_relative_error(const Float& t);

/// Delta_F(t) / (3 e^{-2t}) - 1.
Float large_t_relative_error(const Float& t);

struct SepCurve {
    std::string mode;  // discrete | continuous | limit
    int n = 0;
    std::string p;
    std::vector<std::string> abscissae;
    std::vector<Evaluation> values;
    /// Optional extra columns (e.g. eta residuals), same length as values.
    std::vector<std::string> extra_names;
    std::vector<std::vector<Float>> extra;
};

/// CSV with columns mode,n,p,abscissa,value,method,err_bound followed by extra columns.
void write_csv(std::ostream& out, const SepCurve& curve);

/// Shortest round-trip decimal form of a float value (17 significant digits).
std::string format(const Float& x, int digits = 17);

}  // namespace updown::sep
