#include "updown/separation.hpp"

#include "updown/error.hpp"

#include <boost/math/constants/constants.hpp>

#include <limits>

namespace updown::sep {

namespace {

Float to_float(const Rational& q) {
    return Float(q.get_num().get_str()) / Float(q.get_den().get_str());
}

const Float& epsilon() {
    static const Float eps = std::numeric_limits<Float>::epsilon();
    return eps;
}

void check_budget(const Evaluation& e) {
    using boost::multiprecision::abs;
    if (e.value != 0 && e.err_bound > kRelativeErrorBudget * abs(e.value)) {
        throw PrecisionLoss("separation distance: error bound " + format(e.err_bound, 3) + " exceeds budget for value " +
                            format(e.value, 6));
    }
}

Evaluation from_exact(Rational q) {
    Evaluation e;
    e.value = to_float(q);
    e.err_bound = boost::multiprecision::abs(e.value) * epsilon();
    e.method = "exact-rational";
    e.exact = std::move(q);
    return e;
}

void require_open_p(const ChainSpec& spec) {
    if (spec.p() <= 0 || spec.p() >= 1) {
        throw InvalidArgument("separation distance needs p strictly between 0 and 1 (got " + to_string(spec.p()) + ")");
    }
}

}  // namespace

Rational sep(std::span<const Rational> p, std::span<const Rational> q) {
    if (p.size() != q.size()) throw InvalidArgument("sep: distributions have different supports");
    std::optional<Rational> best;
    for (std::size_t z = 0; z < q.size(); ++z) {
        if (q[z] <= 0) continue;
        Rational v = 1 - p[z] / q[z];
        if (!best || v > *best) best = std::move(v);
    }
    if (!best) throw InvalidArgument("sep: reference distribution is identically zero");
    return *best;
}

std::vector<Rational> sepdist_bruteforce_curve(const ChainSpec& spec, int n, int m_max) {
    require_open_p(spec);
    if (m_max < 0) throw InvalidArgument("step count must be >= 0");
    const std::vector<Rational> stat = stationary(spec, n);
    const ScaledIntegerMatrix t = ScaledIntegerMatrix::from(updown_operator(spec, n).entries);
    const std::size_t size = stat.size();
    ScaledIntegerMatrix power = ScaledIntegerMatrix::from(RationalMatrix::identity(size));
    std::vector<Rational> curve;
    for (int m = 0; m <= m_max; ++m) {
        if (m > 0) power = power.times(t);
        // 1 - P(r,s)/M(s) is largest where numerator(r,s)/M(s) is smallest.
        std::optional<Rational> smallest;
        for (std::size_t s = 0; s < size; ++s) {
            if (stat[s] <= 0) continue;
            for (std::size_t r = 0; r < size; ++r) {
                Rational ratio(power.at(r, s));
                ratio /= stat[s];
                if (!smallest || ratio < *smallest) smallest = std::move(ratio);
            }
        }
        curve.push_back(1 - *smallest / power.denominator);
    }
    return curve;
}

Rational sepdist_bruteforce(const ChainSpec& spec, int n, int m) {
    return sepdist_bruteforce_curve(spec, n, m).back();
}

Rational separation_at(const ChainSpec& spec, int n, int m, const std::string& r, const std::string& s) {
    require_open_p(spec);
    const LevelSpace& level = enumerate_level(spec, n);
    const RationalMatrix& t = updown_operator(spec, n).entries;
    std::vector<Rational> law(level.size());
    law[level.index(r)] = 1;
    for (int step = 0; step < m; ++step) law = t.left_apply(law);
    const std::size_t col = level.index(s);
    const Rational target = stationary(spec, n)[col];
    if (target <= 0) throw InvalidArgument("state '" + s + "' has zero stationary mass");
    return 1 - law[col] / target;
}

std::vector<Rational> lagrange_weights(std::span<const Rational> rates) {
    const std::size_t n = rates.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (rates[i] <= 0) throw InvalidArgument("rates must be positive");
        for (std::size_t j = 0; j < i; ++j) {
            if (rates[i] == rates[j]) throw InvalidArgument("rates must be pairwise distinct");
        }
    }
    std::vector<Rational> w;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        Rational prod = 1;
        for (std::size_t j = 0; j + 1 < n; ++j) {
            if (j != i) prod *= rates[j] / (rates[j] - rates[i]);
        }
        w.push_back(std::move(prod));
    }
    return w;
}

Rational sepdist_formula_exact(std::span<const Rational> rates, long m) {
    if (m < 0) throw InvalidArgument("step count must be >= 0");
    const std::vector<Rational> w = lagrange_weights(rates);
    Rational sum = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        sum += pow(1 - rates[i] / rates.back(), static_cast<unsigned long>(m)) * w[i];
    }
    return sum;
}

namespace {

Evaluation float_sum(const std::vector<Rational>& weights, const std::vector<Float>& factors, Float rounding,
                     std::string method) {
    using boost::multiprecision::abs;
    Evaluation e;
    e.method = std::move(method);
    Float magnitude = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const Float term = to_float(weights[i]) * factors[i];
        e.value += term;
        magnitude += abs(term);
    }
    // Each term carries a relative error of at most `rounding` ulps; summation adds one per term.
    e.err_bound = magnitude * epsilon() * (rounding + static_cast<double>(weights.size()));
    check_budget(e);
    return e;
}

}  // namespace

Evaluation sepdist_formula_generic(std::span<const Rational> rates, long m) {
    if (m < 0) throw InvalidArgument("step count must be >= 0");
    if (static_cast<int>(rates.size()) <= kExactSizeLimit) return from_exact(sepdist_formula_exact(rates, m));
    const std::vector<Rational> w = lagrange_weights(rates);
    std::vector<Float> factors;
    for (std::size_t i = 0; i < w.size(); ++i) {
        factors.push_back(boost::multiprecision::pow(to_float(1 - rates[i] / rates.back()), m));
    }
    return float_sum(w, factors, Float(2 * m + 4), "float50-lagrange");
}

Rational perm_coefficient(int n, int j) {
    if (j < 1 || j > n - 1) throw InvalidArgument("coefficient index must satisfy 1 <= j <= n-1");
    Rational c = Rational(Integer(2 * j + 1));
    // (n-1)!/(n-1-j)! * n!/(n+j)!
    for (int k = n - j; k <= n - 1; ++k) c *= k;
    for (int k = n + 1; k <= n + j; ++k) c /= k;
    return j % 2 == 1 ? c : Rational(-c);
}

std::vector<Rational> perm_rates(int n) {
    std::vector<Rational> rates;
    for (int k = 1; k <= n; ++k) rates.emplace_back(k * (k + 1));
    return rates;
}

Evaluation sepdist_perm(int n, long m) {
    if (n < 1) throw InvalidArgument("size must be >= 1");
    if (m < 0) throw InvalidArgument("step count must be >= 0");
    const Rational cn(n * (n + 1));
    std::vector<Rational> coeffs;
    std::vector<Rational> bases;
    for (int j = 1; j <= n - 1; ++j) {
        coeffs.push_back(perm_coefficient(n, j));
        bases.push_back(1 - Rational(j * (j + 1)) / cn);
    }
    if (n <= kExactSizeLimit) {
        Rational sum = 0;
        for (std::size_t i = 0; i < coeffs.size(); ++i) sum += coeffs[i] * pow(bases[i], static_cast<unsigned long>(m));
        Evaluation e = from_exact(sum);
        e.method = "exact-closed-form";
        return e;
    }
    std::vector<Float> factors;
    for (const Rational& b : bases) factors.push_back(boost::multiprecision::pow(to_float(b), m));
    return float_sum(coeffs, factors, Float(2 * m + 4), "float50-closed-form");
}

Evaluation sepdist_formula_continuous(std::span<const Rational> rates, const Float& t) {
    if (t < 0) throw InvalidArgument("time must be >= 0");
    const std::vector<Rational> w = lagrange_weights(rates);
    std::vector<Float> factors;
    for (std::size_t i = 0; i < w.size(); ++i) factors.push_back(boost::multiprecision::exp(-to_float(rates[i]) * t));
    return float_sum(w, factors, Float(8), "float50-continuous");
}

Float sepdist_limit(const Float& t) {
    if (t <= 0) throw InvalidArgument("Delta_F needs t > 0");
    Float sum = 0;
    for (long j = 1;; ++j) {
        const Float term = Float(2 * j + 1) * boost::multiprecision::exp(-t * Float(j * (j + 1)));
        sum += (j % 2 == 1) ? term : Float(-term);
        if (term < Float("1e-18") * boost::multiprecision::abs(sum) && j > 1) break;
    }
    return sum;
}

Float one_minus_limit_product(const Float& t) {
    if (t <= 0) throw InvalidArgument("the eta product needs t > 0");
    Float prod = 1;
    const Float q = boost::multiprecision::exp(-2 * t);
    Float qj = q;
    while (qj > Float("1e-45")) {
        const Float f = 1 - qj;
        prod *= f * f * f;
        qj *= q;
    }
    return prod;
}

Float dedekind_eta(const Float& t) {
    if (t <= 0) throw InvalidArgument("eta needs t > 0");
    return boost::multiprecision::exp(-t / 12) * boost::multiprecision::cbrt(one_minus_limit_product(t));
}

Float symmetry_residual(const Float& t) {
    const Float pi = boost::math::constants::pi<Float>();
    const Float lhs = one_minus_limit_product(t);
    const Float rhs = boost::multiprecision::exp(-pi * pi / (4 * t) + t / 4) * boost::multiprecision::pow(pi / t, Float(1.5)) *
                      one_minus_limit_product(pi * pi / t);
    return boost::multiprecision::abs(lhs - rhs);
}

Float small_t_relative_error(const Float& t) {
    const Float pi = boost::math::constants::pi<Float>();
    const Float law = boost::multiprecision::exp(-pi * pi / (4 * t)) * boost::multiprecision::pow(pi / t, Float(1.5));
    return one_minus_limit_product(t) / law - 1;
}

Float large_t_relative_error(const Float& t) {
    return sepdist_limit(t) / (3 * boost::multiprecision::exp(-2 * t)) - 1;
}

std::string format(const Float& x, int digits) {
    return x.str(digits);
}

void write_csv(std::ostream& out, const SepCurve& curve) {
    out << "mode,n,p,abscissa,value,method,err_bound";
    for (const std::string& name : curve.extra_names) out << ',' << name;
    out << '\n';
    for (std::size_t i = 0; i < curve.values.size(); ++i) {
        const Evaluation& e = curve.values[i];
        out << curve.mode << ',' << curve.n << ',' << curve.p << ',' << curve.abscissae[i] << ','
            << (e.exact ? to_string(*e.exact) : format(e.value)) << ',' << e.method << ',' << format(e.err_bound, 3);
        for (const auto& column : curve.extra) out << ',' << format(column[i]);
        out << '\n';
    }
}

}  // namespace updown::sep
