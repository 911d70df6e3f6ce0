#include "updown/rational.hpp"

#include "updown/error.hpp"

#include <algorithm>
#include <cctype>
#include <utility>

namespace updown {

namespace {

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

Integer parse_integer(std::string_view s, std::string_view whole) {
    bool negative = false;
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
        negative = s.front() == '-';
        s.remove_prefix(1);
    }
    if (!all_digits(s)) {
        throw InvalidArgument("malformed rational '" + std::string(whole) + "'");
    }
    Integer z(std::string(s), 10);
    return negative ? Integer(-z) : z;
}

}  // namespace

Rational parse_rational_strict(std::string_view text) {
    const auto slash = text.find('/');
    if (slash == std::string_view::npos) {
        return Rational(parse_integer(text, text));
    }
    Integer num = parse_integer(text.substr(0, slash), text);
    std::string_view den_text = text.substr(slash + 1);
    if (!all_digits(den_text)) {
        throw InvalidArgument("malformed rational '" + std::string(text) + "'");
    }
    Integer den(std::string(den_text), 10);
    if (den == 0) {
        throw InvalidArgument("zero denominator in '" + std::string(text) + "'");
    }
    Rational q(num, den);
    q.canonicalize();
    return q;
}

Rational parse_rational(std::string_view text) {
    const auto dot = text.find('.');
    if (dot == std::string_view::npos) {
        return parse_rational_strict(text);
    }
    std::string_view int_part = text.substr(0, dot);
    std::string_view frac_part = text.substr(dot + 1);
    bool negative = false;
    if (!int_part.empty() && (int_part.front() == '-' || int_part.front() == '+')) {
        negative = int_part.front() == '-';
        int_part.remove_prefix(1);
    }
    if ((int_part.empty() && frac_part.empty()) || (!int_part.empty() && !all_digits(int_part)) ||
        (!frac_part.empty() && !all_digits(frac_part))) {
        throw InvalidArgument("malformed decimal '" + std::string(text) + "'");
    }
    std::string digits = std::string(int_part) + std::string(frac_part);
    Integer num(digits.empty() ? std::string("0") : digits, 10);
    Integer den;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, frac_part.size());
    Rational q(negative ? Integer(-num) : num, den);
    q.canonicalize();
    return q;
}

std::string to_string(const Rational& q) {
    return q.get_str(10);
}

std::string to_decimal_string(const Rational& q) {
    Integer den = q.get_den();
    unsigned long twos = 0;
    unsigned long fives = 0;
    while (mpz_divisible_ui_p(den.get_mpz_t(), 2)) {
        den /= 2;
        ++twos;
    }
    while (mpz_divisible_ui_p(den.get_mpz_t(), 5)) {
        den /= 5;
        ++fives;
    }
    if (den != 1) return to_string(q);
    const unsigned long digits = std::max(twos, fives);
    if (digits == 0) return to_string(q);
    Integer scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, digits);
    const Integer scaled = q.get_num() * (scale / q.get_den());
    Integer mag = abs(scaled);
    std::string body = mag.get_str(10);
    if (body.size() <= digits) body = std::string(digits + 1 - body.size(), '0') + body;
    body.insert(body.size() - digits, ".");
    return (sgn(scaled) < 0 ? "-" : "") + body;
}

double to_double(const Rational& q) {
    return q.get_d();
}

Integer floor(const Rational& q) {
    Integer result;
    mpz_fdiv_q(result.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return result;
}

Rational pow(const Rational& base, unsigned long exponent) {
    Rational result;
    mpz_pow_ui(result.get_num_mpz_t(), base.get_num_mpz_t(), exponent);
    mpz_pow_ui(result.get_den_mpz_t(), base.get_den_mpz_t(), exponent);
    // Powers of coprime pairs stay coprime; only the sign needs care.
    result.canonicalize();
    return result;
}

Integer binomial(unsigned long n, unsigned long k) {
    Integer r;
    mpz_bin_uiui(r.get_mpz_t(), n, k);
    return r;
}

Integer factorial(unsigned long n) {
    Integer r;
    mpz_fac_ui(r.get_mpz_t(), n);
    return r;
}

RationalMatrix::RationalMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols) {}

RationalMatrix RationalMatrix::identity(std::size_t n) {
    RationalMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
    return m;
}

bool operator==(const RationalMatrix& a, const RationalMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
}

RationalMatrix RationalMatrix::operator+(const RationalMatrix& other) const {
    if (rows_ != other.rows_ || cols_ != other.cols_) {
        throw InvalidArgument("matrix shape mismatch in addition");
    }
    RationalMatrix out(rows_, cols_);
    for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] = data_[i] + other.data_[i];
    return out;
}

RationalMatrix RationalMatrix::operator-(const RationalMatrix& other) const {
    if (rows_ != other.rows_ || cols_ != other.cols_) {
        throw InvalidArgument("matrix shape mismatch in subtraction");
    }
    RationalMatrix out(rows_, cols_);
    for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] = data_[i] - other.data_[i];
    return out;
}

RationalMatrix RationalMatrix::operator*(const RationalMatrix& other) const {
    if (cols_ != other.rows_) {
        throw InvalidArgument("matrix shape mismatch in product");
    }
    RationalMatrix out(rows_, other.cols_);
    // Kernels are sparse in practice; skipping zero entries of the left factor
    // keeps the dense layout affordable.
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t k = 0; k < cols_; ++k) {
            const Rational& a = (*this)(i, k);
            if (sgn(a) == 0) continue;
            for (std::size_t j = 0; j < other.cols_; ++j) {
                const Rational& b = other(k, j);
                if (sgn(b) == 0) continue;
                out(i, j) += a * b;
            }
        }
    }
    return out;
}

RationalMatrix RationalMatrix::scaled(const Rational& factor) const {
    RationalMatrix out(rows_, cols_);
    for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] = data_[i] * factor;
    return out;
}

std::vector<Rational> RationalMatrix::apply(std::span<const Rational> f) const {
    if (f.size() != cols_) throw InvalidArgument("vector length mismatch in apply");
    std::vector<Rational> out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < cols_; ++j) {
            const Rational& a = (*this)(i, j);
            if (sgn(a) != 0 && sgn(f[j]) != 0) out[i] += a * f[j];
        }
    }
    return out;
}

std::vector<Rational> RationalMatrix::left_apply(std::span<const Rational> v) const {
    if (v.size() != rows_) throw InvalidArgument("vector length mismatch in left_apply");
    std::vector<Rational> out(cols_);
    for (std::size_t i = 0; i < rows_; ++i) {
        if (sgn(v[i]) == 0) continue;
        for (std::size_t j = 0; j < cols_; ++j) {
            const Rational& a = (*this)(i, j);
            if (sgn(a) != 0) out[j] += v[i] * a;
        }
    }
    return out;
}

std::size_t RationalMatrix::nonzeros() const {
    return static_cast<std::size_t>(
        std::count_if(data_.begin(), data_.end(), [](const Rational& q) { return sgn(q) != 0; }));
}

std::size_t rank(const std::vector<std::vector<Rational>>& vectors) {
    if (vectors.empty()) return 0;
    const std::size_t dim = vectors.front().size();
    std::vector<std::vector<Rational>> rows = vectors;
    std::size_t r = 0;
    for (std::size_t col = 0; col < dim && r < rows.size(); ++col) {
        std::size_t pivot = r;
        while (pivot < rows.size() && sgn(rows[pivot][col]) == 0) ++pivot;
        if (pivot == rows.size()) continue;
        std::swap(rows[r], rows[pivot]);
        const Rational inv = 1 / rows[r][col];
        for (std::size_t j = col; j < dim; ++j) rows[r][j] *= inv;
        for (std::size_t i = r + 1; i < rows.size(); ++i) {
            if (sgn(rows[i][col]) == 0) continue;
            const Rational factor = rows[i][col];
            for (std::size_t j = col; j < dim; ++j) {
                if (sgn(rows[r][j]) != 0) rows[i][j] -= factor * rows[r][j];
            }
        }
        ++r;
    }
    return r;
}

ScaledIntegerMatrix ScaledIntegerMatrix::from(const RationalMatrix& m) {
    ScaledIntegerMatrix out;
    out.rows = m.rows();
    out.cols = m.cols();
    Integer lcm = 1;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (const Rational& q : m.row(i)) {
            mpz_lcm(lcm.get_mpz_t(), lcm.get_mpz_t(), q.get_den_mpz_t());
        }
    }
    out.denominator = lcm;
    out.numerators.resize(out.rows * out.cols);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            const Rational& q = m(i, j);
            out.numerators[i * out.cols + j] = q.get_num() * (lcm / q.get_den());
        }
    }
    return out;
}

ScaledIntegerMatrix ScaledIntegerMatrix::times(const ScaledIntegerMatrix& other) const {
    if (cols != other.rows) throw InvalidArgument("matrix shape mismatch in product");
    ScaledIntegerMatrix out;
    out.rows = rows;
    out.cols = other.cols;
    out.denominator = denominator * other.denominator;
    out.numerators.resize(out.rows * out.cols);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t k = 0; k < cols; ++k) {
            const Integer& a = at(i, k);
            if (sgn(a) == 0) continue;
            for (std::size_t j = 0; j < other.cols; ++j) {
                const Integer& b = other.at(k, j);
                if (sgn(b) == 0) continue;
                mpz_addmul(out.numerators[i * out.cols + j].get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
            }
        }
    }
    return out;
}

}  // namespace updown
