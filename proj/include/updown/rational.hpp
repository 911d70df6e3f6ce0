#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace updown {

/// Exact rational number. GMP keeps results of arithmetic in canonical form
/// (positive denominator, coprime numerator/denominator).
using Rational = mpq_class;
using Integer = mpz_class;

/// Parses "a/b", "a" or a finite decimal literal such as "0.25" exactly.
/// Throws InvalidArgument on malformed input or a zero denominator.
Rational parse_rational(std::string_view text);

/// Parses only the "a/b" or integer forms; decimals are rejected.
Rational parse_rational_strict(std::string_view text);

std::string to_string(const Rational& q);

/// Terminating decimal ("0.05") when the denominator divides a power of ten, else "a/b".
std::string to_decimal_string(const Rational& q);

double to_double(const Rational& q);

Integer floor(const Rational& q);

Rational pow(const Rational& base, unsigned long exponent);

Integer binomial(unsigned long n, unsigned long k);
Integer factorial(unsigned long n);

/// Dense row-major matrix of rationals.
class RationalMatrix {
public:
    RationalMatrix() = default;
    RationalMatrix(std::size_t rows, std::size_t cols);

    static RationalMatrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    Rational& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const Rational& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<const Rational> row(std::size_t r) const {
        return {data_.data() + r * cols_, cols_};
    }

    friend bool operator==(const RationalMatrix& a, const RationalMatrix& b);

    RationalMatrix operator+(const RationalMatrix& other) const;
    RationalMatrix operator-(const RationalMatrix& other) const;
    RationalMatrix operator*(const RationalMatrix& other) const;
    RationalMatrix scaled(const Rational& factor) const;

    /// (M f)(x) = sum_y M(x, y) f(y): the matrix acting on a function of the column states.
    std::vector<Rational> apply(std::span<const Rational> f) const;

    /// (v M)(y) = sum_x v(x) M(x, y): a row vector (measure) pushed through the matrix.
    std::vector<Rational> left_apply(std::span<const Rational> v) const;

    std::size_t nonzeros() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Rational> data_;
};

/// Rank of the span of the given vectors (all of equal length), by exact elimination.
std::size_t rank(const std::vector<std::vector<Rational>>& vectors);

/// Integer matrix together with a common denominator, so that M = numerators / denominator.
/// Powers of row-stochastic kernels are computed in this form to avoid gcd work.
struct ScaledIntegerMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<Integer> numerators;
    Integer denominator = 1;

    static ScaledIntegerMatrix from(const RationalMatrix& m);

    const Integer& at(std::size_t r, std::size_t c) const { return numerators[r * cols + c]; }

    /// this * other, denominators multiply.
    ScaledIntegerMatrix times(const ScaledIntegerMatrix& other) const;
};

}  // namespace updown
