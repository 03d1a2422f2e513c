#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace splitkit {

// Signed fixed-point emulation. A QFormat describes a two's-complement word
// of word_bits = int_bits + frac_bits; int_bits includes the sign bit.
// Real value of a raw word r is r * 2^-frac_bits.

enum class Overflow { Wrap, Saturate };
enum class Quantize { TruncateTowardNegInfinity, RoundToNearestEven };

struct QFormat {
    int word_bits = 24;
    int int_bits = 16;
    int frac_bits = 8;
    Overflow overflow = Overflow::Wrap;
    Quantize quantize = Quantize::TruncateTowardNegInfinity;

    QFormat() = default;
    QFormat(int ib, int fb, Overflow o = Overflow::Wrap,
            Quantize q = Quantize::TruncateTowardNegInfinity)
        : word_bits(ib + fb), int_bits(ib), frac_bits(fb), overflow(o), quantize(q) {
        validate();
    }

    void validate() const {
        if (int_bits < 1 || frac_bits < 0 || word_bits != int_bits + frac_bits)
            throw std::invalid_argument("QFormat: word_bits must equal int_bits + frac_bits");
        if (word_bits > 32)
            throw std::invalid_argument("QFormat: word_bits > 32 not supported");
    }

    std::int64_t raw_min() const { return -(std::int64_t(1) << (word_bits - 1)); }
    std::int64_t raw_max() const { return (std::int64_t(1) << (word_bits - 1)) - 1; }
    double resolution() const { return std::ldexp(1.0, -frac_bits); }
    double value_min() const { return double(raw_min()) * resolution(); }
    double value_max() const { return double(raw_max()) * resolution(); }

    bool same_as(const QFormat& o) const {
        return word_bits == o.word_bits && int_bits == o.int_bits &&
               frac_bits == o.frac_bits && overflow == o.overflow && quantize == o.quantize;
    }

    std::string to_string() const;

    // Accepts "Q16.8"; word length is int_bits + frac_bits.
    static QFormat parse(const std::string& s,
                         Overflow o = Overflow::Wrap,
                         Quantize q = Quantize::TruncateTowardNegInfinity);
};

namespace detail {

// Round an exact value expressed as an integer scaled by 2^shift down to the
// target grid (drop `shift` fraction bits).
inline std::int64_t reduce_raw(std::int64_t wide, int shift, Quantize q) {
    if (shift == 0) return wide;
    const std::int64_t floor_q = wide >> shift;  // arithmetic shift: floor
    if (q == Quantize::TruncateTowardNegInfinity) return floor_q;
    const std::int64_t rem = wide - (floor_q << shift);  // in [0, 2^shift)
    const std::int64_t half = std::int64_t(1) << (shift - 1);
    if (rem > half) return floor_q + 1;
    if (rem < half) return floor_q;
    return floor_q + (floor_q & 1);  // ties to even
}

inline std::int64_t apply_overflow(std::int64_t raw, const QFormat& f) {
    if (raw >= f.raw_min() && raw <= f.raw_max()) return raw;
    if (f.overflow == Overflow::Saturate)
        return raw < f.raw_min() ? f.raw_min() : f.raw_max();
    // Wrap: keep low word_bits, sign-extend.
    const std::uint64_t mask = (f.word_bits == 64)
        ? ~std::uint64_t(0) : ((std::uint64_t(1) << f.word_bits) - 1);
    std::uint64_t u = std::uint64_t(raw) & mask;
    const std::uint64_t sign = std::uint64_t(1) << (f.word_bits - 1);
    if (u & sign) u |= ~mask;
    return std::int64_t(u);
}

}  // namespace detail

struct QScalar {
    std::int32_t raw = 0;
    QFormat fmt;

    QScalar() = default;
    QScalar(std::int32_t r, const QFormat& f) : raw(r), fmt(f) {}

    double to_double() const { return double(raw) * fmt.resolution(); }
};

inline QScalar q_encode(double x, const QFormat& fmt) {
    if (!std::isfinite(x))
        throw std::invalid_argument("q_encode: non-finite input");
    const double scaled = std::ldexp(x, fmt.frac_bits);
    double q;
    if (fmt.quantize == Quantize::TruncateTowardNegInfinity) {
        q = std::floor(scaled);
    } else {
        q = std::nearbyint(scaled);  // default FP mode: ties to even
    }
    // Keep the exact quantized integer out of double trouble for big inputs.
    std::int64_t raw = (std::abs(q) < 9.0e18) ? std::int64_t(q)
                                              : (q < 0 ? INT64_MIN / 4 : INT64_MAX / 4);
    return QScalar(std::int32_t(detail::apply_overflow(raw, fmt)), fmt);
}

inline void check_same_format(const QScalar& a, const QScalar& b) {
    if (!a.fmt.same_as(b.fmt))
        throw std::invalid_argument("QScalar: format mismatch");
}

inline QScalar q_add(const QScalar& a, const QScalar& b) {
    check_same_format(a, b);
    const std::int64_t sum = std::int64_t(a.raw) + std::int64_t(b.raw);
    return QScalar(std::int32_t(detail::apply_overflow(sum, a.fmt)), a.fmt);
}

inline QScalar q_sub(const QScalar& a, const QScalar& b) {
    check_same_format(a, b);
    const std::int64_t diff = std::int64_t(a.raw) - std::int64_t(b.raw);
    return QScalar(std::int32_t(detail::apply_overflow(diff, a.fmt)), a.fmt);
}

inline QScalar q_neg(const QScalar& a) {
    const std::int64_t n = -std::int64_t(a.raw);
    return QScalar(std::int32_t(detail::apply_overflow(n, a.fmt)), a.fmt);
}

// Exact 2*word_bits intermediate, then quantize back to the format's grid.
inline QScalar q_mul(const QScalar& a, const QScalar& b) {
    check_same_format(a, b);
    const std::int64_t wide = std::int64_t(a.raw) * std::int64_t(b.raw);
    const std::int64_t reduced = detail::reduce_raw(wide, a.fmt.frac_bits, a.fmt.quantize);
    return QScalar(std::int32_t(detail::apply_overflow(reduced, a.fmt)), a.fmt);
}

// Dot products accumulate strictly left to right so results are reproducible
// bit for bit across runs and platforms.
inline std::vector<QScalar> q_matvec(const std::vector<QScalar>& M, int rows, int cols,
                                     const std::vector<QScalar>& v) {
    if (int(v.size()) != cols || int(M.size()) != rows * cols)
        throw std::invalid_argument("q_matvec: dimension mismatch");
    if (cols == 0) throw std::invalid_argument("q_matvec: empty matrix");
    std::vector<QScalar> y;
    y.reserve(rows);
    for (int i = 0; i < rows; ++i) {
        QScalar acc(0, M[0].fmt);
        for (int j = 0; j < cols; ++j)
            acc = q_add(acc, q_mul(M[std::size_t(i) * cols + j], v[j]));
        y.push_back(acc);
    }
    return y;
}

}  // namespace splitkit
