#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdint>
#include <vector>

#include "splitkit/fixedpoint.hpp"
#include "splitkit/rng.hpp"

using namespace splitkit;

namespace {

const QFormat kQ168;  // Q16.8, wrap, truncate (defaults)

QFormat q168_sat() { return QFormat(16, 8, Overflow::Saturate); }

}  // namespace

TEST_CASE("format parse and validation") {
    const QFormat f = QFormat::parse("Q16.8");
    CHECK(f.int_bits == 16);
    CHECK(f.frac_bits == 8);
    CHECK(f.word_bits == 24);
    CHECK(f.to_string() == "Q16.8");
    CHECK(QFormat::parse("Q4.0").word_bits == 4);
    CHECK_THROWS_AS(QFormat::parse("16.8"), std::invalid_argument);
    CHECK_THROWS_AS(QFormat::parse("Q16.8x"), std::invalid_argument);
    CHECK_THROWS_AS(QFormat(30, 10), std::invalid_argument);  // word > 32
    CHECK_THROWS_AS(QFormat(0, 8), std::invalid_argument);
}

TEST_CASE("representable range") {
    // [-2^(int_bits-1), 2^(int_bits-1) - 2^-frac_bits]
    CHECK(kQ168.value_min() == -32768.0);
    CHECK(kQ168.value_max() == 32767.99609375);
    CHECK(kQ168.resolution() == 1.0 / 256.0);
}

TEST_CASE("encode examples") {
    CHECK(q_encode(1.5, kQ168).raw == 384);  // 1.5 * 2^8
    CHECK(q_encode(0.0, kQ168).raw == 0);
    CHECK(q_encode(40000.0, q168_sat()).to_double() == 32767.99609375);
    CHECK(q_encode(-1e9, q168_sat()).to_double() == -32768.0);
    CHECK_THROWS_AS(q_encode(std::nan(""), kQ168), std::invalid_argument);
}

TEST_CASE("encode truncates toward negative infinity") {
    // -0.001 * 256 = -0.256 -> floor -1 -> value -2^-8
    CHECK(q_encode(-0.001, kQ168).raw == -1);
    CHECK(q_encode(0.001, kQ168).raw == 0);
}

TEST_CASE("add and mul examples") {
    const QScalar a = q_encode(1.25, kQ168), b = q_encode(2.5, kQ168);
    CHECK(q_add(a, b).to_double() == 3.75);

    const QScalar eps = q_encode(0.00390625, kQ168);  // 2^-8
    CHECK(q_mul(eps, eps).to_double() == 0.0);  // 2^-16 truncates off the grid

    CHECK(q_mul(q_encode(-3.0, kQ168), q_encode(2.0, kQ168)).to_double() == -6.0);
    CHECK(q_sub(a, b).to_double() == -1.25);
    CHECK(q_neg(a).to_double() == -1.25);
}

TEST_CASE("format mismatch is a usage error") {
    const QScalar a = q_encode(1.0, kQ168);
    const QScalar b = q_encode(1.0, QFormat(8, 8));
    CHECK_THROWS_AS(q_add(a, b), std::invalid_argument);
    CHECK_THROWS_AS(q_mul(a, b), std::invalid_argument);
}

TEST_CASE("round to nearest even reduction") {
    const QFormat f(16, 8, Overflow::Wrap, Quantize::RoundToNearestEven);
    // raw 1 * raw 128 = wide 128: tie between 0 and 1 -> even 0.
    const QScalar tie0 = q_mul(QScalar(1, f), QScalar(128, f));
    CHECK(tie0.raw == 0);
    // raw 3 * raw 128 = wide 384: tie between 1 and 2 -> even 2.
    const QScalar tie2 = q_mul(QScalar(3, f), QScalar(128, f));
    CHECK(tie2.raw == 2);
    // raw 1 * raw 129 = wide 129: nearest is 1 (rem above half).
    CHECK(q_mul(QScalar(1, f), QScalar(129, f)).raw == 1);
}

TEST_CASE("wrap semantics match two's-complement modulo") {
    // value_max + 2^-8 wraps to value_min.
    const QScalar top = q_encode(kQ168.value_max(), kQ168);
    const QScalar one = QScalar(1, kQ168);
    const QScalar wrapped = q_add(top, one);
    CHECK(wrapped.to_double() == kQ168.value_min());

    // Oracle: exact result modulo 2^word_bits, reinterpreted.
    Rng rng(11);
    for (int t = 0; t < 200; ++t) {
        const std::int64_t ra = std::int64_t(rng.integer(1 << 24)) - (1 << 23);
        const std::int64_t rb = std::int64_t(rng.integer(1 << 24)) - (1 << 23);
        const QScalar s = q_add(QScalar(std::int32_t(ra), kQ168),
                                QScalar(std::int32_t(rb), kQ168));
        std::int64_t expect = (ra + rb) % (1 << 24);
        if (expect >= (1 << 23)) expect -= (1 << 24);
        if (expect < -(1 << 23)) expect += (1 << 24);
        CHECK(s.raw == expect);
    }
}

TEST_CASE("saturate output always in range") {
    const QFormat f = q168_sat();
    Rng rng(5);
    for (int t = 0; t < 500; ++t) {
        const QScalar a(std::int32_t(rng.integer(1 << 24)) - (1 << 23), f);
        const QScalar b(std::int32_t(rng.integer(1 << 24)) - (1 << 23), f);
        for (const QScalar& r : {q_add(a, b), q_sub(a, b), q_mul(a, b), q_neg(a)}) {
            CHECK(r.raw >= f.raw_min());
            CHECK(r.raw <= f.raw_max());
        }
    }
}

TEST_CASE("grid-exactness against a rational oracle") {
    // All values are raw * 2^-8; exact integer arithmetic on raws is the
    // oracle whenever the result stays on the grid and in range.
    Rng rng(21);
    for (int t = 0; t < 500; ++t) {
        const std::int64_t ra = std::int64_t(rng.integer(2001)) - 1000;
        const std::int64_t rb = std::int64_t(rng.integer(2001)) - 1000;
        const QScalar a(std::int32_t(ra), kQ168), b(std::int32_t(rb), kQ168);
        CHECK(q_add(a, b).raw == ra + rb);
        // Product on the grid: (ra*rb) divisible by 256.
        if (((ra * rb) % 256) == 0) CHECK(q_mul(a, b).raw == (ra * rb) / 256);
    }
}

TEST_CASE("additive identity") {
    Rng rng(3);
    const QScalar zero = q_encode(0.0, kQ168);
    for (int t = 0; t < 200; ++t) {
        const QScalar a(std::int32_t(rng.integer(1 << 24)) - (1 << 23), kQ168);
        CHECK(q_add(a, zero).raw == a.raw);
    }
}

TEST_CASE("matvec examples and bit determinism") {
    auto enc = [](double x) { return q_encode(x, kQ168); };
    // identity * v = v
    std::vector<QScalar> I2 = {enc(1), enc(0), enc(0), enc(1)};
    std::vector<QScalar> v = {enc(1.5), enc(2.25)};
    auto y = q_matvec(I2, 2, 2, v);
    CHECK(y[0].raw == v[0].raw);
    CHECK(y[1].raw == v[1].raw);

    std::vector<QScalar> Z2 = {enc(0), enc(0), enc(0), enc(0)};
    y = q_matvec(Z2, 2, 2, v);
    CHECK(y[0].raw == 0);
    CHECK(y[1].raw == 0);

    std::vector<QScalar> ones = {enc(1), enc(1), enc(1), enc(1)};
    y = q_matvec(ones, 2, 2, v);
    CHECK(y[0].to_double() == 3.75);
    CHECK(y[1].to_double() == 3.75);

    // Bit-for-bit reproducibility of the left-to-right accumulation order.
    Rng rng(99);
    std::vector<QScalar> M, w;
    for (int i = 0; i < 16; ++i)
        M.push_back(QScalar(std::int32_t(rng.integer(1 << 20)) - (1 << 19), kQ168));
    for (int i = 0; i < 4; ++i)
        w.push_back(QScalar(std::int32_t(rng.integer(1 << 20)) - (1 << 19), kQ168));
    const auto y1 = q_matvec(M, 4, 4, w);
    const auto y2 = q_matvec(M, 4, 4, w);
    for (int i = 0; i < 4; ++i) CHECK(y1[std::size_t(i)].raw == y2[std::size_t(i)].raw);

    CHECK_THROWS_AS(q_matvec(M, 4, 3, w), std::invalid_argument);
}
