#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "splitkit/fixedpoint.hpp"

namespace splitkit {

// Multiplies and adds count 1 flop each; comparisons and sign flips are free.
struct FlopCounter {
    std::uint64_t flops = 0;
    bool solves_allowed = true;   // tripped off for DFGPGD after setup
    std::uint64_t solve_events = 0;

    void add(std::uint64_t n) { flops += n; }
    void record_solve() {
        ++solve_events;
        if (!solves_allowed)
            throw std::logic_error("linear solve performed in a solve-free scheme");
    }
};

// Scalar arithmetic policies for the solver hot path. All per-iteration math
// goes through one of these so float64 and fixed-point runs share the same
// loop structure and accumulation order.
struct F64Arith {
    using S = double;
    S zero() const { return 0.0; }
    S encode(double x) const { return x; }
    double decode(S x) const { return x; }
    S add(S a, S b) const { return a + b; }
    S sub(S a, S b) const { return a - b; }
    S mul(S a, S b) const { return a * b; }
    S neg(S a) const { return -a; }
};

struct QArith {
    QFormat fmt;
    using S = QScalar;
    S zero() const { return QScalar(0, fmt); }
    S encode(double x) const { return q_encode(x, fmt); }
    double decode(const S& x) const { return x.to_double(); }
    S add(const S& a, const S& b) const { return q_add(a, b); }
    S sub(const S& a, const S& b) const { return q_sub(a, b); }
    S mul(const S& a, const S& b) const { return q_mul(a, b); }
    S neg(const S& a) const { return q_neg(a); }
};

template <class S>
struct SMat {
    int rows = 0, cols = 0;
    std::vector<S> a;

    SMat() = default;
    SMat(int r, int c, const S& fill) : rows(r), cols(c), a(std::size_t(r) * c, fill) {}
    S& operator()(int i, int j) { return a[std::size_t(i) * cols + j]; }
    const S& operator()(int i, int j) const { return a[std::size_t(i) * cols + j]; }
};

// Row dot products accumulate left to right (index order); with QScalar this
// makes runs bit-reproducible.
template <class Ar>
std::vector<typename Ar::S> matvec(const Ar& ar, const SMat<typename Ar::S>& M,
                                   const std::vector<typename Ar::S>& v, FlopCounter& fc) {
    if (int(v.size()) != M.cols) throw std::invalid_argument("matvec: dimension mismatch");
    std::vector<typename Ar::S> y(std::size_t(M.rows), ar.zero());
    for (int i = 0; i < M.rows; ++i) {
        auto acc = ar.zero();
        for (int j = 0; j < M.cols; ++j)
            acc = ar.add(acc, ar.mul(M(i, j), v[j]));
        y[std::size_t(i)] = acc;
    }
    fc.add(2ull * M.rows * M.cols);
    return y;
}

template <class Ar>
std::vector<typename Ar::S> vadd(const Ar& ar, const std::vector<typename Ar::S>& a,
                                 const std::vector<typename Ar::S>& b, FlopCounter& fc) {
    if (a.size() != b.size()) throw std::invalid_argument("vadd: dimension mismatch");
    std::vector<typename Ar::S> y(a.size(), ar.zero());
    for (std::size_t i = 0; i < a.size(); ++i) y[i] = ar.add(a[i], b[i]);
    fc.add(a.size());
    return y;
}

template <class Ar>
std::vector<typename Ar::S> vsub(const Ar& ar, const std::vector<typename Ar::S>& a,
                                 const std::vector<typename Ar::S>& b, FlopCounter& fc) {
    if (a.size() != b.size()) throw std::invalid_argument("vsub: dimension mismatch");
    std::vector<typename Ar::S> y(a.size(), ar.zero());
    for (std::size_t i = 0; i < a.size(); ++i) y[i] = ar.sub(a[i], b[i]);
    fc.add(a.size());
    return y;
}

template <class Ar>
std::vector<typename Ar::S> vscale(const Ar& ar, const typename Ar::S& c,
                                   const std::vector<typename Ar::S>& a, FlopCounter& fc) {
    std::vector<typename Ar::S> y(a.size(), ar.zero());
    for (std::size_t i = 0; i < a.size(); ++i) y[i] = ar.mul(c, a[i]);
    fc.add(a.size());
    return y;
}

template <class Ar>
std::vector<typename Ar::S> vneg(const Ar& ar, const std::vector<typename Ar::S>& a) {
    std::vector<typename Ar::S> y(a.size(), ar.zero());
    for (std::size_t i = 0; i < a.size(); ++i) y[i] = ar.neg(a[i]);
    return y;  // sign flips are free
}

}  // namespace splitkit
