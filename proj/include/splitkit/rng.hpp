#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace splitkit {

// Seeded stream built on mt19937_64 with hand-rolled transforms, so draws are
// identical across standard libraries and platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // Uniform in [0, 1).
    double uniform() {
        return double(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller (no cached second value; keeps the
    // stream position a pure function of call count).
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    std::uint64_t integer(std::uint64_t n) {  // uniform in [0, n)
        // Rejection sampling to avoid modulo bias.
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v = gen_();
        while (v >= limit) v = gen_();
        return v % n;
    }

    std::vector<double> normal_vector(int n) {
        std::vector<double> v(static_cast<std::size_t>(n));
        for (auto& x : v) x = normal();
        return v;
    }

    // Uniform direction on the unit sphere in R^n.
    std::vector<double> unit_direction(int n) {
        std::vector<double> v = normal_vector(n);
        double s = 0.0;
        for (double x : v) s += x * x;
        s = std::sqrt(s);
        if (s == 0.0) { v[0] = 1.0; s = 1.0; }
        for (auto& x : v) x /= s;
        return v;
    }

    // Uniform in the ball of given radius.
    std::vector<double> ball(int n, double radius) {
        std::vector<double> v = unit_direction(n);
        const double r = radius * std::pow(uniform(), 1.0 / double(n));
        for (auto& x : v) x *= r;
        return v;
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace splitkit
