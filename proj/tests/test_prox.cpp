#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "splitkit/prox.hpp"
#include "splitkit/rng.hpp"

using namespace splitkit;

namespace {

DenseVector vec(std::initializer_list<double> v) {
    DenseVector x(Eigen::Index(v.size()));
    Eigen::Index i = 0;
    for (double d : v) x(i++) = d;
    return x;
}

DenseVector random_vec(int n, Rng& rng) {
    DenseVector x(n);
    for (int i = 0; i < n; ++i) x(i) = rng.normal();
    return x;
}

}  // namespace

TEST_CASE("soft threshold hand grid") {
    const DenseVector y = soft_threshold(vec({3, -2, 0.5, 0, -0.2}), 1.0);
    CHECK(y(0) == 2.0);
    CHECK(y(1) == -1.0);
    CHECK(y(2) == 0.0);
    CHECK(y(3) == 0.0);
    CHECK(y(4) == 0.0);
    CHECK(soft_threshold(vec({5}), 0.0)(0) == 5.0);
    CHECK_THROWS_AS(soft_threshold(vec({1}), -0.1), std::invalid_argument);
}

TEST_CASE("soft threshold is firmly nonexpansive") {
    Rng rng(3);
    for (int t = 0; t < 200; ++t) {
        const DenseVector a = random_vec(6, rng), b = random_vec(6, rng);
        const double tau = std::abs(rng.normal());
        const DenseVector pa = soft_threshold(a, tau), pb = soft_threshold(b, tau);
        CHECK((pa - pb).squaredNorm() <= (pa - pb).dot(a - b) + 1e-12);
        CHECK((pa - pb).norm() <= (a - b).norm() + 1e-12);
    }
}

TEST_CASE("generalized quadratic prox vs dense-inverse oracle") {
    Rng rng(8);
    for (int t = 0; t < 20; ++t) {
        const int n = 5, m = 4;
        DenseMatrix H(m, n);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j) H(i, j) = rng.normal();
        DenseMatrix R(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) R(i, j) = rng.normal();
        const DenseMatrix Lambda = R.transpose() * R + DenseMatrix::Identity(n, n);
        const DenseVector gv = random_vec(n, rng), b = random_vec(m, rng);

        const DenseVector x = prox_generalized_quadratic(Lambda, gv, H, b, 1.0);
        const DenseMatrix S = H.transpose() * H + Lambda;
        const DenseVector oracle = S.inverse() * (H.transpose() * b + gv);
        CHECK((x - oracle).norm() <= 1e-10 * std::max(1.0, oracle.norm()));
        // First-order optimality of the prox objective.
        CHECK((S * x - (H.transpose() * b + gv)).norm() <= 1e-9);
    }
}

TEST_CASE("epsilon audit hand example") {
    // f(x) = x^2, x = 1, w = 2.2, probes {0, 2}:
    // y=0: 1 + 2.2*(-1) - 0 = -1.2; y=2: 1 + 2.2 - 4 = -0.8; bound = 0.
    auto fn = [](const DenseVector& y) { return y(0) * y(0); };
    const double bound = epsilon_audit(fn, vec({1}), vec({2.2}), {vec({0}), vec({2})});
    CHECK(bound == 0.0);
    // A probe exposing the gap: y = 1.1 gives 1 + 0.22 - 1.21 = 0.01.
    const double bound2 =
        epsilon_audit(fn, vec({1}), vec({2.2}), {vec({0}), vec({2}), vec({1.1})});
    CHECK(bound2 == doctest::Approx(0.01).epsilon(1e-12));
}

TEST_CASE("exact proxes audit to zero") {
    Rng rng(17);
    // Soft threshold: w = lambda (v - z) is a true subgradient of gamma||.||_1.
    for (int t = 0; t < 50; ++t) {
        const int n = 6;
        const DenseVector v = random_vec(n, rng);
        const double gamma = 0.3, lambda = 1.7;
        const DenseVector z = soft_threshold(v, gamma / lambda);
        const DenseVector w = lambda * (v - z);
        auto l1 = [gamma](const DenseVector& y) { return gamma * y.lpNorm<1>(); };
        Rng prng{std::uint64_t(100 + t)};
        CHECK(epsilon_audit(l1, z, w, default_probes(z, prng, 100, 2.0)) <= 1e-9);
    }
    // Quadratic prox: w = gamma_vec - Lambda x is a true gradient of g at x.
    for (int t = 0; t < 20; ++t) {
        const int n = 4, m = 3;
        DenseMatrix H(m, n);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j) H(i, j) = rng.normal();
        const DenseMatrix Lambda = 2.0 * DenseMatrix::Identity(n, n);
        const DenseVector gv = random_vec(n, rng), b = random_vec(m, rng);
        const DenseVector x = prox_generalized_quadratic(Lambda, gv, H, b, 1.0);
        const DenseVector w = gv - Lambda * x;
        auto g = [&](const DenseVector& y) { return 0.5 * (H * y - b).squaredNorm(); };
        Rng prng{std::uint64_t(200 + t)};
        CHECK(epsilon_audit(g, x, w, default_probes(x, prng, 100, 2.0)) <= 1e-9);
    }
}

TEST_CASE("prox subgradient check") {
    Rng rng(4);
    const double tau = 0.7;
    auto q = [tau](const DenseVector& y) { return tau * y.lpNorm<1>(); };
    for (int t = 0; t < 100; ++t) {
        const DenseVector x = random_vec(5, rng);
        const DenseVector xp = soft_threshold(x, tau);
        Rng prng{std::uint64_t(t)};
        CHECK(prox_subgradient_check(q, x, xp, default_probes(xp, prng, 50, 2.0), 1e-9));
        // A corrupted prox point fails: probing the exact prox point exposes it.
        DenseVector bad = xp;
        bad(0) += 0.5;
        auto probes = default_probes(bad, prng, 50, 2.0);
        probes.push_back(xp);
        CHECK_FALSE(prox_subgradient_check(q, x, bad, probes, 1e-9));
    }
}

TEST_CASE("error model schedules") {
    ErrorModel m;
    CHECK(m.target_at(5) == 0.0);  // None
    m.kind = ErrorModel::Kind::Deterministic;
    m.epsilon0 = 1e-2;
    m.schedule = ErrorModel::Schedule::Constant;
    CHECK(m.target_at(3) == 1e-2);
    m.schedule = ErrorModel::Schedule::OverK;
    CHECK(m.target_at(4) == doctest::Approx(2.5e-3).epsilon(1e-15));
    m.schedule = ErrorModel::Schedule::OverKSquared;
    CHECK(m.target_at(4) == doctest::Approx(6.25e-4).epsilon(1e-15));
    m.kind = ErrorModel::Kind::Stochastic;
    CHECK(m.target_at(4) == 1e-2);  // stationary bound
}

TEST_CASE("inject_error keeps the audited slack within budget") {
    Rng rng(12);
    const double gamma = 0.4, lambda = 1.0;
    for (int t = 0; t < 25; ++t) {
        const DenseVector v = random_vec(6, rng);
        const DenseVector exact = soft_threshold(v, gamma / lambda);
        auto l1 = [gamma](const DenseVector& y) { return gamma * y.lpNorm<1>(); };
        auto w = [&v, lambda](const DenseVector& pt) -> DenseVector {
            return lambda * (v - pt);
        };
        Rng prng{std::uint64_t(t)};
        EpsilonAuditContext ctx(l1, w, default_probes(exact, prng, 100, 2.0));

        ErrorModel model;
        model.kind = ErrorModel::Kind::Deterministic;
        model.epsilon0 = 1e-3;
        Rng erng{std::uint64_t(50 + t)};
        const ProxResult res = inject_error(exact, model, t + 1, erng, &ctx);
        const DenseVector rebuilt = exact + res.r;
        CHECK((res.point - rebuilt).norm() == 0.0);
        CHECK(ctx.slack(res.point) <= model.epsilon0 + 1e-15);
        CHECK(res.epsilon <= model.epsilon0 + 1e-15);
    }
    // k = 0 and kind None are no-ops.
    ErrorModel none;
    Rng erng(1);
    const DenseVector x0 = vec({1, 2});
    const ProxResult r0 = inject_error(x0, none, 3, erng, nullptr);
    CHECK(r0.r.norm() == 0.0);
    CHECK(r0.epsilon == 0.0);
}

TEST_CASE("default probes are seeded and counted") {
    Rng a(5), b(5);
    const DenseVector c = vec({0, 0, 0});
    const auto p1 = default_probes(c, a, 7, 1.0);
    const auto p2 = default_probes(c, b, 7, 1.0);
    REQUIRE(p1.size() == 7);
    for (std::size_t i = 0; i < 7; ++i) CHECK((p1[i] - p2[i]).norm() == 0.0);
}
