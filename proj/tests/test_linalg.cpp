#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>

#include "splitkit/linalg.hpp"
#include "splitkit/rng.hpp"

using namespace splitkit;

namespace {

DenseMatrix random_matrix(int r, int c, Rng& rng) {
    DenseMatrix M(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) M(i, j) = rng.normal();
    return M;
}

DenseMatrix random_orthogonal(int n, Rng& rng) {
    return Eigen::HouseholderQR<DenseMatrix>(random_matrix(n, n, rng))
        .householderQ();
}

}  // namespace

TEST_CASE("cholesky examples") {
    CHECK((cholesky_factor(DenseMatrix::Identity(3, 3)) -
           DenseMatrix::Identity(3, 3)).norm() == 0.0);

    DenseMatrix D(2, 2);
    D << 4, 0, 0, 9;
    DenseMatrix G = cholesky_factor(D);
    CHECK(G(0, 0) == 2.0);
    CHECK(G(1, 1) == 3.0);
    CHECK(G(0, 1) == 0.0);

    Rng rng(1);
    const DenseMatrix R = random_matrix(5, 5, rng);
    const DenseMatrix S = R.transpose() * R + DenseMatrix::Identity(5, 5);
    const DenseMatrix G5 = cholesky_factor(S);
    CHECK((G5 * G5.transpose() - S).norm() / S.norm() <= 1e-12);
    // Refactor the product: same 1e-12 relative residual contract.
    const DenseMatrix G6 = cholesky_factor(G5 * G5.transpose());
    CHECK((G6 * G6.transpose() - S).norm() / S.norm() <= 1e-12);
}

TEST_CASE("cholesky rejects non-PD") {
    DenseMatrix Ind(2, 2);
    Ind << 1, 2, 2, 1;  // eigenvalues 3, -1
    CHECK_THROWS_AS(cholesky_factor(Ind), NotPositiveDefinite);
    CHECK_THROWS_AS(cholesky_factor(DenseMatrix::Zero(2, 2)), NotPositiveDefinite);
}

TEST_CASE("symmetric eigen extremes") {
    auto [a, b] = sym_eig_extremes(DenseMatrix::Identity(4, 4));
    CHECK(a == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(b == doctest::Approx(1.0).epsilon(1e-12));

    DenseMatrix D = DenseMatrix::Zero(3, 3);
    D.diagonal() << 2, 5, 11;
    auto [dmin, dmax] = sym_eig_extremes(D);
    CHECK(dmin == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(dmax == doctest::Approx(11.0).epsilon(1e-12));

    // Known spectrum under a random orthogonal similarity.
    Rng rng(7);
    const DenseMatrix Q = random_orthogonal(6, rng);
    DenseMatrix Spec = DenseMatrix::Zero(6, 6);
    Spec.diagonal() << -3.5, -1, 0.25, 2, 7, 42;
    const DenseMatrix S = Q.transpose() * Spec * Q;
    auto [smin, smax] = sym_eig_extremes(0.5 * (S + S.transpose()));
    CHECK(smin == doctest::Approx(-3.5).epsilon(1e-10));
    CHECK(smax == doctest::Approx(42.0).epsilon(1e-10));

    CHECK_THROWS_AS(sym_eig_extremes(DenseMatrix::Zero(2, 3)), std::invalid_argument);
}

TEST_CASE("condition number") {
    CHECK(condition_number(DenseMatrix::Identity(3, 3)) ==
          doctest::Approx(1.0).epsilon(1e-12));
    DenseMatrix D(2, 2);
    D << 1, 0, 0, 100;
    CHECK(condition_number(D) == doctest::Approx(100.0).epsilon(1e-12));

    // Scale invariance rho(cS) = rho(S).
    Rng rng(3);
    const DenseMatrix R = random_matrix(4, 4, rng);
    const DenseMatrix S = R.transpose() * R + DenseMatrix::Identity(4, 4);
    const double r1 = condition_number(S), r2 = condition_number(17.5 * S);
    CHECK(r1 == doctest::Approx(r2).epsilon(1e-12));

    DenseMatrix neg(2, 2);
    neg << 1, 0, 0, -1;
    CHECK_THROWS_AS(condition_number(neg), NotPositiveDefinite);
}

TEST_CASE("lyapunov-like solve") {
    // -2P = -2 -> P = 1
    DenseMatrix M1(1, 1), Q1(1, 1);
    M1 << -1;
    Q1 << 2;
    CHECK(solve_lyapunov_like(M1, Q1)(0, 0) == doctest::Approx(1.0).epsilon(1e-14));

    DenseMatrix M2 = DenseMatrix::Zero(2, 2);
    M2.diagonal() << -1, -2;
    const DenseMatrix P2 = solve_lyapunov_like(M2, DenseMatrix::Identity(2, 2));
    CHECK(P2(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(P2(1, 1) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(P2(0, 1) == doctest::Approx(0.0).epsilon(1e-14));

    // Random stable Mlhs: residual and exact symmetry.
    Rng rng(9);
    for (int t = 0; t < 5; ++t) {
        const DenseMatrix R = random_matrix(5, 5, rng);
        const DenseMatrix M = -(R.transpose() * R) - DenseMatrix::Identity(5, 5) +
                              0.3 * (random_matrix(5, 5, rng) -
                                     random_matrix(5, 5, rng).transpose());
        const DenseMatrix P = solve_lyapunov_like(M, DenseMatrix::Identity(5, 5));
        CHECK((P * M + M.transpose() * P + DenseMatrix::Identity(5, 5)).norm() <= 1e-9);
        CHECK((P - P.transpose()).norm() == 0.0);
    }

    // Skew Mlhs: eigenvalue pairs sum to zero.
    DenseMatrix Skew(2, 2);
    Skew << 0, 1, -1, 0;
    CHECK_THROWS_AS(solve_lyapunov_like(Skew, DenseMatrix::Identity(2, 2)),
                    NoUniqueSolution);
}

TEST_CASE("matrix CSV and JSON round trips") {
    Rng rng(4);
    const DenseMatrix M = random_matrix(3, 4, rng);
    const std::string path = "test_linalg_io.csv";
    save_matrix_csv(path, M);
    const DenseMatrix M2 = load_matrix_csv(path);
    CHECK((M - M2).norm() == 0.0);
    std::remove(path.c_str());

    const DenseMatrix M3 = matrix_from_json(matrix_to_json(M));
    CHECK((M - M3).norm() == 0.0);
}
