#include <catch2/catch_amalgamated.hpp>

#include "psdp/core.hpp"
#include "psdp/linalg.hpp"
#include "psdp/rng.hpp"
#include "psdp/simplex.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

using namespace psdp;

TEST_CASE("matrix vector products") {
    Matrix a{{1.0, 2.0}, {3.0, 4.0}};
    CHECK(a.multiply(Vec{1.0, 1.0}) == Vec{3.0, 7.0});
    CHECK(a.transpose_multiply(Vec{1.0, 1.0}) == Vec{4.0, 6.0});
    CHECK_THROWS_AS(a.multiply(Vec{1.0, 2.0, 3.0}), ContractViolation);
}

TEST_CASE("lu solve recovers known solutions") {
    Matrix a{{2.0, 1.0}, {1.0, 3.0}};
    const Vec x = lu_solve(a, {5.0, 10.0});
    CHECK_THAT(x[0], Catch::Matchers::WithinAbs(1.0, 1e-12));
    CHECK_THAT(x[1], Catch::Matchers::WithinAbs(3.0, 1e-12));

    Matrix singular{{1.0, 2.0}, {2.0, 4.0}};
    CHECK_THROWS_AS(lu_solve(singular, {1.0, 1.0}), ContractViolation);
}

TEST_CASE("lu solve matches Eigen on random systems") {
    CounterRng rng(42);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + rng.next_below(6);
        Matrix a(n, n);
        Eigen::MatrixXd ae(n, n);
        Vec b(n);
        Eigen::VectorXd be(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                a(i, j) = rng.next_double(-2.0, 2.0);
                ae(i, j) = a(i, j);
            }
            a(i, i) += 4.0;
            ae(i, i) += 4.0;
            b[i] = rng.next_double(-5.0, 5.0);
            be(i) = b[i];
        }
        const Vec x = lu_solve(a, b);
        const Eigen::VectorXd xe = ae.partialPivLu().solve(be);
        for (std::size_t i = 0; i < n; ++i)
            CHECK_THAT(x[i], Catch::Matchers::WithinAbs(xe(i), 1e-10));
    }
}

TEST_CASE("spectral radius matches Eigen on random nonnegative matrices") {
    CounterRng rng(7);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 1 + rng.next_below(6);
        Matrix a(n, n);
        Eigen::MatrixXd ae(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                a(i, j) = rng.next_double(0.0, 1.0);
                ae(i, j) = a(i, j);
            }
        const double alpha = rng.next_double(0.3, 1.0);
        const StabilityCertificate cert = certify_stability(a, alpha);
        const double expected = alpha * ae.eigenvalues().cwiseAbs().maxCoeff();
        CHECK_THAT(cert.spectral_radius, Catch::Matchers::WithinAbs(expected, 1e-8));
        CHECK(cert.is_stable == (cert.spectral_radius < 1.0 - 1e-10));
    }
}

TEST_CASE("simplex solves a textbook LP") {
    // max 3x + 5y st x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), value 36.
    Matrix a{{1.0, 0.0}, {0.0, 2.0}, {3.0, 2.0}};
    const LpSolution sol = simplex_maximize(a, {4.0, 12.0, 18.0}, {3.0, 5.0});
    REQUIRE(sol.status == LpSolution::Status::optimal);
    CHECK_THAT(sol.x[0], Catch::Matchers::WithinAbs(2.0, 1e-9));
    CHECK_THAT(sol.x[1], Catch::Matchers::WithinAbs(6.0, 1e-9));
    CHECK_THAT(sol.objective, Catch::Matchers::WithinAbs(36.0, 1e-9));
}

TEST_CASE("simplex detects unbounded problems") {
    Matrix a{{-1.0, 1.0}};
    const LpSolution sol = simplex_maximize(a, {1.0}, {1.0, 0.0});
    CHECK(sol.status == LpSolution::Status::unbounded);
}

TEST_CASE("simplex handles degenerate vertices") {
    // Redundant constraints meeting at the optimum.
    Matrix a{{1.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}};
    const LpSolution sol = simplex_maximize(a, {1.0, 1.0, 2.0, 1.0}, {1.0, 1.0});
    REQUIRE(sol.status == LpSolution::Status::optimal);
    CHECK_THAT(sol.objective, Catch::Matchers::WithinAbs(2.0, 1e-9));
}

TEST_CASE("simplex optimum dominates sampled feasible points") {
    CounterRng rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t rows = 2 + rng.next_below(4);
        const std::size_t cols = 1 + rng.next_below(3);
        Matrix a(rows, cols);
        Vec b(rows);
        Vec obj(cols);
        for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t j = 0; j < cols; ++j)
                a(i, j) = rng.next_double(0.0, 1.0) + 0.05;
            b[i] = rng.next_double(0.5, 3.0);
        }
        for (std::size_t j = 0; j < cols; ++j)
            obj[j] = rng.next_double(0.1, 2.0);
        const LpSolution sol = simplex_maximize(a, b, obj);
        REQUIRE(sol.status == LpSolution::Status::optimal);

        for (int probe = 0; probe < 50; ++probe) {
            Vec x(cols);
            for (std::size_t j = 0; j < cols; ++j)
                x[j] = rng.next_double(0.0, 3.0);
            bool feasible = true;
            for (std::size_t i = 0; i < rows && feasible; ++i) {
                double row = 0.0;
                for (std::size_t j = 0; j < cols; ++j)
                    row += a(i, j) * x[j];
                feasible = row <= b[i];
            }
            if (!feasible)
                continue;
            double value = 0.0;
            for (std::size_t j = 0; j < cols; ++j)
                value += obj[j] * x[j];
            CHECK(value <= sol.objective + 1e-9);
        }
    }
}
