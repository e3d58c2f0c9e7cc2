#include <catch2/catch_amalgamated.hpp>

#include "psdp/algorithms.hpp"
#include "psdp/markovjump.hpp"
#include "psdp/oracle.hpp"

#include "support/corpus.hpp"

#include <cmath>

using namespace psdp;

namespace {

/// Single-control scalar jump problem: mode data (a_theta, q_theta)
/// independent of the destination.
JumpProblem scalar_jump(const Matrix& p, const Vec& a, const Vec& q, double alpha) {
    const std::size_t r = p.rows();
    std::vector<JumpTabulatedMode> modes(r);
    for (std::size_t theta = 0; theta < r; ++theta) {
        ModePolicyData data;
        for (std::size_t w = 0; w < r; ++w) {
            data.A.push_back(Matrix{{a[theta]}});
            data.q.push_back(Vec{q[theta]});
        }
        modes[theta].policies.push_back(std::move(data));
    }
    return JumpProblem(p, std::move(modes), alpha);
}

JumpPolicyFamily single_policy_family(const JumpProblem& problem) {
    const auto& modes = std::get<std::vector<JumpTabulatedMode>>(problem.modes());
    JumpPolicyFamily family;
    for (const auto& mode : modes)
        family.push_back({mode.policies.front(), std::monostate{}});
    return family;
}

} // namespace

TEST_CASE("bar matrices of the identity chain are block diagonal") {
    const JumpProblem problem =
        scalar_jump(Matrix::identity(2), Vec{0.3, 0.7}, Vec{1.0, 2.0}, 0.9);
    const auto [bar_a, bar_q] = build_bar_matrices(problem, single_policy_family(problem));
    CHECK(bar_a(0, 0) == 0.3);
    CHECK(bar_a(1, 1) == 0.7);
    CHECK(bar_a(0, 1) == 0.0);
    CHECK(bar_a(1, 0) == 0.0);
    CHECK(bar_q == Vec{1.0, 2.0});
}

TEST_CASE("single-mode problems reduce to the plain matrices") {
    const JumpProblem problem = scalar_jump(Matrix{{1.0}}, Vec{0.5}, Vec{1.0}, 1.0);
    const auto [bar_a, bar_q] = build_bar_matrices(problem, single_policy_family(problem));
    CHECK(bar_a(0, 0) == 0.5);
    CHECK(bar_q == Vec{1.0});
}

TEST_CASE("bar matrices follow the destination-by-source block layout") {
    const Matrix p{{0.3, 0.7}, {0.6, 0.4}};
    const JumpProblem problem = scalar_jump(p, Vec{0.5, 0.8}, Vec{1.0, 2.0}, 0.9);
    const auto [bar_a, bar_q] = build_bar_matrices(problem, single_policy_family(problem));
    // Block (w, theta) = p_{theta w} a_theta at n = 1.
    CHECK_THAT(bar_a(0, 0), Catch::Matchers::WithinAbs(0.3 * 0.5, 1e-15));
    CHECK_THAT(bar_a(0, 1), Catch::Matchers::WithinAbs(0.6 * 0.8, 1e-15));
    CHECK_THAT(bar_a(1, 0), Catch::Matchers::WithinAbs(0.7 * 0.5, 1e-15));
    CHECK_THAT(bar_a(1, 1), Catch::Matchers::WithinAbs(0.4 * 0.8, 1e-15));
    CHECK(bar_q == Vec{1.0, 2.0});
}

TEST_CASE("equivalent model's operator equals the bar-matrix affine map") {
    CounterRng rng(81);
    for (std::uint64_t seed : {1, 2, 3}) {
        const JumpProblem problem = testsupport::random_jump_tabulated(seed);
        const JumpEquivalentModel equivalent(problem);
        for (int t = 0; t < 20; ++t) {
            Vec raw(equivalent.dimension());
            for (double& v : raw)
                v = rng.next_double(0.0, 4.0);
            const CostVector c(raw);
            const BellmanResult step = equivalent.bellman(c);
            const CostVector affine = apply_G_mu(step.policy, c, problem.discount());
            CHECK(max_abs_diff(step.value.values(), affine.values()) <= 1e-12);
        }
    }
}

TEST_CASE("equivalent operator equals stacked per-mode brute force") {
    CounterRng rng(82);
    for (std::uint64_t seed : {4, 5}) {
        const JumpProblem problem = testsupport::random_jump_tabulated(seed);
        const JumpEquivalentModel equivalent(problem);
        const std::size_t r = problem.num_parameters();
        const std::size_t n = problem.state_dimension();
        const auto& modes = std::get<std::vector<JumpTabulatedMode>>(problem.modes());

        for (int t = 0; t < 15; ++t) {
            Vec raw(r * n);
            for (double& v : raw)
                v = rng.next_double(0.0, 4.0);
            const CostVector stacked(raw);
            const JumpCostVector per_mode = unstack(raw, r, n);
            const CostVector value = equivalent.bellman(stacked).value;

            for (std::size_t theta = 0; theta < r; ++theta)
                for (std::size_t i = 0; i < n; ++i) {
                    double best = std::numeric_limits<double>::infinity();
                    for (const ModePolicyData& pol : modes[theta].policies) {
                        double candidate = 0.0;
                        for (std::size_t w = 0; w < r; ++w) {
                            double coupled = 0.0;
                            for (std::size_t j = 0; j < n; ++j)
                                coupled += pol.A[w](j, i) * per_mode.modes[w][j];
                            candidate +=
                                problem.P()(theta, w) * (pol.q[w][i] + problem.discount() * coupled);
                        }
                        best = std::min(best, candidate);
                    }
                    CHECK_THAT(value[theta * n + i], Catch::Matchers::WithinAbs(best, 1e-12));
                }
        }
    }
}

TEST_CASE("single-mode jump solve equals the deterministic solve") {
    const JumpProblem problem = scalar_jump(Matrix{{1.0}}, Vec{0.5}, Vec{1.0}, 1.0);
    const JumpSolveResult result = solve_jump(problem, Engine::vi);
    REQUIRE(result.report.converged);
    CHECK_THAT(result.c_star.modes[0][0], Catch::Matchers::WithinAbs(2.0, 1e-8));
}

TEST_CASE("identity chain decouples into per-mode solves") {
    for (std::uint64_t seed : {6, 7}) {
        JumpProblem coupled = testsupport::random_jump_tabulated(seed);
        // Rebuild with P = I so modes never interact.
        const JumpProblem problem(Matrix::identity(coupled.num_parameters()), coupled.modes(),
                                  coupled.discount());
        const JumpSolveResult joint = solve_jump(problem, Engine::vi);
        REQUIRE(joint.report.converged);

        const auto& modes = std::get<std::vector<JumpTabulatedMode>>(problem.modes());
        for (std::size_t theta = 0; theta < problem.num_parameters(); ++theta) {
            // Mode theta alone: destination data collapses to w = theta.
            std::vector<TabulatedPolicy> policies;
            for (const ModePolicyData& pol : modes[theta].policies)
                policies.push_back({pol.A[theta], pol.q[theta]});
            const TabulatedModel mode_model(policies, problem.discount());
            const SolveReport mode_solve = solve_vi(mode_model, {});
            REQUIRE(mode_solve.converged);
            CHECK(max_abs_diff(joint.c_star.modes[theta].values(), mode_solve.c_star.values()) <= 1e-9);
        }
    }
}

TEST_CASE("scalar jump instance solves the 2x2 linear system") {
    const Matrix p{{0.3, 0.7}, {0.6, 0.4}};
    const JumpProblem problem = scalar_jump(p, Vec{0.5, 0.8}, Vec{1.0, 2.0}, 0.9);
    const JumpSolveResult result = solve_jump(problem, Engine::vi);
    REQUIRE(result.report.converged);

    const auto [bar_a, bar_q] = build_bar_matrices(problem, single_policy_family(problem));
    Matrix system(2, 2);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            system(i, j) = (i == j ? 1.0 : 0.0) - 0.9 * bar_a(j, i);
    const Vec direct = lu_solve(system, bar_q);
    CHECK_THAT(result.c_star.modes[0][0], Catch::Matchers::WithinAbs(direct[0], 1e-8));
    CHECK_THAT(result.c_star.modes[1][0], Catch::Matchers::WithinAbs(direct[1], 1e-8));
}

TEST_CASE("jump solve matches the brute-force augmented recursion") {
    for (std::uint64_t seed : {8, 9, 10}) {
        const JumpProblem problem = testsupport::random_jump_tabulated(seed);
        const JumpSolveResult result = solve_jump(problem, Engine::vi);
        REQUIRE(result.report.converged);
        REQUIRE(result.report.stable);

        const double rho = result.report.spectral_radius;
        const std::size_t horizon = suggest_horizon(rho, 1e-8);
        const JumpCostVector dp = finite_horizon_value(FiniteHorizonSpec<JumpProblem>{problem, horizon});
        for (std::size_t theta = 0; theta < problem.num_parameters(); ++theta)
            CHECK(max_abs_diff(dp.modes[theta].values(), result.c_star.modes[theta].values()) <= 1e-5);
    }
}

TEST_CASE("linear jump modes carry per-mode gains and stay consistent") {
    const JumpProblem problem = testsupport::random_jump_linear(11);
    const JumpSolveResult result = solve_jump(problem, Engine::vi);
    REQUIRE(result.report.converged);
    REQUIRE(result.policy.size() == problem.num_parameters());
    for (const ModePolicy& mode : result.policy) {
        const auto* gain = std::get_if<GainControl>(&mode.control);
        REQUIRE(gain != nullptr);
        CHECK(gain->gain.rows() == 1);
    }

    // Stability transfer: the optimal family's bar matrix certifies stable.
    const auto [bar_a, bar_q] = build_bar_matrices(problem, result.policy);
    const StabilityCertificate cert = certify_stability(bar_a, problem.discount());
    CHECK(cert.is_stable);

    // Rollout of the optimal family matches c*(theta0)'x0 statistically.
    const Vec x0(problem.state_dimension(), 1.0);
    const std::size_t horizon = suggest_horizon(cert.spectral_radius);
    const RolloutStats stats = jump_rollout(problem, result.policy, x0, 0, horizon, 60000, 17);
    double value = 0.0;
    for (std::size_t i = 0; i < x0.size(); ++i)
        value += result.c_star.modes[0][i] * x0[i];
    CHECK(std::abs(stats.mean_cost - value) <= 3.5 * stats.std_error + 1e-6 * value);
}

TEST_CASE("identity-chain rollout is deterministic") {
    const JumpProblem problem =
        scalar_jump(Matrix::identity(2), Vec{0.5, 0.7}, Vec{1.0, 2.0}, 1.0);
    const JumpPolicyFamily family = single_policy_family(problem);
    const RolloutStats stats = jump_rollout(problem, family, {1.0}, 0, 40, 300, 5);
    double expected = 0.0;
    double x = 1.0;
    for (int k = 0; k < 40; ++k) {
        expected += x;
        x *= 0.5;
    }
    CHECK(stats.std_error == 0.0);
    CHECK_THAT(stats.mean_cost, Catch::Matchers::WithinAbs(expected, 1e-12));
}

TEST_CASE("zero-cost jump rollout is zero") {
    const JumpProblem problem =
        scalar_jump(Matrix{{0.5, 0.5}, {0.5, 0.5}}, Vec{0.5, 0.7}, Vec{0.0, 0.0}, 1.0);
    const RolloutStats stats =
        jump_rollout(problem, single_policy_family(problem), {1.0}, 0, 50, 300, 5);
    CHECK(stats.mean_cost == 0.0);
    CHECK(stats.std_error == 0.0);
}

TEST_CASE("fixed stable family's rollout matches its bar-matrix evaluation") {
    const JumpProblem problem = testsupport::random_jump_tabulated(12);
    const JumpPolicyFamily family = single_policy_family(problem);
    const auto [bar_a, bar_q] = build_bar_matrices(problem, family);
    const CostVector c_mu = evaluate_policy({bar_a, bar_q, std::monostate{}}, problem.discount());

    const std::size_t n = problem.state_dimension();
    const Vec x0(n, 1.0);
    double value = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        value += c_mu[i] * x0[i]; // theta0 = 0 block is the first n entries

    const StabilityCertificate cert = certify_stability(bar_a, problem.discount());
    const std::size_t horizon = suggest_horizon(cert.spectral_radius);
    const RolloutStats stats = jump_rollout(problem, family, x0, 0, horizon, 60000, 23);
    CHECK(std::abs(stats.mean_cost - value) <= 3.5 * stats.std_error + 1e-6 * value);
}

TEST_CASE("jump problem validation") {
    // Rows of P must be probability vectors.
    CHECK_THROWS_AS(scalar_jump(Matrix{{0.5, 0.4}, {0.5, 0.5}}, Vec{0.5, 0.5}, Vec{1.0, 1.0}, 0.9),
                    ValidationError);
    // Mode count must match r.
    std::vector<JumpTabulatedMode> modes(1);
    modes[0].policies.push_back({{Matrix{{0.5}}, Matrix{{0.5}}}, {Vec{1.0}, Vec{1.0}}});
    CHECK_THROWS_AS(JumpProblem(Matrix::identity(2), modes, 0.9), ValidationError);
}
