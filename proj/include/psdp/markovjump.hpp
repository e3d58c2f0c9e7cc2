#pragma once

#include "psdp/algorithms.hpp"
#include "psdp/core.hpp"
#include "psdp/errors.hpp"
#include "psdp/models.hpp"
#include "psdp/rollout.hpp"

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace psdp {

/// Dynamics and cost a mode policy induces, per destination parameter w:
/// x_{k+1} = A[w] x when the chain jumps to w, with stage cost q[w]'x.
struct ModePolicyData {
    std::vector<Matrix> A;
    std::vector<Vec> q;
};

/// Mode policy plus its control parameterization (gain matrix for the
/// linear family, a listed-policy index per component for the tabulated
/// family).
struct ModePolicy {
    ModePolicyData data;
    ControlSpec control;
};

using JumpPolicyFamily = std::vector<ModePolicy>;

/// Per-mode cost parameters: J(x, theta) = modes[theta]' x.
struct JumpCostVector {
    std::vector<CostVector> modes;
};

/// Tabulated jump family: each mode lists finitely many policies with
/// explicit per-destination (A, q) pairs. Minimization within a mode is
/// componentwise across the listed policies.
struct JumpTabulatedMode {
    std::vector<ModePolicyData> policies;
};

/// Positive linear jump family: per-mode system (A, B, q, r, H) with linear
/// feedback gains L, |L| <= H. Dynamics and cost do not depend on the
/// destination parameter.
struct JumpLinearMode {
    Matrix A;
    Matrix B;
    Vec q;
    Vec r;
    Matrix H;
};

class JumpProblem {
public:
    using Modes = std::variant<std::vector<JumpTabulatedMode>, std::vector<JumpLinearMode>>;

    JumpProblem(Matrix transition, Modes modes, double alpha)
        : p_(std::move(transition)), modes_(std::move(modes)), alpha_(alpha) {
        r_ = p_.rows();
        detail::require(r_ > 0 && p_.cols() == r_, "P", "must be a square r x r matrix");
        detail::require(alpha_ > 0.0 && alpha_ <= 1.0, "alpha", "must lie in (0, 1]");
        for (std::size_t i = 0; i < r_; ++i) {
            double sum = 0.0;
            for (std::size_t j = 0; j < r_; ++j) {
                detail::require(std::isfinite(p_(i, j)) && p_(i, j) >= 0.0,
                                "P[" + std::to_string(i) + "][" + std::to_string(j) + "]",
                                "must be finite and nonnegative");
                sum += p_(i, j);
            }
            detail::require(std::abs(sum - 1.0) <= 1e-12, "P[" + std::to_string(i) + "]",
                            "row must sum to 1 (got " + std::to_string(sum) + ")");
        }

        if (const auto* tab = std::get_if<std::vector<JumpTabulatedMode>>(&modes_)) {
            detail::require(tab->size() == r_, "modes", "need one mode block per parameter value");
            n_ = 0;
            for (std::size_t theta = 0; theta < r_; ++theta) {
                const std::string base = "modes[" + std::to_string(theta) + "]";
                const auto& mode = (*tab)[theta];
                detail::require(!mode.policies.empty(), base, "must list at least one policy");
                for (std::size_t k = 0; k < mode.policies.size(); ++k) {
                    const auto& pol = mode.policies[k];
                    const std::string pbase = base + ".policies[" + std::to_string(k) + "]";
                    detail::require(pol.A.size() == r_ && pol.q.size() == r_, pbase,
                                    "must give A and q for every destination parameter");
                    for (std::size_t w = 0; w < r_; ++w) {
                        if (n_ == 0)
                            n_ = pol.A[w].rows();
                        const std::string f = pbase + ".A[" + std::to_string(w) + "]";
                        detail::require(pol.A[w].rows() == n_ && pol.A[w].cols() == n_, f,
                                        "must be n x n");
                        detail::require_nonneg_matrix(pol.A[w], f);
                        detail::require(pol.q[w].size() == n_, pbase + ".q[" + std::to_string(w) + "]",
                                        "length must equal n");
                        detail::require_nonneg_vec(pol.q[w], pbase + ".q[" + std::to_string(w) + "]");
                    }
                }
            }
        } else {
            const auto& lin = std::get<std::vector<JumpLinearMode>>(modes_);
            detail::require(lin.size() == r_, "modes", "need one mode block per parameter value");
            n_ = lin.front().A.rows();
            for (std::size_t theta = 0; theta < r_; ++theta) {
                const std::string base = "modes[" + std::to_string(theta) + "]";
                const auto& mode = lin[theta];
                const std::size_t m = mode.B.cols();
                detail::require(mode.A.rows() == n_ && mode.A.cols() == n_, base + ".A", "must be n x n");
                detail::require(mode.A.all_finite(), base + ".A", "must be finite");
                detail::require(mode.B.rows() == n_ && mode.B.all_finite(), base + ".B",
                                "must be n x m and finite");
                detail::require(mode.q.size() == n_, base + ".q", "length must equal n");
                detail::require_nonneg_vec(mode.q, base + ".q");
                detail::require(mode.r.size() == m, base + ".r", "length must equal m");
                for (double v : mode.r)
                    detail::require(std::isfinite(v), base + ".r", "must be finite");
                detail::require(mode.H.rows() == m && mode.H.cols() == n_, base + ".H", "must be m x n");
                detail::require_nonneg_matrix(mode.H, base + ".H");
                for (std::size_t i = 0; i < n_; ++i)
                    for (std::size_t j = 0; j < n_; ++j) {
                        double bound = 0.0;
                        for (std::size_t k = 0; k < m; ++k)
                            bound += std::abs(mode.B(i, k)) * mode.H(k, j);
                        detail::require(mode.A(i, j) - bound >= -1e-12, base + ".A",
                                        "A - |B|H has a negative entry; some admissible feedback "
                                        "leaves the positive orthant");
                    }
                for (std::size_t j = 0; j < n_; ++j) {
                    double bound = 0.0;
                    for (std::size_t i = 0; i < m; ++i)
                        bound += mode.H(i, j) * std::abs(mode.r[i]);
                    detail::require(mode.q[j] - bound >= -1e-12, base + ".q",
                                    "q - H'|r| has a negative entry; some admissible feedback makes "
                                    "the stage cost negative");
                }
            }
        }
    }

    std::size_t num_parameters() const { return r_; }
    std::size_t state_dimension() const { return n_; }
    double discount() const { return alpha_; }
    const Matrix& P() const { return p_; }
    const Modes& modes() const { return modes_; }
    bool is_tabulated() const { return std::holds_alternative<std::vector<JumpTabulatedMode>>(modes_); }

private:
    Matrix p_;
    Modes modes_;
    double alpha_;
    std::size_t r_ = 0;
    std::size_t n_ = 0;
};

inline Vec stack(const JumpCostVector& c) {
    Vec out;
    for (const CostVector& mode : c.modes)
        out.insert(out.end(), mode.values().begin(), mode.values().end());
    return out;
}

inline JumpCostVector unstack(const Vec& stacked, std::size_t r, std::size_t n) {
    if (stacked.size() != r * n)
        throw ContractViolation("unstack: vector length is not r*n");
    JumpCostVector out;
    for (std::size_t theta = 0; theta < r; ++theta)
        out.modes.push_back(
            CostVector(Vec(stacked.begin() + theta * n, stacked.begin() + (theta + 1) * n)));
    return out;
}

/// The rn x rn dynamics matrix and rn cost vector of a mode policy family:
/// block row w, block column theta of barA holds p_{theta w} A^{theta w},
/// and block theta of barq holds sum_w p_{theta w} q^{theta w}.
inline std::pair<Matrix, Vec> build_bar_matrices(const JumpProblem& problem,
                                                 const JumpPolicyFamily& family) {
    const std::size_t r = problem.num_parameters();
    const std::size_t n = problem.state_dimension();
    if (family.size() != r)
        throw ContractViolation("build_bar_matrices: need one mode policy per parameter value");

    Matrix bar_a(r * n, r * n);
    Vec bar_q(r * n, 0.0);
    for (std::size_t theta = 0; theta < r; ++theta) {
        const ModePolicyData& data = family[theta].data;
        if (data.A.size() != r || data.q.size() != r)
            throw ContractViolation("build_bar_matrices: mode policy must cover every destination");
        for (std::size_t w = 0; w < r; ++w) {
            const Matrix& a = data.A[w];
            if (a.rows() != n || a.cols() != n || data.q[w].size() != n)
                throw ContractViolation("build_bar_matrices: block dimension mismatch");
            const double p = problem.P()(theta, w);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    bar_a(w * n + i, theta * n + j) = p * a(i, j);
            for (std::size_t i = 0; i < n; ++i)
                bar_q[theta * n + i] += p * data.q[w][i];
        }
    }
    return {std::move(bar_a), std::move(bar_q)};
}

/// Deterministic problem equivalent to the Markov jump problem, with state
/// dimension rn. The Bellman minimization separates across modes: for each
/// theta independently it minimizes E_w{ q + alpha c(w)' A | theta } over
/// that mode's controls, and the stacked results form one step of the
/// operator. Satisfies the SemilinearModel concept, so every engine applies
/// unchanged.
class JumpEquivalentModel {
public:
    explicit JumpEquivalentModel(JumpProblem problem) : problem_(std::move(problem)) {}

    std::size_t dimension() const { return problem_.num_parameters() * problem_.state_dimension(); }
    double discount() const { return problem_.discount(); }
    const JumpProblem& problem() const { return problem_; }

    BellmanResult bellman(const CostVector& c) const {
        const std::size_t r = problem_.num_parameters();
        const std::size_t n = problem_.state_dimension();
        if (c.size() != r * n)
            throw ContractViolation("JumpEquivalentModel::bellman: cost vector has wrong length");

        const JumpCostVector modes = unstack(c.values(), r, n);
        Vec value;
        value.reserve(r * n);
        JumpPolicyFamily family;
        family.reserve(r);
        for (std::size_t theta = 0; theta < r; ++theta) {
            auto [mode_value, mode_policy] = mode_bellman(theta, modes);
            value.insert(value.end(), mode_value.begin(), mode_value.end());
            family.push_back(std::move(mode_policy));
        }

        auto [bar_a, bar_q] = build_bar_matrices(problem_, family);
        return {CostVector(std::move(value)),
                StructuredPolicy{std::move(bar_a), std::move(bar_q), std::monostate{}}};
    }

    /// Per-mode argmin policies at a cost vector, for extracting the
    /// mode-dependent optimal policy after a solve.
    JumpPolicyFamily mode_policies(const CostVector& c) const {
        const std::size_t r = problem_.num_parameters();
        const std::size_t n = problem_.state_dimension();
        if (c.size() != r * n)
            throw ContractViolation("JumpEquivalentModel::mode_policies: cost vector has wrong length");
        const JumpCostVector modes = unstack(c.values(), r, n);
        JumpPolicyFamily family;
        for (std::size_t theta = 0; theta < r; ++theta)
            family.push_back(mode_bellman(theta, modes).second);
        return family;
    }

private:
    std::pair<Vec, ModePolicy> mode_bellman(std::size_t theta, const JumpCostVector& c) const {
        const std::size_t r = problem_.num_parameters();
        const std::size_t n = problem_.state_dimension();
        const double alpha = problem_.discount();

        if (problem_.is_tabulated()) {
            const auto& mode = std::get<std::vector<JumpTabulatedMode>>(problem_.modes())[theta];
            const std::size_t num_policies = mode.policies.size();

            // Value of each listed policy: sum_w p_{theta w} (q^{theta w}
            // + alpha (A^{theta w})' c(w)), then a componentwise min.
            std::vector<Vec> values(num_policies, Vec(n, 0.0));
            for (std::size_t k = 0; k < num_policies; ++k) {
                for (std::size_t w = 0; w < r; ++w) {
                    const double p = problem_.P()(theta, w);
                    if (p == 0.0)
                        continue;
                    const ModePolicyData& pol = mode.policies[k];
                    Vec coupled = pol.A[w].transpose_multiply(c.modes[w].values());
                    for (std::size_t i = 0; i < n; ++i)
                        values[k][i] += p * (pol.q[w][i] + alpha * coupled[i]);
                }
            }

            Vec best(n, 0.0);
            std::vector<std::size_t> winner(n, 0);
            for (std::size_t i = 0; i < n; ++i) {
                best[i] = values[0][i];
                for (std::size_t k = 1; k < num_policies; ++k)
                    if (values[k][i] < best[i]) {
                        best[i] = values[k][i];
                        winner[i] = k;
                    }
            }

            // Composite mode policy: component i carries column i of the
            // winning policy's blocks.
            ModePolicyData data;
            data.A.assign(r, Matrix(n, n));
            data.q.assign(r, Vec(n, 0.0));
            for (std::size_t w = 0; w < r; ++w)
                for (std::size_t i = 0; i < n; ++i) {
                    const ModePolicyData& pol = mode.policies[winner[i]];
                    for (std::size_t j = 0; j < n; ++j)
                        data.A[w](j, i) = pol.A[w](j, i);
                    data.q[w][i] = pol.q[w][i];
                }
            return {std::move(best), ModePolicy{std::move(data), ComponentChoice{std::move(winner)}}};
        }

        const auto& mode = std::get<std::vector<JumpLinearMode>>(problem_.modes())[theta];
        const std::size_t m = mode.B.cols();

        // Dynamics and cost are destination-independent, so the expectation
        // collapses onto the P-mixed cost vector and the single-mode sign
        // rule applies at that vector.
        Vec mixed(n, 0.0);
        for (std::size_t w = 0; w < r; ++w) {
            const double p = problem_.P()(theta, w);
            for (std::size_t j = 0; j < n; ++j)
                mixed[j] += p * c.modes[w][j];
        }

        Matrix gain(m, n);
        for (std::size_t i = 0; i < m; ++i) {
            double bc = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                bc += mode.B(j, i) * mixed[j];
            const double s = mode.r[i] + alpha * bc >= 0.0 ? 1.0 : -1.0;
            for (std::size_t j = 0; j < n; ++j)
                gain(i, j) = -s * mode.H(i, j);
        }
        Matrix a_mu = mode.A.plus(mode.B.multiply(gain));
        Vec q_mu = mode.q;
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t i = 0; i < m; ++i)
                q_mu[j] += gain(i, j) * mode.r[i];
        detail::clamp_roundoff(a_mu);
        detail::clamp_roundoff(q_mu);

        Vec coupled = a_mu.transpose_multiply(mixed);
        Vec value(n, 0.0);
        for (std::size_t j = 0; j < n; ++j)
            value[j] = q_mu[j] + alpha * coupled[j];

        ModePolicyData data;
        data.A.assign(r, a_mu);
        data.q.assign(r, q_mu);
        return {std::move(value), ModePolicy{std::move(data), GainControl{std::move(gain)}}};
    }

    JumpProblem problem_;
};

inline JumpEquivalentModel deterministic_equivalent(const JumpProblem& problem) {
    return JumpEquivalentModel(problem);
}

struct JumpSolveResult {
    SolveReport report;
    JumpCostVector c_star;
    JumpPolicyFamily policy;
};

/// Solves the rn-dimensional equivalent with the requested engine and maps
/// the solution back: J*(x, theta) = c*(theta)'x with per-mode optimal
/// controls from the mode-wise minimizations.
inline JumpSolveResult solve_jump(const JumpProblem& problem, Engine engine,
                                  const SolverConfig& config = {}) {
    const JumpEquivalentModel equivalent = deterministic_equivalent(problem);
    JumpSolveResult result;
    result.report = solve_with(equivalent, engine, config);
    result.c_star =
        unstack(result.report.c_star.values(), problem.num_parameters(), problem.state_dimension());
    result.policy = equivalent.mode_policies(result.report.c_star);
    return result;
}

/// Simulates the jump chain: in mode theta draw the next parameter w from
/// row theta of P, pay alpha^k (q^{theta w})' x, and move through A^{theta w}.
inline RolloutStats jump_rollout(const JumpProblem& problem, const JumpPolicyFamily& family,
                                 const Vec& x0, std::size_t theta0, std::size_t horizon,
                                 std::size_t num_paths, std::uint64_t seed) {
    const std::size_t r = problem.num_parameters();
    const std::size_t n = problem.state_dimension();
    if (family.size() != r)
        throw ContractViolation("jump_rollout: need one mode policy per parameter value");
    if (x0.size() != n)
        throw ContractViolation("jump_rollout: x0 length does not match the problem");
    for (double v : x0)
        if (v < 0.0 || !std::isfinite(v))
            throw ContractViolation("jump_rollout: x0 must be nonnegative and finite");
    if (theta0 >= r)
        throw ContractViolation("jump_rollout: theta0 out of range");

    std::vector<std::vector<double>> rows(r, std::vector<double>(r));
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < r; ++j)
            rows[i][j] = problem.P()(i, j);
    const double alpha = problem.discount();

    return detail::aggregate_paths(num_paths, horizon, seed, [&](std::size_t path) {
        CounterRng rng(seed, path);
        Vec x = x0;
        std::size_t theta = theta0;
        double discount = 1.0;
        detail::KahanAccumulator cost;
        for (std::size_t k = 0; k < horizon; ++k) {
            const std::size_t w = rng.next_index(rows[theta]);
            const ModePolicyData& data = family[theta].data;
            double stage = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                stage += data.q[w][i] * x[i];
            cost.add(discount * stage);
            x = data.A[w].multiply(x);
            theta = w;
            discount *= alpha;
        }
        return cost.sum;
    });
}

} // namespace psdp
