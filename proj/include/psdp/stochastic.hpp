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
#include <vector>

namespace psdp {

/// One realization of the i.i.d. multiplicative parameter: its probability
/// and the system data it selects.
struct ThetaComponent {
    std::string label;
    double prob = 0.0;
    Matrix A;
    Matrix B;
    Vec q;
    Vec r;
};

/// Positive linear system whose data (A, B, q, r) is redrawn independently
/// every stage from a finite parameter set; the control constraint |u| <= Hx
/// is fixed. Policies are the same linear feedbacks as in the deterministic
/// family.
class StochasticPositiveLinearModel {
public:
    StochasticPositiveLinearModel(std::vector<ThetaComponent> thetas, Matrix h, double alpha)
        : thetas_(std::move(thetas)), h_(std::move(h)), alpha_(alpha) {
        detail::require(!thetas_.empty(), "theta", "parameter set must be nonempty");
        detail::require(alpha_ > 0.0 && alpha_ <= 1.0, "alpha", "must lie in (0, 1]");
        const std::size_t n = thetas_.front().A.rows();
        const std::size_t m = h_.rows();
        detail::require(h_.cols() == n, "H", "must be m x n");
        detail::require_nonneg_matrix(h_, "H");

        double prob_sum = 0.0;
        for (std::size_t t = 0; t < thetas_.size(); ++t) {
            const auto& th = thetas_[t];
            const std::string base = "theta[" + std::to_string(t) + "]";
            detail::require(std::isfinite(th.prob) && th.prob >= 0.0, base + ".prob",
                            "must be finite and nonnegative");
            prob_sum += th.prob;
            detail::require(th.A.rows() == n && th.A.cols() == n, base + ".A", "must be n x n");
            detail::require(th.A.all_finite(), base + ".A", "must be finite");
            detail::require(th.B.rows() == n && th.B.cols() == m, base + ".B", "must be n x m");
            detail::require(th.B.all_finite(), base + ".B", "must be finite");
            detail::require(th.q.size() == n, base + ".q", "length must equal n");
            detail::require_nonneg_vec(th.q, base + ".q");
            detail::require(th.r.size() == m, base + ".r", "length must equal m");
            for (std::size_t i = 0; i < m; ++i)
                detail::require(std::isfinite(th.r[i]), base + ".r[" + std::to_string(i) + "]",
                                "must be finite");

            // Worst-case feedback bounds: A - |B| H >= 0 keeps every
            // admissible closed loop in the positive orthant, and
            // q - H'|r| >= 0 keeps every stage cost nonnegative.
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) {
                    double bound = 0.0;
                    for (std::size_t k = 0; k < m; ++k)
                        bound += std::abs(th.B(i, k)) * h_(k, j);
                    detail::require(th.A(i, j) - bound >= -1e-12, base + ".A",
                                    "A - |B|H has a negative entry; some admissible feedback leaves "
                                    "the positive orthant");
                }
            for (std::size_t j = 0; j < n; ++j) {
                double bound = 0.0;
                for (std::size_t i = 0; i < m; ++i)
                    bound += h_(i, j) * std::abs(th.r[i]);
                detail::require(th.q[j] - bound >= -1e-12, base + ".q",
                                "q - H'|r| has a negative entry; some admissible feedback makes the "
                                "stage cost negative");
            }
        }
        detail::require(std::abs(prob_sum - 1.0) <= 1e-12, "theta",
                        "probabilities must sum to 1 (got " + std::to_string(prob_sum) + ")");
    }

    std::size_t dimension() const { return thetas_.front().A.rows(); }
    std::size_t control_dimension() const { return h_.rows(); }
    double discount() const { return alpha_; }
    const std::vector<ThetaComponent>& thetas() const { return thetas_; }
    const Matrix& H() const { return h_; }

    std::vector<double> theta_probs() const {
        std::vector<double> p(thetas_.size());
        for (std::size_t t = 0; t < thetas_.size(); ++t)
            p[t] = thetas_[t].prob;
        return p;
    }

    /// Closed-loop dynamics and stage cost under gain L for parameter value
    /// theta: (A^theta + B^theta L, q^theta + L' r^theta).
    std::pair<Matrix, Vec> closed_loop(std::size_t theta, const Matrix& gain) const {
        const auto& th = thetas_.at(theta);
        Matrix a_mu = th.A.plus(th.B.multiply(gain));
        Vec q_mu = th.q;
        for (std::size_t j = 0; j < q_mu.size(); ++j)
            for (std::size_t i = 0; i < gain.rows(); ++i)
                q_mu[j] += gain(i, j) * th.r[i];
        detail::clamp_roundoff(a_mu);
        detail::clamp_roundoff(q_mu);
        return {std::move(a_mu), std::move(q_mu)};
    }

private:
    std::vector<ThetaComponent> thetas_;
    Matrix h_;
    double alpha_;
};

/// Deterministic model with all random data replaced by its expectation.
/// Its Bellman operator coincides with the stochastic one, so its fixed
/// point and optimal policy solve the stochastic problem.
inline PositiveLinearModel certainty_equivalent(const StochasticPositiveLinearModel& model) {
    const std::size_t n = model.dimension();
    const std::size_t m = model.control_dimension();
    Matrix a(n, n);
    Matrix b(n, m);
    Vec q(n, 0.0);
    Vec r(m, 0.0);
    for (const ThetaComponent& th : model.thetas()) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                a(i, j) += th.prob * th.A(i, j);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j)
                b(i, j) += th.prob * th.B(i, j);
        for (std::size_t j = 0; j < n; ++j)
            q[j] += th.prob * th.q[j];
        for (std::size_t i = 0; i < m; ++i)
            r[i] += th.prob * th.r[i];
    }
    return PositiveLinearModel(std::move(a), std::move(b), std::move(q), std::move(r), model.H(),
                               model.discount());
}

/// Solves the certainty-equivalent model with the requested engine; the
/// resulting cost vector and policy are optimal for the stochastic problem.
inline SolveReport solve_stochastic(const StochasticPositiveLinearModel& model, Engine engine,
                                    const SolverConfig& config = {}) {
    return solve_with(certainty_equivalent(model), engine, config);
}

/// Truncation horizon making the geometric value tail negligible: with
/// rho = rho(alpha * E[A_mu]) < 1 the cost accrued after N stages is within
/// a factor rho^N / (1 - rho) of the total, so N is the smallest integer
/// with rho^N / (1 - rho) <= rel_tail.
inline std::size_t suggest_horizon(double rho, double rel_tail = 1e-6) {
    if (!(rho >= 0.0) || rho >= 1.0)
        throw ContractViolation("suggest_horizon: requires 0 <= rho < 1");
    if (rho == 0.0)
        return 8;
    const double need = std::log(rel_tail * (1.0 - rho)) / std::log(rho);
    return static_cast<std::size_t>(std::clamp(std::ceil(need), 8.0, 2e5));
}

/// Simulates x_{k+1} = A_mu^{theta_k} x_k under i.i.d. parameter draws,
/// accumulating sum_k alpha^k (q_mu^{theta_k})' x_k over a finite horizon.
/// Paths use independent counter-based streams derived from (seed, path) and
/// results are reproducible bit for bit for a fixed seed.
inline RolloutStats monte_carlo_rollout(const StochasticPositiveLinearModel& model,
                                        const StructuredPolicy& policy, const Vec& x0,
                                        std::size_t horizon, std::size_t num_paths,
                                        std::uint64_t seed) {
    const std::size_t n = model.dimension();
    if (x0.size() != n)
        throw ContractViolation("monte_carlo_rollout: x0 length does not match the model");
    for (double v : x0)
        if (v < 0.0 || !std::isfinite(v))
            throw ContractViolation("monte_carlo_rollout: x0 must be nonnegative and finite");
    const auto* gain = std::get_if<GainControl>(&policy.control);
    if (!gain)
        throw ContractViolation("monte_carlo_rollout: policy must carry a feedback gain");

    std::vector<Matrix> a_mu;
    std::vector<Vec> q_mu;
    for (std::size_t t = 0; t < model.thetas().size(); ++t) {
        auto [a, q] = model.closed_loop(t, gain->gain);
        a_mu.push_back(std::move(a));
        q_mu.push_back(std::move(q));
    }
    const std::vector<double> probs = model.theta_probs();
    const double alpha = model.discount();

    return detail::aggregate_paths(num_paths, horizon, seed, [&](std::size_t path) {
        CounterRng rng(seed, path);
        Vec x = x0;
        double discount = 1.0;
        detail::KahanAccumulator cost;
        for (std::size_t k = 0; k < horizon; ++k) {
            const std::size_t theta = rng.next_index(probs);
            double stage = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                stage += q_mu[theta][i] * x[i];
            cost.add(discount * stage);
            x = a_mu[theta].multiply(x);
            discount *= alpha;
        }
        return cost.sum;
    });
}

} // namespace psdp
