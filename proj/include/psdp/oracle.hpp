#pragma once

#include "psdp/core.hpp"
#include "psdp/errors.hpp"
#include "psdp/markovjump.hpp"
#include "psdp/models.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace psdp {

/// Ground-truth N-stage computation for small instances. The backward steps
/// below re-derive each family's minimization with plain nested loops and do
/// not call the model oracles, so a bug in the optimized paths cannot hide
/// here. Test policy: no code sharing with the models module.
template <typename ModelT>
struct FiniteHorizonSpec {
    const ModelT& model;
    std::size_t horizon = 1;
    /// States whose N-stage cost is inspected; empty means the unit basis.
    std::vector<Vec> sample_states = {};
    /// Cap on enumerated candidates per backward stage.
    std::size_t budget = 10000;
};

namespace oracle_detail {

inline std::size_t stage_candidates(const BilinearModel& m) {
    std::size_t count = 0;
    for (const auto& grid : m.components())
        count += grid.f.size();
    return count;
}

inline std::size_t stage_candidates(const DistributionMDPModel& m) {
    std::size_t count = 0;
    for (const auto& grid : m.components())
        count += grid.p.size();
    return count;
}

inline std::size_t stage_candidates(const TabulatedModel& m) { return m.policies().size(); }

inline std::size_t stage_candidates(const PositiveLinearModel& m) {
    if (m.control_dimension() >= 40)
        return std::numeric_limits<std::size_t>::max();
    return std::size_t{1} << m.control_dimension();
}

inline std::size_t stage_candidates(const JumpProblem& p) {
    std::size_t count = 0;
    if (p.is_tabulated()) {
        for (const auto& mode : std::get<std::vector<JumpTabulatedMode>>(p.modes()))
            count += mode.policies.size();
    } else {
        for (const auto& mode : std::get<std::vector<JumpLinearMode>>(p.modes())) {
            if (mode.B.cols() >= 40)
                return std::numeric_limits<std::size_t>::max();
            count += std::size_t{1} << mode.B.cols();
        }
    }
    return count;
}

inline Vec backstep(const BilinearModel& m, const Vec& c) {
    const std::size_t n = m.dimension();
    const double alpha = m.discount();
    Vec out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double carry = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            carry += m.A()(j, i) * c[j];
        double best = std::numeric_limits<double>::infinity();
        const auto& grid = m.components()[i];
        for (std::size_t u = 0; u < grid.f.size(); ++u) {
            double coupling = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                coupling += grid.f[u][j] * c[j];
            const double candidate = grid.g[u] + alpha * coupling;
            if (candidate < best)
                best = candidate;
        }
        out[i] = m.q()[i] + alpha * carry + best;
    }
    return out;
}

inline Vec backstep(const DistributionMDPModel& m, const Vec& c) {
    const std::size_t n = m.dimension();
    const double alpha = m.discount();
    Vec out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        const auto& grid = m.components()[i];
        for (std::size_t u = 0; u < grid.p.size(); ++u) {
            double coupling = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                coupling += grid.p[u][j] * c[j];
            const double candidate = grid.g[u] + alpha * coupling;
            if (candidate < best)
                best = candidate;
        }
        out[i] = best;
    }
    return out;
}

inline Vec backstep(const TabulatedModel& m, const Vec& c) {
    const std::size_t n = m.dimension();
    const double alpha = m.discount();
    Vec out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (const TabulatedPolicy& pol : m.policies()) {
            double coupling = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                coupling += pol.A(j, i) * c[j];
            const double candidate = pol.q[i] + alpha * coupling;
            if (candidate < best)
                best = candidate;
        }
        out[i] = best;
    }
    return out;
}

/// Entrywise minimum over all sign-pattern feedbacks. A single pattern
/// attains the minimum in every component simultaneously (the rows of H are
/// nonnegative), so this equals the one-step minimization.
inline Vec backstep(const PositiveLinearModel& m, const Vec& c) {
    const std::size_t n = m.dimension();
    const std::size_t mm = m.control_dimension();
    const double alpha = m.discount();
    Vec out(n, std::numeric_limits<double>::infinity());
    for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << mm); ++bits) {
        for (std::size_t j = 0; j < n; ++j) {
            double stage = m.q()[j];
            double coupling = 0.0;
            for (std::size_t i = 0; i < mm; ++i) {
                const double sgn = (bits >> i) & 1 ? 1.0 : -1.0;
                stage += -sgn * m.H()(i, j) * m.r()[i];
            }
            for (std::size_t i = 0; i < n; ++i) {
                double closed = m.A()(i, j);
                for (std::size_t k = 0; k < mm; ++k) {
                    const double sgn = (bits >> k) & 1 ? 1.0 : -1.0;
                    closed += m.B()(i, k) * (-sgn * m.H()(k, j));
                }
                coupling += closed * c[i];
            }
            const double candidate = stage + alpha * coupling;
            if (candidate < out[j])
                out[j] = candidate;
        }
    }
    return out;
}

/// One backward stage of the augmented-state recursion: for each mode,
/// minimize sum_w p_{theta w} (q + alpha A' c(w)) over the mode's controls.
inline std::vector<Vec> backstep(const JumpProblem& p, const std::vector<Vec>& c) {
    const std::size_t r = p.num_parameters();
    const std::size_t n = p.state_dimension();
    const double alpha = p.discount();
    std::vector<Vec> out(r, Vec(n, std::numeric_limits<double>::infinity()));

    if (p.is_tabulated()) {
        const auto& modes = std::get<std::vector<JumpTabulatedMode>>(p.modes());
        for (std::size_t theta = 0; theta < r; ++theta) {
            for (const ModePolicyData& pol : modes[theta].policies) {
                for (std::size_t i = 0; i < n; ++i) {
                    double candidate = 0.0;
                    for (std::size_t w = 0; w < r; ++w) {
                        double coupling = 0.0;
                        for (std::size_t j = 0; j < n; ++j)
                            coupling += pol.A[w](j, i) * c[w][j];
                        candidate += p.P()(theta, w) * (pol.q[w][i] + alpha * coupling);
                    }
                    if (candidate < out[theta][i])
                        out[theta][i] = candidate;
                }
            }
        }
        return out;
    }

    const auto& modes = std::get<std::vector<JumpLinearMode>>(p.modes());
    for (std::size_t theta = 0; theta < r; ++theta) {
        const JumpLinearMode& mode = modes[theta];
        const std::size_t mm = mode.B.cols();
        for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << mm); ++bits) {
            for (std::size_t j = 0; j < n; ++j) {
                double stage = mode.q[j];
                for (std::size_t i = 0; i < mm; ++i) {
                    const double sgn = (bits >> i) & 1 ? 1.0 : -1.0;
                    stage += -sgn * mode.H(i, j) * mode.r[i];
                }
                double candidate = 0.0;
                for (std::size_t w = 0; w < r; ++w) {
                    double coupling = 0.0;
                    for (std::size_t i = 0; i < n; ++i) {
                        double closed = mode.A(i, j);
                        for (std::size_t k = 0; k < mm; ++k) {
                            const double sgn = (bits >> k) & 1 ? 1.0 : -1.0;
                            closed += mode.B(i, k) * (-sgn * mode.H(k, j));
                        }
                        coupling += closed * c[w][i];
                    }
                    candidate += p.P()(theta, w) * (stage + alpha * coupling);
                }
                if (candidate < out[theta][j])
                    out[theta][j] = candidate;
            }
        }
    }
    return out;
}

template <typename ModelT>
void check_budget(const ModelT& model, std::size_t budget) {
    const std::size_t work = stage_candidates(model);
    if (work > budget)
        throw BudgetExceeded("finite-horizon oracle: " + std::to_string(work) +
                             " candidates per stage exceed the budget of " + std::to_string(budget));
}

} // namespace oracle_detail

/// G^N(0): the parameter vector of the optimal N-stage cost, by N exact
/// backward steps with exhaustive control enumeration.
template <typename ModelT>
CostVector finite_horizon_value(const FiniteHorizonSpec<ModelT>& spec) {
    if (spec.horizon < 1)
        throw ContractViolation("finite_horizon_value: horizon must be >= 1");
    oracle_detail::check_budget(spec.model, spec.budget);
    Vec c(spec.model.dimension(), 0.0);
    for (std::size_t k = 0; k < spec.horizon; ++k)
        c = oracle_detail::backstep(spec.model, c);
    return CostVector(std::move(c));
}

inline JumpCostVector finite_horizon_value(const FiniteHorizonSpec<JumpProblem>& spec) {
    if (spec.horizon < 1)
        throw ContractViolation("finite_horizon_value: horizon must be >= 1");
    oracle_detail::check_budget(spec.model, spec.budget);
    const std::size_t r = spec.model.num_parameters();
    const std::size_t n = spec.model.state_dimension();
    std::vector<Vec> c(r, Vec(n, 0.0));
    for (std::size_t k = 0; k < spec.horizon; ++k)
        c = oracle_detail::backstep(spec.model, c);
    JumpCostVector out;
    for (std::size_t theta = 0; theta < r; ++theta)
        out.modes.push_back(CostVector(std::move(c[theta])));
    return out;
}

namespace oracle_detail {

inline bool positive_on_samples(const Vec& value, const std::vector<Vec>& samples) {
    if (samples.empty()) {
        for (double v : value)
            if (!(v > 0.0))
                return false;
        return true;
    }
    for (const Vec& x : samples) {
        if (x.size() != value.size())
            throw ContractViolation("check_assumption_d: sample state has wrong length");
        double cost = 0.0;
        for (std::size_t i = 0; i < value.size(); ++i)
            cost += value[i] * x[i];
        if (!(cost > 0.0))
            return false;
    }
    return true;
}

} // namespace oracle_detail

/// True iff the optimal N-stage cost from every sample state (default: every
/// unit basis vector) is strictly positive.
template <typename ModelT>
bool check_assumption_d(const FiniteHorizonSpec<ModelT>& spec) {
    const CostVector value = finite_horizon_value(spec);
    return oracle_detail::positive_on_samples(value.values(), spec.sample_states);
}

inline bool check_assumption_d(const FiniteHorizonSpec<JumpProblem>& spec) {
    const JumpCostVector value = finite_horizon_value(spec);
    for (const CostVector& mode : value.modes)
        if (!oracle_detail::positive_on_samples(mode.values(), spec.sample_states))
            return false;
    return true;
}

} // namespace psdp
