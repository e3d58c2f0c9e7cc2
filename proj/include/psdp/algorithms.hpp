#pragma once

#include "psdp/core.hpp"
#include "psdp/errors.hpp"
#include "psdp/linalg.hpp"
#include "psdp/models.hpp"
#include "psdp/rng.hpp"
#include "psdp/simplex.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace psdp {

// ---------------------------------------------------------------------------
// Asynchronous update schedules
// ---------------------------------------------------------------------------

/// Which blocks update at each step, and how old the information they read
/// is. A schedule is admissible when every block updates at least once per
/// window and no read is staler than the staleness bound; both are enforced,
/// which is a strict strengthening of total asynchronism and keeps runs
/// finite and reproducible.
///
/// Generated schedules (synchronous / round_robin / random) extend to any
/// horizon; explicit schedules repeat their given period.
class AsyncSchedule {
public:
    enum class Kind { synchronous, round_robin, random };

    AsyncSchedule(std::vector<std::vector<std::size_t>> partition, Kind kind,
                  std::size_t staleness_bound = 0, std::uint64_t seed = 0,
                  std::size_t update_window = 0, double update_prob = 0.5)
        : partition_(std::move(partition)), kind_(kind), staleness_bound_(staleness_bound), seed_(seed),
          update_prob_(update_prob) {
        validate_partition();
        update_window_ = update_window > 0 ? update_window : 3 * partition_.size();
        if (update_prob_ <= 0.0 || update_prob_ > 1.0)
            throw ConfigError("AsyncSchedule: update probability must lie in (0, 1]");
    }

    /// Explicit periodic schedule: updates[t] lists the blocks updating at
    /// step t; ages[t][ell][j] is how many steps old block ell's view of
    /// block j is at step t. The period repeats forever.
    AsyncSchedule(std::vector<std::vector<std::size_t>> partition,
                  std::vector<std::vector<std::size_t>> updates,
                  std::vector<std::vector<std::vector<std::size_t>>> ages, std::size_t staleness_bound)
        : partition_(std::move(partition)), kind_(Kind::random), staleness_bound_(staleness_bound),
          explicit_updates_(std::move(updates)), explicit_ages_(std::move(ages)), explicit_(true) {
        validate_partition();
        if (explicit_updates_.empty())
            throw ConfigError("AsyncSchedule: explicit schedule needs at least one step");
        if (explicit_ages_.size() != explicit_updates_.size())
            throw ConfigError("AsyncSchedule: updates and ages must cover the same period");
        const std::size_t m = partition_.size();
        std::vector<bool> seen(m, false);
        for (std::size_t t = 0; t < explicit_updates_.size(); ++t) {
            for (std::size_t ell : explicit_updates_[t]) {
                if (ell >= m)
                    throw ConfigError("AsyncSchedule: update references block " + std::to_string(ell) +
                                      " outside the partition");
                seen[ell] = true;
            }
            if (explicit_ages_[t].size() != m)
                throw ConfigError("AsyncSchedule: ages[t] must have one row per block");
            for (const auto& row : explicit_ages_[t]) {
                if (row.size() != m)
                    throw ConfigError("AsyncSchedule: ages[t][ell] must have one entry per block");
                for (std::size_t age : row)
                    if (age > staleness_bound_)
                        throw ConfigError("AsyncSchedule: age " + std::to_string(age) +
                                          " exceeds the staleness bound " + std::to_string(staleness_bound_));
            }
        }
        for (std::size_t ell = 0; ell < m; ++ell)
            if (!seen[ell])
                throw ConfigError("AsyncSchedule: block " + std::to_string(ell) +
                                  " never updates within the period");
        update_window_ = explicit_updates_.size();
    }

    static AsyncSchedule synchronous(std::size_t n) {
        return AsyncSchedule({single_block(n)}, Kind::synchronous);
    }

    /// One component per block, swept in order with fresh reads.
    static AsyncSchedule gauss_seidel(std::size_t n) {
        std::vector<std::vector<std::size_t>> partition(n);
        for (std::size_t i = 0; i < n; ++i)
            partition[i] = {i};
        return AsyncSchedule(std::move(partition), Kind::round_robin);
    }

    const std::vector<std::vector<std::size_t>>& partition() const { return partition_; }
    std::size_t num_blocks() const { return partition_.size(); }
    std::size_t staleness_bound() const { return staleness_bound_; }
    std::size_t dimension() const {
        std::size_t n = 0;
        for (const auto& block : partition_)
            n += block.size();
        return n;
    }

    /// Blocks updating at step t. For the random kind, membership is decided
    /// once per step in order (a memo keeps revisits consistent): a block
    /// updates on a seeded coin flip, or unconditionally when it has not
    /// updated within the window. Not safe to share one schedule object
    /// between concurrent solves; copy it instead.
    std::vector<std::size_t> blocks_at(std::size_t t) const {
        const std::size_t m = partition_.size();
        if (explicit_)
            return explicit_updates_[t % explicit_updates_.size()];
        switch (kind_) {
        case Kind::synchronous: {
            std::vector<std::size_t> all(m);
            for (std::size_t i = 0; i < m; ++i)
                all[i] = i;
            return all;
        }
        case Kind::round_robin:
            return {t % m};
        case Kind::random: {
            if (last_update_.empty())
                last_update_.assign(m, 0);
            while (memo_.size() <= t) {
                const std::size_t s = memo_.size();
                std::vector<std::size_t> out;
                for (std::size_t ell = 0; ell < m; ++ell) {
                    const double u = static_cast<double>(CounterRng(seed_, s).at(ell) >> 11) * 0x1.0p-53;
                    if (u < update_prob_ || s - last_update_[ell] >= update_window_) {
                        out.push_back(ell);
                        last_update_[ell] = s;
                    }
                }
                memo_.push_back(std::move(out));
            }
            return memo_[t];
        }
        }
        return {};
    }

    /// Age of the information block ell reads about block j at step t
    /// (tau = t - age). A block always reads its own components fresh.
    std::size_t age(std::size_t ell, std::size_t j, std::size_t t) const {
        if (explicit_)
            return std::min<std::size_t>(explicit_ages_[t % explicit_ages_.size()][ell][j], t);
        if (ell == j || staleness_bound_ == 0 || kind_ != Kind::random)
            return 0;
        const std::size_t m = partition_.size();
        const std::size_t raw = CounterRng(seed_ ^ 0x5bd1e995u, t).at(ell * m + j) % (staleness_bound_ + 1);
        return std::min(raw, t);
    }

private:
    static std::vector<std::size_t> single_block(std::size_t n) {
        std::vector<std::size_t> all(n);
        for (std::size_t i = 0; i < n; ++i)
            all[i] = i;
        return all;
    }

    void validate_partition() const {
        if (partition_.empty())
            throw ConfigError("AsyncSchedule: partition must be nonempty");
        std::vector<std::size_t> flat;
        for (const auto& block : partition_) {
            if (block.empty())
                throw ConfigError("AsyncSchedule: partition blocks must be nonempty");
            flat.insert(flat.end(), block.begin(), block.end());
        }
        std::vector<std::size_t> sorted = flat;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 0; i < sorted.size(); ++i)
            if (sorted[i] != i)
                throw ConfigError("AsyncSchedule: partition must cover indices 0..n-1 exactly once");
    }

    std::vector<std::vector<std::size_t>> partition_;
    Kind kind_ = Kind::synchronous;
    std::size_t staleness_bound_ = 0;
    std::uint64_t seed_ = 0;
    double update_prob_ = 0.5;
    std::size_t update_window_ = 1;
    std::vector<std::vector<std::size_t>> explicit_updates_;
    std::vector<std::vector<std::vector<std::size_t>>> explicit_ages_;
    bool explicit_ = false;
    mutable std::vector<std::vector<std::size_t>> memo_;
    mutable std::vector<std::size_t> last_update_;
};

// ---------------------------------------------------------------------------
// Solver configuration
// ---------------------------------------------------------------------------

struct SolverConfig {
    double tolerance = 1e-9;
    std::size_t max_iterations = 200000;
    std::optional<CostVector> initial_c;
    std::optional<StructuredPolicy> initial_policy;
    /// Evaluation depths l_k for optimistic PI; the last entry repeats.
    std::vector<std::size_t> optimism_schedule = {5};
    std::optional<AsyncSchedule> async_schedule;
    /// Seed all 2^m sign-pattern cuts (positive linear) or all listed
    /// policies (tabulated) before the first LP solve.
    bool exhaustive_cuts = false;

    void validate() const {
        if (!(tolerance > 0.0))
            throw ConfigError("SolverConfig: tolerance must be positive");
        if (optimism_schedule.empty())
            throw ConfigError("SolverConfig: optimism schedule must be nonempty");
        for (std::size_t l : optimism_schedule)
            if (l < 1)
                throw ConfigError("SolverConfig: optimism schedule entries must be >= 1");
    }
};

namespace detail {

template <SemilinearModel M>
void attach_certificate(const M& model, SolveReport& report) {
    const StabilityCertificate cert = certify_stability(report.policy.A, model.discount());
    report.stable = cert.is_stable;
    report.spectral_radius = cert.spectral_radius;
}

template <SemilinearModel M>
CostVector resolve_initial_c(const M& model, const SolverConfig& config) {
    if (config.initial_c) {
        if (config.initial_c->size() != model.dimension())
            throw ContractViolation("initial cost vector length does not match the model dimension");
        return *config.initial_c;
    }
    return CostVector::zeros(model.dimension());
}

} // namespace detail

// ---------------------------------------------------------------------------
// Stable-policy search helper
// ---------------------------------------------------------------------------

/// Probes the minimization oracle at a spread of cost vectors and returns
/// the first argmin policy whose discounted dynamics certify stable. For the
/// tabulated family the listed policies are also tried directly, and for the
/// positive linear family all sign patterns are enumerated when feasible.
/// Throws InstabilityError when no stable policy is found, since the
/// problem's standing assumptions cannot be witnessed.
template <SemilinearModel M>
StructuredPolicy find_stable_policy(const M& model) {
    const std::size_t n = model.dimension();
    std::vector<CostVector> probes;
    probes.push_back(CostVector::zeros(n));
    for (double s : {1.0, 10.0, 100.0, 1000.0})
        probes.push_back(CostVector::constant(n, s));
    CounterRng rng(0x9d5f, 7);
    for (int k = 0; k < 8; ++k) {
        Vec v(n);
        for (double& x : v)
            x = rng.next_double(0.0, 50.0);
        probes.push_back(CostVector(std::move(v)));
    }

    double best_rho = std::numeric_limits<double>::infinity();
    auto consider = [&](StructuredPolicy candidate) -> std::optional<StructuredPolicy> {
        try {
            const StabilityCertificate cert = certify_stability(candidate.A, model.discount());
            best_rho = std::min(best_rho, cert.spectral_radius);
            if (cert.is_stable)
                return candidate;
        } catch (const IndeterminateStability&) {
        }
        return std::nullopt;
    };

    for (const CostVector& c : probes)
        if (auto p = consider(model.bellman(c).policy))
            return *p;

    if constexpr (std::is_same_v<M, TabulatedModel>) {
        for (const TabulatedPolicy& tp : model.policies())
            if (auto p = consider({tp.A, tp.q, std::monostate{}}))
                return *p;
    }
    if constexpr (std::is_same_v<M, PositiveLinearModel>) {
        if (model.control_dimension() <= 12)
            for (StructuredPolicy& sp : model.sign_pattern_policies())
                if (auto p = consider(std::move(sp)))
                    return *p;
    }
    throw InstabilityError("find_stable_policy: no stable policy found (best rho " +
                               std::to_string(best_rho) + ")",
                           best_rho);
}

// ---------------------------------------------------------------------------
// Value iteration
// ---------------------------------------------------------------------------

/// c_{k+1} = G(c_k) until ||G(c) - c||_inf <= tolerance. Returns the first
/// iterate whose residual passes, so a fixed-point start converges in zero
/// iterations.
template <SemilinearModel M>
SolveReport solve_vi(const M& model, const SolverConfig& config) {
    config.validate();
    SolveReport report;
    report.engine = "vi";
    report.tolerance = config.tolerance;

    CostVector c = detail::resolve_initial_c(model, config);
    for (std::size_t k = 0;; ++k) {
        BellmanResult step = model.bellman(c);
        const double residual = max_abs_diff(c.values(), step.value.values());
        report.trace.push_back({k, c.values(), residual});
        if (residual <= config.tolerance) {
            report.converged = true;
            report.iterations = k;
            report.residual = residual;
            report.c_star = c;
            report.policy = std::move(step.policy);
            break;
        }
        if (k >= config.max_iterations) {
            report.converged = false;
            report.iterations = k;
            report.residual = residual;
            report.c_star = c;
            report.policy = std::move(step.policy);
            break;
        }
        c = std::move(step.value);
    }
    detail::attach_certificate(model, report);
    return report;
}

// ---------------------------------------------------------------------------
// Asynchronous value iteration
// ---------------------------------------------------------------------------

/// Block updates with delayed reads, driven by an admissible schedule. Each
/// updating block assembles its view from per-block snapshots up to
/// `staleness_bound` steps old, applies the full Bellman operator, and keeps
/// only its own components. Deterministic for a fixed schedule.
template <SemilinearModel M>
SolveReport solve_async_vi(const M& model, const SolverConfig& config) {
    config.validate();
    if (!config.async_schedule)
        throw ConfigError("solve_async_vi: config.async_schedule is required");
    const AsyncSchedule& schedule = *config.async_schedule;
    if (schedule.dimension() != model.dimension())
        throw ConfigError("solve_async_vi: schedule partition does not cover the model dimension");

    SolveReport report;
    report.engine = "async-vi";
    report.tolerance = config.tolerance;

    const std::size_t depth = schedule.staleness_bound() + 1;
    std::vector<Vec> history;
    history.reserve(depth);

    CostVector current = detail::resolve_initial_c(model, config);
    const auto& partition = schedule.partition();

    for (std::size_t t = 0;; ++t) {
        BellmanResult full = model.bellman(current);
        const double residual = max_abs_diff(current.values(), full.value.values());
        report.trace.push_back({t, current.values(), residual});
        if (residual <= config.tolerance || t >= config.max_iterations) {
            report.converged = residual <= config.tolerance;
            report.iterations = t;
            report.residual = residual;
            report.c_star = current;
            report.policy = std::move(full.policy);
            break;
        }

        if (history.size() == depth)
            history.erase(history.begin());
        history.push_back(current.values());

        Vec next = current.values();
        for (std::size_t ell : schedule.blocks_at(t)) {
            Vec view(current.size());
            for (std::size_t j = 0; j < partition.size(); ++j) {
                const std::size_t age = std::min(schedule.age(ell, j, t), history.size() - 1);
                const Vec& source = history[history.size() - 1 - age];
                for (std::size_t idx : partition[j])
                    view[idx] = source[idx];
            }
            const CostVector updated = model.bellman(CostVector(std::move(view))).value;
            for (std::size_t idx : partition[ell])
                next[idx] = updated[idx];
        }
        current = CostVector(std::move(next));
    }
    detail::attach_certificate(model, report);
    return report;
}

/// True-parallel asynchronous VI: one owner thread per block writes its own
/// components of a shared iterate and reads the rest without locks. A
/// monitor thread certifies a snapshot once its Bellman residual passes and
/// that certified snapshot is returned. The interleaving is equivalent to
/// some admissible schedule, so the limit is the same fixed point; traces
/// are not reproducible and only the start/end points are recorded.
template <SemilinearModel M>
SolveReport solve_async_vi_parallel(const M& model, std::vector<std::vector<std::size_t>> partition,
                                    const SolverConfig& config) {
    config.validate();
    AsyncSchedule shape(partition, AsyncSchedule::Kind::synchronous);
    if (shape.dimension() != model.dimension())
        throw ConfigError("solve_async_vi_parallel: partition does not cover the model dimension");

    SolveReport report;
    report.engine = "async-vi-parallel";
    report.tolerance = config.tolerance;

    const std::size_t n = model.dimension();
    CostVector initial = detail::resolve_initial_c(model, config);
    std::vector<std::atomic<double>> shared(n);
    for (std::size_t i = 0; i < n; ++i)
        shared[i].store(initial[i], std::memory_order_relaxed);

    std::atomic<bool> stop{false};
    std::atomic<std::size_t> sweeps{0};

    auto snapshot = [&] {
        Vec v(n);
        for (std::size_t i = 0; i < n; ++i)
            v[i] = shared[i].load(std::memory_order_relaxed);
        return v;
    };

    std::vector<std::thread> owners;
    owners.reserve(partition.size());
    for (const auto& block : partition) {
        owners.emplace_back([&, block] {
            while (!stop.load(std::memory_order_relaxed)) {
                const CostVector view{snapshot()};
                const CostVector updated = model.bellman(view).value;
                for (std::size_t idx : block)
                    shared[idx].store(updated[idx], std::memory_order_relaxed);
                sweeps.fetch_add(1, std::memory_order_relaxed);
            }
        });
    }

    Vec certified;
    double residual = std::numeric_limits<double>::infinity();
    const std::size_t sweep_budget = config.max_iterations;
    report.trace.push_back({0, initial.values(), bellman_residual(model, initial)});
    while (true) {
        const Vec snap = snapshot();
        residual = bellman_residual(model, CostVector(snap));
        if (residual <= config.tolerance) {
            certified = snap;
            report.converged = true;
            break;
        }
        if (sweeps.load(std::memory_order_relaxed) >= sweep_budget) {
            certified = snap;
            report.converged = false;
            break;
        }
        std::this_thread::yield();
    }
    stop.store(true, std::memory_order_relaxed);
    for (auto& th : owners)
        th.join();

    report.iterations = sweeps.load(std::memory_order_relaxed);
    report.residual = residual;
    report.c_star = CostVector(certified);
    BellmanResult final = model.bellman(report.c_star);
    report.policy = std::move(final.policy);
    report.trace.push_back({report.iterations, certified, residual});
    detail::attach_certificate(model, report);
    return report;
}

// ---------------------------------------------------------------------------
// Policy iteration
// ---------------------------------------------------------------------------

/// Exact policy iteration: evaluate c_mu by a linear solve, improve through
/// the oracle at c_mu, stop when the improved policy no longer changes the
/// cost. Requires a stable initial policy as the witness that some policy
/// has finite cost. Policy costs decrease entrywise along the run; an
/// unstable policy showing up mid-run contradicts that and is reported as a
/// theory violation.
template <SemilinearModel M>
SolveReport solve_pi(const M& model, const SolverConfig& config) {
    config.validate();
    if (!config.initial_policy)
        throw ConfigError("solve_pi: an initial stable policy is required (see find_stable_policy)");

    SolveReport report;
    report.engine = "pi";
    report.tolerance = config.tolerance;

    StructuredPolicy policy = *config.initial_policy;
    if (policy.A.rows() != model.dimension())
        throw ContractViolation("solve_pi: initial policy dimension does not match the model");
    CostVector c = evaluate_policy(policy, model.discount());

    for (std::size_t k = 0;; ++k) {
        BellmanResult improved = model.bellman(c);
        const double residual = max_abs_diff(c.values(), improved.value.values());
        report.trace.push_back({k, c.values(), residual});

        const bool same_policy = improved.policy.A == policy.A && improved.policy.q == policy.q;
        if (residual <= config.tolerance || same_policy) {
            report.converged = true;
            report.iterations = k;
            report.residual = residual;
            report.c_star = c;
            report.policy = std::move(improved.policy);
            break;
        }
        if (k >= config.max_iterations) {
            report.converged = false;
            report.iterations = k;
            report.residual = residual;
            report.c_star = c;
            report.policy = std::move(improved.policy);
            break;
        }

        CostVector next;
        try {
            next = evaluate_policy(improved.policy, model.discount());
        } catch (const InstabilityError& e) {
            throw TheoryViolation("solve_pi: improvement step " + std::to_string(k + 1) +
                                  " produced an unstable policy (rho = " +
                                  std::to_string(e.spectral_radius()) +
                                  "), which contradicts policy iteration theory; the model data is "
                                  "likely defective");
        }
        const double change = max_abs_diff(next.values(), c.values());
        policy = std::move(improved.policy);
        c = std::move(next);
        if (change <= config.tolerance) {
            BellmanResult last = model.bellman(c);
            report.trace.push_back({k + 1, c.values(), max_abs_diff(c.values(), last.value.values())});
            report.converged = true;
            report.iterations = k + 1;
            report.residual = report.trace.back().residual;
            report.c_star = c;
            report.policy = std::move(last.policy);
            break;
        }
    }
    detail::attach_certificate(model, report);
    return report;
}

// ---------------------------------------------------------------------------
// Optimistic policy iteration
// ---------------------------------------------------------------------------

/// Builds a start satisfying c0 >= G(c0) when the config does not provide
/// one: the cost of the configured initial policy, or of a discovered stable
/// policy. Policy costs dominate G by definition, so they are valid starts.
template <SemilinearModel M>
CostVector optimistic_initial(const M& model, const SolverConfig& config) {
    if (config.initial_c) {
        const CostVector& c0 = *config.initial_c;
        if (c0.size() != model.dimension())
            throw ContractViolation("optimistic PI: initial cost vector length mismatch");
        const CostVector image = model.bellman(c0).value;
        if (!entrywise_leq(image.values(), c0.values(), 1e-12))
            throw ContractViolation(
                "optimistic PI requires c0 >= G(c0); evaluate a stable policy and inflate its cost "
                "vector to obtain a valid start");
        return c0;
    }
    if (config.initial_policy)
        return evaluate_policy(*config.initial_policy, model.discount());
    return evaluate_policy(find_stable_policy(model), model.discount());
}

/// Partial policy evaluation by l_k applications of G_mu in place of the
/// exact linear solve. Iterates decrease monotonically from the dominating
/// start and stay above the fixed point.
template <SemilinearModel M>
SolveReport solve_optimistic_pi(const M& model, const SolverConfig& config) {
    config.validate();
    SolveReport report;
    report.engine = "opi";
    report.tolerance = config.tolerance;

    CostVector c = optimistic_initial(model, config);
    const auto& depths = config.optimism_schedule;

    for (std::size_t k = 0;; ++k) {
        BellmanResult step = model.bellman(c);
        const double residual = max_abs_diff(c.values(), step.value.values());
        report.trace.push_back({k, c.values(), residual});
        if (residual <= config.tolerance || k >= config.max_iterations) {
            report.converged = residual <= config.tolerance;
            report.iterations = k;
            report.residual = residual;
            report.c_star = c;
            report.policy = std::move(step.policy);
            break;
        }
        const std::size_t depth = depths[std::min(k, depths.size() - 1)];
        CostVector next = std::move(step.value);
        for (std::size_t i = 1; i < depth; ++i)
            next = apply_G_mu(step.policy, next, model.discount());
        c = std::move(next);
    }
    detail::attach_certificate(model, report);
    return report;
}

// ---------------------------------------------------------------------------
// Mathematical programming (cutting planes on an internal dense simplex)
// ---------------------------------------------------------------------------

namespace detail {

template <SemilinearModel M>
std::vector<StructuredPolicy> initial_cuts(const M& model, const SolverConfig& config) {
    std::vector<StructuredPolicy> cuts;
    if (config.exhaustive_cuts) {
        if constexpr (std::is_same_v<M, TabulatedModel>) {
            for (const TabulatedPolicy& tp : model.policies())
                cuts.push_back({tp.A, tp.q, std::monostate{}});
        }
        if constexpr (std::is_same_v<M, PositiveLinearModel>) {
            for (StructuredPolicy& sp : model.sign_pattern_policies())
                cuts.push_back(std::move(sp));
        }
    }
    return cuts;
}

} // namespace detail

enum class Engine { vi, async_vi, pi, opi, lp };

inline const char* engine_name(Engine e) {
    switch (e) {
    case Engine::vi:
        return "vi";
    case Engine::async_vi:
        return "async-vi";
    case Engine::pi:
        return "pi";
    case Engine::opi:
        return "opi";
    case Engine::lp:
        return "lp";
    }
    return "?";
}

inline Engine parse_engine(const std::string& name) {
    if (name == "vi")
        return Engine::vi;
    if (name == "async-vi")
        return Engine::async_vi;
    if (name == "pi")
        return Engine::pi;
    if (name == "opi")
        return Engine::opi;
    if (name == "lp")
        return Engine::lp;
    throw ConfigError("unknown engine '" + name + "' (expected vi, async-vi, pi, opi, or lp)");
}

template <SemilinearModel M>
SolveReport solve_mathprog(const M& model, const SolverConfig& config);

/// Runs the requested engine, filling in runnable defaults where the config
/// leaves gaps: policy iteration searches for a stable initial policy, and
/// asynchronous VI falls back to a Gauss-Seidel sweep schedule.
template <SemilinearModel M>
SolveReport solve_with(const M& model, Engine engine, SolverConfig config = {}) {
    switch (engine) {
    case Engine::vi:
        return solve_vi(model, config);
    case Engine::async_vi:
        if (!config.async_schedule)
            config.async_schedule = AsyncSchedule::gauss_seidel(model.dimension());
        return solve_async_vi(model, config);
    case Engine::pi:
        if (!config.initial_policy)
            config.initial_policy = find_stable_policy(model);
        return solve_pi(model, config);
    case Engine::opi:
        return solve_optimistic_pi(model, config);
    case Engine::lp:
        return solve_mathprog(model, config);
    }
    throw ConfigError("solve_with: unhandled engine");
}

/// Maximizes sum_i c_i over { c >= 0, c <= G(c) }. Each oracle argmin mu at
/// the current LP optimum yields the violated linear constraint
/// (I - alpha A_mu') c <= q_mu; cuts accumulate until the optimum's Bellman
/// residual passes. The LP is kept bounded from the start by the box
/// c <= M 1, with M taken above a stable policy's cost (an upper bound on
/// the optimum), so the simplex never reports an unbounded ray.
template <SemilinearModel M>
SolveReport solve_mathprog(const M& model, const SolverConfig& config) {
    config.validate();
    SolveReport report;
    report.engine = "lp";
    report.tolerance = config.tolerance;

    const std::size_t n = model.dimension();
    const double alpha = model.discount();

    StructuredPolicy anchor =
        config.initial_policy ? *config.initial_policy : find_stable_policy(model);
    const CostVector anchor_cost = evaluate_policy(anchor, alpha);
    const double box = std::max(1.0, 1.25 * inf_norm(anchor_cost.values()));

    std::vector<StructuredPolicy> cuts = detail::initial_cuts(model, config);
    cuts.push_back(std::move(anchor));

    Vec objective(n, 1.0);
    for (std::size_t round = 0;; ++round) {
        const std::size_t rows = cuts.size() * n + n;
        Matrix lhs(rows, n);
        Vec rhs(rows, 0.0);
        for (std::size_t k = 0; k < cuts.size(); ++k) {
            const StructuredPolicy& mu = cuts[k];
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j)
                    lhs(k * n + i, j) = (i == j ? 1.0 : 0.0) - alpha * mu.A(j, i);
                rhs[k * n + i] = mu.q[i];
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            lhs(cuts.size() * n + i, i) = 1.0;
            rhs[cuts.size() * n + i] = box;
        }

        const LpSolution lp = simplex_maximize(lhs, rhs, objective);
        if (lp.status != LpSolution::Status::optimal)
            throw Error("solve_mathprog: boxed LP reported unbounded, which should be impossible");

        CostVector c(lp.x);
        BellmanResult step = model.bellman(c);
        const double residual = max_abs_diff(c.values(), step.value.values());
        report.trace.push_back({round, c.values(), residual});

        const bool duplicate =
            std::any_of(cuts.begin(), cuts.end(), [&](const StructuredPolicy& p) {
                return p.A == step.policy.A && p.q == step.policy.q;
            });

        if (residual <= config.tolerance || round >= config.max_iterations || duplicate) {
            report.converged = residual <= config.tolerance;
            report.iterations = round;
            report.residual = residual;
            report.c_star = c;
            report.policy = std::move(step.policy);
            break;
        }
        cuts.push_back(std::move(step.policy));
    }
    detail::attach_certificate(model, report);
    return report;
}

} // namespace psdp
