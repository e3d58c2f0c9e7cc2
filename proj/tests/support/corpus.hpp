#pragma once

// Seeded random instance generators for the test corpus. Every instance is
// feasible by construction: strictly positive minimum stage costs (so the
// N-stage cost from any nonzero state is positive) and dynamics scaled so
// both row and column sums of every policy matrix stay below a stability
// cap, which bounds the spectral radius and the transposed operator norm.

#include "psdp/core.hpp"
#include "psdp/markovjump.hpp"
#include "psdp/models.hpp"
#include "psdp/rng.hpp"
#include "psdp/stochastic.hpp"

#include <algorithm>
#include <cstdint>
#include <vector>

namespace psdp::testsupport {

inline Vec random_simplex(CounterRng& rng, std::size_t k) {
    Vec v(k);
    double sum = 0.0;
    for (double& x : v) {
        x = rng.next_double(0.01, 1.0);
        sum += x;
    }
    for (double& x : v)
        x /= sum;
    // Renormalize the roundoff into the largest entry so the sum is exact.
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < k; ++i)
        acc += v[i];
    v[k - 1] = 1.0 - acc;
    return v;
}

inline double norm_cap(const Matrix& m) { return std::max(m.max_row_sum(), m.transposed().max_row_sum()); }

inline Matrix random_nonneg(CounterRng& rng, std::size_t rows, std::size_t cols, double density = 0.8) {
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            if (rng.next_double() < density)
                m(i, j) = rng.next_double(0.0, 1.0);
    return m;
}

inline double pick_alpha(CounterRng& rng, bool allow_one = true) {
    if (allow_one && rng.next_below(4) == 0)
        return 1.0;
    return rng.next_double(0.3, 0.98);
}

inline TabulatedModel random_tabulated(std::uint64_t seed) {
    CounterRng rng(seed, 101);
    const std::size_t n = 1 + rng.next_below(5);
    const std::size_t num_policies = 2 + rng.next_below(5);
    const double alpha = pick_alpha(rng);
    const double cap = rng.next_double(0.3, 0.88) / alpha;

    std::vector<TabulatedPolicy> policies;
    for (std::size_t k = 0; k < num_policies; ++k) {
        Matrix a = random_nonneg(rng, n, n);
        const double scale = cap / std::max(1e-9, norm_cap(a));
        a = a.scaled(std::min(1.0, scale));
        Vec q(n);
        for (double& v : q)
            v = rng.next_double(0.05, 2.0);
        policies.push_back({std::move(a), std::move(q)});
    }
    return TabulatedModel(std::move(policies), alpha);
}

inline BilinearModel random_bilinear(std::uint64_t seed) {
    CounterRng rng(seed, 102);
    const std::size_t n = 1 + rng.next_below(4);
    const double alpha = pick_alpha(rng);
    const double cap = rng.next_double(0.3, 0.85) / alpha;

    Matrix a = random_nonneg(rng, n, n, 0.7);
    std::vector<BilinearGrid> grids(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t num_controls = 1 + rng.next_below(8);
        for (std::size_t u = 0; u < num_controls; ++u) {
            Vec f(n, 0.0);
            for (double& v : f)
                if (rng.next_double() < 0.6)
                    v = rng.next_double(0.0, 0.6);
            grids[i].f.push_back(std::move(f));
            grids[i].g.push_back(rng.next_double(0.0, 1.0));
        }
    }

    // Worst-case closed loop: A plus the entrywise max of each component's
    // columns. One joint scale keeps every policy inside the cap.
    Matrix worst = a;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double hi = 0.0;
            for (const Vec& f : grids[i].f)
                hi = std::max(hi, f[j]);
            worst(j, i) += hi;
        }
    const double scale = std::min(1.0, cap / std::max(1e-9, norm_cap(worst)));
    a = a.scaled(scale);
    for (auto& grid : grids)
        for (Vec& f : grid.f)
            for (double& v : f)
                v *= scale;

    Vec q(n);
    for (double& v : q)
        v = rng.next_double(0.05, 1.5);
    return BilinearModel(std::move(a), std::move(q), std::move(grids), alpha);
}

inline PositiveLinearModel random_positive_linear(std::uint64_t seed) {
    CounterRng rng(seed, 103);
    const std::size_t n = 1 + rng.next_below(4);
    const std::size_t m = 1 + rng.next_below(3);
    const double alpha = pick_alpha(rng);
    const double cap = rng.next_double(0.3, 0.85) / alpha;

    Matrix h = random_nonneg(rng, m, n, 0.8).scaled(0.4);
    Matrix b(n, m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
            b(i, j) = rng.next_double(-0.6, 0.6);

    Matrix abs_bh(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < m; ++k)
                s += std::abs(b(i, k)) * h(k, j);
            abs_bh(i, j) = s;
        }
    Matrix a = abs_bh.plus(random_nonneg(rng, n, n, 0.8).scaled(0.8));
    const Matrix worst = a.plus(abs_bh);
    const double scale = std::min(1.0, cap / std::max(1e-9, norm_cap(worst)));
    a = a.scaled(scale);
    b = b.scaled(scale);

    Vec r(m);
    for (double& v : r)
        v = rng.next_double(-0.5, 0.5);
    Vec q(n);
    for (std::size_t j = 0; j < n; ++j) {
        double bound = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            bound += h(i, j) * std::abs(r[i]);
        q[j] = bound + rng.next_double(0.05, 1.0);
    }
    return PositiveLinearModel(std::move(a), std::move(b), std::move(q), std::move(r), std::move(h),
                               alpha);
}

inline DistributionMDPModel random_distribution_mdp(std::uint64_t seed) {
    CounterRng rng(seed, 104);
    const std::size_t n = 2 + rng.next_below(4);
    const double alpha = rng.next_double(0.3, 0.95);
    std::vector<DistributionGrid> grids(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t num_controls = 1 + rng.next_below(8);
        for (std::size_t u = 0; u < num_controls; ++u) {
            grids[i].p.push_back(random_simplex(rng, n));
            grids[i].g.push_back(rng.next_double(0.05, 2.0));
        }
    }
    return DistributionMDPModel(std::move(grids), alpha);
}

inline StochasticPositiveLinearModel random_stochastic(std::uint64_t seed) {
    CounterRng rng(seed, 105);
    const std::size_t n = 1 + rng.next_below(4);
    const std::size_t m = 1 + rng.next_below(2);
    const double alpha = pick_alpha(rng);
    const double cap = rng.next_double(0.35, 0.6) / alpha;

    Matrix h = random_nonneg(rng, m, n, 0.8).scaled(0.3);
    Matrix b(n, m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
            b(i, j) = rng.next_double(-0.5, 0.5);
    Matrix abs_bh(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < m; ++k)
                s += std::abs(b(i, k)) * h(k, j);
            abs_bh(i, j) = s;
        }
    Matrix a = abs_bh.plus(random_nonneg(rng, n, n, 0.9).scaled(0.8));
    const double scale = std::min(1.0, cap / std::max(1e-9, norm_cap(a.plus(abs_bh))));
    a = a.scaled(scale);
    b = b.scaled(scale);

    Vec r(m);
    for (double& v : r)
        v = rng.next_double(-0.4, 0.4);
    Vec q(n);
    for (std::size_t j = 0; j < n; ++j) {
        double bound = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            bound += h(i, j) * std::abs(r[i]);
        q[j] = bound + rng.next_double(0.1, 1.0);
    }

    // Per-theta data: one joint factor per theta keeps the worst-case
    // feedback bounds intact and the spread gives the rollouts real
    // variance.
    const std::size_t num_thetas = 2 + rng.next_below(2);
    const Vec probs = random_simplex(rng, num_thetas);
    std::vector<ThetaComponent> thetas(num_thetas);
    for (std::size_t t = 0; t < num_thetas; ++t) {
        const double sys = rng.next_double(0.6, 1.4);
        const double cost = rng.next_double(0.7, 1.3);
        thetas[t].label = "theta" + std::to_string(t);
        thetas[t].prob = probs[t];
        thetas[t].A = a.scaled(sys);
        thetas[t].B = b.scaled(sys);
        Vec qt = q;
        Vec rt = r;
        for (double& v : qt)
            v *= cost;
        for (double& v : rt)
            v *= cost;
        thetas[t].q = std::move(qt);
        thetas[t].r = std::move(rt);
    }
    return StochasticPositiveLinearModel(std::move(thetas), std::move(h), alpha);
}

inline JumpProblem random_jump_tabulated(std::uint64_t seed) {
    CounterRng rng(seed, 106);
    const std::size_t r = 2;
    const std::size_t n = 2;
    const double alpha = pick_alpha(rng);

    Matrix p(r, r);
    double max_col_sum = 0.0;
    for (std::size_t i = 0; i < r; ++i) {
        const Vec row = random_simplex(rng, r);
        for (std::size_t j = 0; j < r; ++j)
            p(i, j) = row[j];
    }
    for (std::size_t j = 0; j < r; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < r; ++i)
            s += p(i, j);
        max_col_sum = std::max(max_col_sum, s);
    }
    const double cap = rng.next_double(0.3, 0.85) / (alpha * std::max(1.0, max_col_sum));

    std::vector<JumpTabulatedMode> modes(r);
    for (std::size_t theta = 0; theta < r; ++theta) {
        const std::size_t num_policies = 2 + rng.next_below(3);
        for (std::size_t k = 0; k < num_policies; ++k) {
            ModePolicyData data;
            for (std::size_t w = 0; w < r; ++w) {
                Matrix a = random_nonneg(rng, n, n);
                a = a.scaled(std::min(1.0, cap / std::max(1e-9, norm_cap(a))));
                Vec q(n);
                for (double& v : q)
                    v = rng.next_double(0.1, 2.0);
                data.A.push_back(std::move(a));
                data.q.push_back(std::move(q));
            }
            modes[theta].policies.push_back(std::move(data));
        }
    }
    return JumpProblem(std::move(p), std::move(modes), alpha);
}

inline JumpProblem random_jump_linear(std::uint64_t seed) {
    CounterRng rng(seed, 107);
    const std::size_t r = 2;
    const std::size_t n = 2;
    const std::size_t m = 1;
    const double alpha = pick_alpha(rng);

    Matrix p(r, r);
    double max_col_sum = 0.0;
    for (std::size_t i = 0; i < r; ++i) {
        const Vec row = random_simplex(rng, r);
        for (std::size_t j = 0; j < r; ++j)
            p(i, j) = row[j];
    }
    for (std::size_t j = 0; j < r; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < r; ++i)
            s += p(i, j);
        max_col_sum = std::max(max_col_sum, s);
    }
    const double cap = rng.next_double(0.3, 0.8) / (alpha * std::max(1.0, max_col_sum));

    std::vector<JumpLinearMode> modes(r);
    for (std::size_t theta = 0; theta < r; ++theta) {
        Matrix h = random_nonneg(rng, m, n, 0.9).scaled(0.3);
        Matrix b(n, m);
        for (std::size_t i = 0; i < n; ++i)
            b(i, 0) = rng.next_double(-0.5, 0.5);
        Matrix abs_bh(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                abs_bh(i, j) = std::abs(b(i, 0)) * h(0, j);
        Matrix a = abs_bh.plus(random_nonneg(rng, n, n, 0.9).scaled(0.8));
        const double scale = std::min(1.0, cap / std::max(1e-9, norm_cap(a.plus(abs_bh))));
        a = a.scaled(scale);
        b = b.scaled(scale);
        Vec rvec(m);
        rvec[0] = rng.next_double(-0.4, 0.4);
        Vec q(n);
        for (std::size_t j = 0; j < n; ++j)
            q[j] = h(0, j) * std::abs(rvec[0]) + rng.next_double(0.1, 1.0);
        modes[theta] = {std::move(a), std::move(b), std::move(q), std::move(rvec), std::move(h)};
    }
    return JumpProblem(std::move(p), std::move(modes), alpha);
}

/// Closed-form optimum of a scalar tabulated model: the cheapest stable
/// policy's geometric-series value.
inline double scalar_tabulated_fixed_point(const TabulatedModel& model) {
    double best = std::numeric_limits<double>::infinity();
    for (const TabulatedPolicy& pol : model.policies()) {
        const double a = model.discount() * pol.A(0, 0);
        if (a < 1.0)
            best = std::min(best, pol.q[0] / (1.0 - a));
    }
    return best;
}

} // namespace psdp::testsupport
