#pragma once

#include "psdp/core.hpp"
#include "psdp/errors.hpp"
#include "psdp/linalg.hpp"

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace psdp {

namespace detail {

inline void require(bool ok, const std::string& field, const std::string& message) {
    if (!ok)
        throw ValidationError(field, message);
}

inline void require_nonneg_vec(const Vec& v, const std::string& field) {
    for (std::size_t i = 0; i < v.size(); ++i)
        require(std::isfinite(v[i]) && v[i] >= 0.0, field + "[" + std::to_string(i) + "]",
                "must be finite and nonnegative");
}

inline void require_nonneg_matrix(const Matrix& m, const std::string& field) {
    require(m.all_finite() && m.is_nonnegative(), field, "must be finite and entrywise nonnegative");
}

/// Clamps entrywise roundoff in [-1e-12, 0) to zero; anything more negative
/// is a genuine sign violation and is left for the caller's validation.
inline void clamp_roundoff(Matrix& m) {
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            if (m(i, j) < 0.0 && m(i, j) >= -1e-12)
                m(i, j) = 0.0;
}

inline void clamp_roundoff(Vec& v) {
    for (double& x : v)
        if (x < 0.0 && x >= -1e-12)
            x = 0.0;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Bilinear family: x_{k+1} = A x + sum_i f_i(u^i) x^i, stage cost
// q'x + sum_i g_i(u^i) x^i, each u^i from a finite grid.
// ---------------------------------------------------------------------------

/// Finite control grid of one state component: column f and scalar cost g
/// per control. An "eliminated" component is the singleton grid {f=0, g=0}.
struct BilinearGrid {
    std::vector<Vec> f;
    std::vector<double> g;
};

class BilinearModel {
public:
    BilinearModel(Matrix a, Vec q, std::vector<BilinearGrid> components, double alpha)
        : a_(std::move(a)), q_(std::move(q)), components_(std::move(components)), alpha_(alpha) {
        const std::size_t n = a_.rows();
        detail::require(a_.cols() == n, "A", "must be square");
        detail::require_nonneg_matrix(a_, "A");
        detail::require(q_.size() == n, "q", "length must equal the state dimension");
        detail::require_nonneg_vec(q_, "q");
        detail::require(alpha_ > 0.0 && alpha_ <= 1.0, "alpha", "must lie in (0, 1]");
        detail::require(components_.size() == n, "components", "need one control grid per state component");
        for (std::size_t i = 0; i < n; ++i) {
            const auto& grid = components_[i];
            const std::string base = "components[" + std::to_string(i) + "]";
            detail::require(!grid.f.empty(), base, "control grid must be nonempty");
            detail::require(grid.f.size() == grid.g.size(), base, "f and g lists must have equal length");
            for (std::size_t u = 0; u < grid.f.size(); ++u) {
                detail::require(grid.f[u].size() == n, base + ".f[" + std::to_string(u) + "]",
                                "column length must equal the state dimension");
                detail::require_nonneg_vec(grid.f[u], base + ".f[" + std::to_string(u) + "]");
                detail::require(std::isfinite(grid.g[u]) && grid.g[u] >= 0.0,
                                base + ".g[" + std::to_string(u) + "]", "must be finite and nonnegative");
            }
        }
    }

    std::size_t dimension() const { return q_.size(); }
    double discount() const { return alpha_; }

    const Matrix& A() const { return a_; }
    const Vec& q() const { return q_; }
    const std::vector<BilinearGrid>& components() const { return components_; }

    /// Componentwise minimization over each grid; ties go to the lowest
    /// control index. Candidate values are computed with the same column
    /// arithmetic as apply_G_mu so the returned value equals G_mu(c) for the
    /// returned policy, bit for bit.
    BellmanResult bellman(const CostVector& c) const {
        const std::size_t n = dimension();
        if (c.size() != n)
            throw ContractViolation("BilinearModel::bellman: cost vector has wrong length");

        Matrix a_mu = a_;
        Vec q_mu(n, 0.0);
        Vec value(n, 0.0);
        ComponentChoice choice;
        choice.indices.resize(n);

        for (std::size_t i = 0; i < n; ++i) {
            const auto& grid = components_[i];
            double best = 0.0;
            std::size_t best_u = 0;
            for (std::size_t u = 0; u < grid.f.size(); ++u) {
                const double stage = q_[i] + grid.g[u];
                double coupling = 0.0;
                for (std::size_t j = 0; j < n; ++j)
                    coupling += (a_(j, i) + grid.f[u][j]) * c[j];
                const double candidate = stage + alpha_ * coupling;
                if (u == 0 || candidate < best) {
                    best = candidate;
                    best_u = u;
                }
            }
            choice.indices[i] = best_u;
            value[i] = best;
            q_mu[i] = q_[i] + grid.g[best_u];
            for (std::size_t j = 0; j < n; ++j)
                a_mu(j, i) = a_(j, i) + grid.f[best_u][j];
        }
        return {CostVector(std::move(value)), {std::move(a_mu), std::move(q_mu), std::move(choice)}};
    }

private:
    Matrix a_;
    Vec q_;
    std::vector<BilinearGrid> components_;
    double alpha_;
};

// ---------------------------------------------------------------------------
// Positive linear family: x_{k+1} = A x + B u, stage cost q'x + r'u, controls
// |u| <= H x. Policies are linear feedbacks u = L x with |L| <= H.
// ---------------------------------------------------------------------------

class PositiveLinearModel {
public:
    static constexpr std::size_t kMaxValidatedControls = 20;

    PositiveLinearModel(Matrix a, Matrix b, Vec q, Vec r, Matrix h, double alpha,
                        bool allow_unvalidated = false)
        : a_(std::move(a)), b_(std::move(b)), q_(std::move(q)), r_(std::move(r)), h_(std::move(h)),
          alpha_(alpha) {
        const std::size_t n = a_.rows();
        const std::size_t m = b_.cols();
        detail::require(a_.cols() == n, "A", "must be square");
        detail::require(a_.all_finite(), "A", "must be finite");
        detail::require(b_.rows() == n && b_.all_finite(), "B", "must be n x m and finite");
        detail::require(q_.size() == n, "q", "length must equal the state dimension");
        detail::require_nonneg_vec(q_, "q");
        detail::require(r_.size() == m, "r", "length must equal the control dimension");
        for (std::size_t i = 0; i < m; ++i)
            detail::require(std::isfinite(r_[i]), "r[" + std::to_string(i) + "]", "must be finite");
        detail::require(h_.rows() == m && h_.cols() == n, "H", "must be m x n");
        detail::require_nonneg_matrix(h_, "H");
        detail::require(alpha_ > 0.0 && alpha_ <= 1.0, "alpha", "must lie in (0, 1]");

        if (!allow_unvalidated) {
            detail::require(m <= kMaxValidatedControls, "B",
                            "positivity validation enumerates 2^m sign patterns and is capped at m = " +
                                std::to_string(kMaxValidatedControls) +
                                "; pass allow_unvalidated to accept the model unchecked");
            for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << m); ++bits) {
                const StructuredPolicy p = sign_pattern_policy(bits);
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < n; ++j)
                        detail::require(p.A(i, j) >= 0.0, "A",
                                        "closed loop A + B*L leaves the positive orthant under sign "
                                        "pattern " + std::to_string(bits));
                for (std::size_t j = 0; j < n; ++j)
                    detail::require(p.q[j] >= 0.0, "q",
                                    "stage cost q + L'r becomes negative under sign pattern " +
                                        std::to_string(bits));
            }
        }
    }

    std::size_t dimension() const { return q_.size(); }
    std::size_t control_dimension() const { return b_.cols(); }
    double discount() const { return alpha_; }

    const Matrix& A() const { return a_; }
    const Matrix& B() const { return b_; }
    const Vec& q() const { return q_; }
    const Vec& r() const { return r_; }
    const Matrix& H() const { return h_; }

    /// Gain rows are L_i = -sign(r_i + alpha * b_i'c) h_i', with sign(0) = +1.
    BellmanResult bellman(const CostVector& c) const {
        const std::size_t n = dimension();
        if (c.size() != n)
            throw ContractViolation("PositiveLinearModel::bellman: cost vector has wrong length");
        const std::size_t m = control_dimension();

        std::uint64_t bits = 0;
        for (std::size_t i = 0; i < m; ++i) {
            double bc = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                bc += b_(j, i) * c[j];
            const double kink = r_[i] + alpha_ * bc;
            if (kink >= 0.0)
                bits |= std::uint64_t{1} << i;
        }
        StructuredPolicy policy = sign_pattern_policy(bits);
        CostVector value = apply_G_mu(policy, c, alpha_);
        return {std::move(value), std::move(policy)};
    }

    /// Policy induced by the sign pattern encoded in `bits` (bit i set means
    /// sign +1 for control i, i.e. gain row -h_i').
    StructuredPolicy sign_pattern_policy(std::uint64_t bits) const {
        const std::size_t n = dimension();
        const std::size_t m = control_dimension();
        Matrix gain(m, n);
        for (std::size_t i = 0; i < m; ++i) {
            const double s = (bits >> i) & 1 ? 1.0 : -1.0;
            for (std::size_t j = 0; j < n; ++j)
                gain(i, j) = -s * h_(i, j);
        }
        Matrix a_mu = a_.plus(b_.multiply(gain));
        Vec q_mu = q_;
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t i = 0; i < m; ++i)
                q_mu[j] += gain(i, j) * r_[i];
        detail::clamp_roundoff(a_mu);
        detail::clamp_roundoff(q_mu);
        return {std::move(a_mu), std::move(q_mu), GainControl{std::move(gain)}};
    }

    /// All 2^m sign-pattern policies, the extreme points of the policy class.
    std::vector<StructuredPolicy> sign_pattern_policies() const {
        const std::size_t m = control_dimension();
        if (m > kMaxValidatedControls)
            throw BudgetExceeded("sign_pattern_policies: 2^" + std::to_string(m) +
                                 " patterns exceed the enumeration cap");
        std::vector<StructuredPolicy> out;
        out.reserve(std::size_t{1} << m);
        for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << m); ++bits)
            out.push_back(sign_pattern_policy(bits));
        return out;
    }

private:
    Matrix a_;
    Matrix b_;
    Vec q_;
    Vec r_;
    Matrix h_;
    double alpha_;
};

// ---------------------------------------------------------------------------
// Distribution-state MDP family: states are probability vectors, each
// component control picks a distribution column p_i(u^i) and cost g_i(u^i).
// ---------------------------------------------------------------------------

struct DistributionGrid {
    std::vector<Vec> p;
    std::vector<double> g;
};

class DistributionMDPModel {
public:
    DistributionMDPModel(std::vector<DistributionGrid> components, double alpha)
        : components_(std::move(components)), alpha_(alpha) {
        const std::size_t n = components_.size();
        detail::require(n > 0, "components", "must be nonempty");
        detail::require(alpha_ > 0.0 && alpha_ < 1.0, "alpha", "must lie in (0, 1)");
        for (std::size_t i = 0; i < n; ++i) {
            const auto& grid = components_[i];
            const std::string base = "components[" + std::to_string(i) + "]";
            detail::require(!grid.p.empty(), base, "control grid must be nonempty");
            detail::require(grid.p.size() == grid.g.size(), base, "p and g lists must have equal length");
            for (std::size_t u = 0; u < grid.p.size(); ++u) {
                const std::string field = base + ".p[" + std::to_string(u) + "]";
                detail::require(grid.p[u].size() == n, field, "distribution length must equal n");
                detail::require_nonneg_vec(grid.p[u], field);
                double sum = 0.0;
                for (double v : grid.p[u])
                    sum += v;
                detail::require(std::abs(sum - 1.0) <= 1e-12, field,
                                "entries must sum to 1 (got " + std::to_string(sum) + ")");
                detail::require(std::isfinite(grid.g[u]) && grid.g[u] >= 0.0,
                                base + ".g[" + std::to_string(u) + "]", "must be finite and nonnegative");
            }
        }
    }

    std::size_t dimension() const { return components_.size(); }
    double discount() const { return alpha_; }
    const std::vector<DistributionGrid>& components() const { return components_; }

    BellmanResult bellman(const CostVector& c) const {
        const std::size_t n = dimension();
        if (c.size() != n)
            throw ContractViolation("DistributionMDPModel::bellman: cost vector has wrong length");

        Matrix a_mu(n, n);
        Vec q_mu(n, 0.0);
        Vec value(n, 0.0);
        ComponentChoice choice;
        choice.indices.resize(n);

        for (std::size_t i = 0; i < n; ++i) {
            const auto& grid = components_[i];
            double best = 0.0;
            std::size_t best_u = 0;
            for (std::size_t u = 0; u < grid.p.size(); ++u) {
                double coupling = 0.0;
                for (std::size_t j = 0; j < n; ++j)
                    coupling += grid.p[u][j] * c[j];
                const double candidate = grid.g[u] + alpha_ * coupling;
                if (u == 0 || candidate < best) {
                    best = candidate;
                    best_u = u;
                }
            }
            choice.indices[i] = best_u;
            value[i] = best;
            q_mu[i] = grid.g[best_u];
            for (std::size_t j = 0; j < n; ++j)
                a_mu(j, i) = grid.p[best_u][j];
        }
        return {CostVector(std::move(value)), {std::move(a_mu), std::move(q_mu), std::move(choice)}};
    }

private:
    std::vector<DistributionGrid> components_;
    double alpha_;
};

// ---------------------------------------------------------------------------
// Tabulated family: an explicit finite list of (A, q) pairs. Minimization is
// componentwise across the list, so the effective policy class is the
// componentwise mixing closure of the listed policies.
// ---------------------------------------------------------------------------

struct TabulatedPolicy {
    Matrix A;
    Vec q;
};

class TabulatedModel {
public:
    TabulatedModel(std::vector<TabulatedPolicy> policies, double alpha)
        : policies_(std::move(policies)), alpha_(alpha) {
        detail::require(!policies_.empty(), "policies", "must list at least one policy");
        detail::require(alpha_ > 0.0 && alpha_ <= 1.0, "alpha", "must lie in (0, 1]");
        const std::size_t n = policies_.front().A.rows();
        for (std::size_t k = 0; k < policies_.size(); ++k) {
            const std::string base = "policies[" + std::to_string(k) + "]";
            detail::require(policies_[k].A.rows() == n && policies_[k].A.cols() == n, base + ".A",
                            "must be square with a dimension common to all policies");
            detail::require_nonneg_matrix(policies_[k].A, base + ".A");
            detail::require(policies_[k].q.size() == n, base + ".q", "length must equal the dimension");
            detail::require_nonneg_vec(policies_[k].q, base + ".q");
        }
    }

    std::size_t dimension() const { return policies_.front().A.rows(); }
    double discount() const { return alpha_; }
    const std::vector<TabulatedPolicy>& policies() const { return policies_; }

    BellmanResult bellman(const CostVector& c) const {
        const std::size_t n = dimension();
        if (c.size() != n)
            throw ContractViolation("TabulatedModel::bellman: cost vector has wrong length");

        Matrix a_mu(n, n);
        Vec q_mu(n, 0.0);
        Vec value(n, 0.0);
        ComponentChoice choice;
        choice.indices.resize(n);

        for (std::size_t i = 0; i < n; ++i) {
            double best = 0.0;
            std::size_t best_k = 0;
            for (std::size_t k = 0; k < policies_.size(); ++k) {
                double coupling = 0.0;
                for (std::size_t j = 0; j < n; ++j)
                    coupling += policies_[k].A(j, i) * c[j];
                const double candidate = policies_[k].q[i] + alpha_ * coupling;
                if (k == 0 || candidate < best) {
                    best = candidate;
                    best_k = k;
                }
            }
            choice.indices[i] = best_k;
            value[i] = best;
            q_mu[i] = policies_[best_k].q[i];
            for (std::size_t j = 0; j < n; ++j)
                a_mu(j, i) = policies_[best_k].A(j, i);
        }
        return {CostVector(std::move(value)), {std::move(a_mu), std::move(q_mu), std::move(choice)}};
    }

private:
    std::vector<TabulatedPolicy> policies_;
    double alpha_;
};

} // namespace psdp
