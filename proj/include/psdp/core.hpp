#pragma once

#include "psdp/errors.hpp"
#include "psdp/linalg.hpp"

#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace psdp {

/// Nonnegative vector c parameterizing a linear cost function c'x.
class CostVector {
public:
    CostVector() = default;

    explicit CostVector(Vec values) : values_(std::move(values)) {
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (!std::isfinite(values_[i]))
                throw ContractViolation("CostVector: entry " + std::to_string(i) + " is not finite");
            if (values_[i] < 0.0)
                throw ContractViolation("CostVector: entry " + std::to_string(i) + " is negative (" +
                                        std::to_string(values_[i]) + ")");
        }
    }

    static CostVector zeros(std::size_t n) { return CostVector(Vec(n, 0.0)); }
    static CostVector constant(std::size_t n, double value) { return CostVector(Vec(n, value)); }

    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    const Vec& values() const { return values_; }

    bool operator==(const CostVector& other) const { return values_ == other.values_; }

private:
    Vec values_;
};

/// Per-component choices from finite control grids.
struct ComponentChoice {
    std::vector<std::size_t> indices;
};

/// Linear feedback u = L x.
struct GainControl {
    Matrix gain;
};

using ControlSpec = std::variant<std::monostate, ComponentChoice, GainControl>;

/// A policy in the structured class, together with the linear dynamics and
/// cost it induces: x_{k+1} = A x_k, stage cost q' x_k.
struct StructuredPolicy {
    Matrix A;
    Vec q;
    ControlSpec control;
};

inline void validate_policy(const StructuredPolicy& p) {
    if (p.A.rows() != p.A.cols())
        throw ContractViolation("StructuredPolicy: A must be square");
    if (p.q.size() != p.A.rows())
        throw ContractViolation("StructuredPolicy: q length does not match A");
    if (!p.A.is_nonnegative() || !p.A.all_finite())
        throw ContractViolation("StructuredPolicy: A must be nonnegative and finite");
    for (double v : p.q)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw ContractViolation("StructuredPolicy: q must be nonnegative and finite");
}

/// One-step minimization result: the new cost parameter and a policy that
/// attains it, so that value == G_mu(c) for the returned mu.
struct BellmanResult {
    CostVector value;
    StructuredPolicy policy;
};

template <typename M>
concept SemilinearModel = requires(const M& m, const CostVector& c) {
    { m.dimension() } -> std::convertible_to<std::size_t>;
    { m.discount() } -> std::convertible_to<double>;
    { m.bellman(c) } -> std::same_as<BellmanResult>;
};

struct TracePoint {
    std::size_t iteration;
    Vec c;
    double residual;
};

struct StabilityCertificate {
    bool is_stable;
    double spectral_radius;
};

struct SolveReport {
    std::string engine;
    CostVector c_star;
    StructuredPolicy policy;
    std::vector<TracePoint> trace;
    bool stable = false;
    double spectral_radius = std::numeric_limits<double>::quiet_NaN();
    std::size_t iterations = 0;
    bool converged = false;
    double residual = std::numeric_limits<double>::infinity();
    double tolerance = 0.0;
};

namespace detail {

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

inline void check_discount(double alpha) {
    if (!(alpha > 0.0) || alpha > 1.0 || !std::isfinite(alpha))
        throw ContractViolation("discount must lie in (0, 1]");
}

} // namespace detail

/// Dominant eigenvalue of alpha*A for nonnegative A, by power iteration on
/// the shifted matrix s*I + alpha*A with s at 5% of the row-sum bound. The
/// shift breaks the oscillation of periodic matrices and makes the Perron
/// root rho + s strictly dominant in modulus, while staying small enough
/// not to compress the spectral gap. Start vector is all ones; it always
/// overlaps the Perron vector, which is entrywise nonnegative. Exactly
/// nilpotent matrices are detected up front: if (alpha*A)^k maps the ones
/// vector to zero for some k <= n, the matrix power itself is zero and
/// rho = 0.
///
/// The Rayleigh estimates converge geometrically; Aitken extrapolation of
/// the sequence absorbs small spectral gaps within the iteration budget. A
/// defective dominant eigenvalue decays only harmonically and will not pass
/// the tolerance, so non-convergence throws IndeterminateStability rather
/// than silently claiming stability.
inline StabilityCertificate certify_stability(const Matrix& a, double alpha) {
    if (a.rows() != a.cols())
        throw ContractViolation("certify_stability: matrix must be square");
    if (!a.is_nonnegative() || !a.all_finite())
        throw ContractViolation("certify_stability: matrix must be nonnegative and finite");
    detail::check_discount(alpha);

    const std::size_t n = a.rows();
    constexpr double kMargin = 1e-10;
    constexpr double kRelTol = 1e-12;

    Vec w(n, 1.0);
    for (std::size_t k = 0; k < n; ++k) {
        w = a.multiply(w);
        bool all_zero = true;
        for (double v : w)
            all_zero = all_zero && v == 0.0;
        if (all_zero)
            return {true, 0.0};
    }

    const double shift = 0.05 * alpha * a.max_row_sum();
    const auto accept = [&](double shifted) -> StabilityCertificate {
        const double rho = std::max(shifted - shift, 0.0);
        return {rho < 1.0 - kMargin, rho};
    };

    Vec v(n, 1.0);
    double prev2 = 0.0, prev1 = 0.0;
    double accel_prev = 0.0;
    bool have_accel = false;
    const std::size_t budget = 10 * n * 100;
    for (std::size_t it = 0; it < budget; ++it) {
        Vec s = a.multiply(v);
        for (std::size_t i = 0; i < n; ++i)
            s[i] = alpha * s[i] + shift * v[i];
        const double rayleigh = detail::dot(v, s) / detail::dot(v, v);

        if (it >= 1 && std::abs(rayleigh - prev1) <= kRelTol * std::max(1.0, std::abs(rayleigh)))
            return accept(rayleigh);

        if (it >= 2) {
            const double denom = rayleigh - 2.0 * prev1 + prev2;
            if (std::abs(denom) > 1e-14 * std::max(1.0, std::abs(rayleigh))) {
                const double diff = rayleigh - prev1;
                const double accel = rayleigh - diff * diff / denom;
                if (have_accel && std::abs(accel - accel_prev) <= kRelTol * std::max(1.0, std::abs(accel)))
                    return accept(accel);
                accel_prev = accel;
                have_accel = true;
            } else {
                have_accel = false;
            }
        }

        prev2 = prev1;
        prev1 = rayleigh;
        const double scale = inf_norm(s);
        for (double& x : s)
            x /= scale;
        v = std::move(s);
    }
    throw IndeterminateStability("certify_stability: power iteration did not converge within " +
                                 std::to_string(budget) + " iterations");
}

/// G_mu(c) = q_mu + alpha * A_mu' c.
inline CostVector apply_G_mu(const StructuredPolicy& policy, const CostVector& c, double alpha) {
    validate_policy(policy);
    detail::check_discount(alpha);
    if (c.size() != policy.A.rows())
        throw ContractViolation("apply_G_mu: cost vector length does not match policy dimension");
    Vec out = policy.A.transpose_multiply(c.values());
    for (std::size_t j = 0; j < out.size(); ++j)
        out[j] = policy.q[j] + alpha * out[j];
    return CostVector(std::move(out));
}

/// One Bellman step through the model's minimization oracle.
template <SemilinearModel M>
BellmanResult apply_G(const M& model, const CostVector& c) {
    if (c.size() != model.dimension())
        throw ContractViolation("apply_G: cost vector length does not match model dimension");
    return model.bellman(c);
}

/// ||c - G(c)||_inf; zero exactly at the optimal cost parameter.
template <SemilinearModel M>
double bellman_residual(const M& model, const CostVector& c) {
    return max_abs_diff(c.values(), apply_G(model, c).value.values());
}

/// Cost parameter of a stable policy: the unique fixed point of G_mu,
/// c_mu' = q_mu' (I - alpha A_mu)^{-1}, computed by a dense LU solve of the
/// transposed system. Entries in [-1e-12, 0) are roundoff and clamped to
/// zero; anything more negative contradicts nonnegativity of the data and is
/// reported as a defect.
inline CostVector evaluate_policy(const StructuredPolicy& policy, double alpha) {
    validate_policy(policy);
    detail::check_discount(alpha);
    const std::size_t n = policy.q.size();

    const StabilityCertificate cert = certify_stability(policy.A, alpha);
    if (!cert.is_stable)
        throw InstabilityError("evaluate_policy: rho(alpha*A) = " + std::to_string(cert.spectral_radius) +
                                   " is not strictly below 1",
                               cert.spectral_radius);

    Matrix system(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            system(i, j) = (i == j ? 1.0 : 0.0) - alpha * policy.A(j, i);
    Vec c = lu_solve(std::move(system), policy.q);

    for (std::size_t i = 0; i < n; ++i) {
        if (c[i] < 0.0) {
            if (c[i] >= -1e-12)
                c[i] = 0.0;
            else
                throw TheoryViolation("evaluate_policy: component " + std::to_string(i) +
                                      " of the policy cost is negative (" + std::to_string(c[i]) +
                                      "); the model data contradicts nonnegativity");
        }
    }

    CostVector result(std::move(c));
    const CostVector image = apply_G_mu(policy, result, alpha);
    const double residual = max_abs_diff(result.values(), image.values());
    if (residual > 1e-9 * std::max(1.0, inf_norm(result.values())))
        throw TheoryViolation("evaluate_policy: linear solve residual " + std::to_string(residual) +
                              " exceeds tolerance; the system is badly conditioned");
    return result;
}

} // namespace psdp
