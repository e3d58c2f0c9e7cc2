#pragma once

#include "psdp/errors.hpp"
#include "psdp/linalg.hpp"

#include <cstddef>
#include <limits>
#include <vector>

namespace psdp {

struct LpSolution {
    enum class Status { optimal, unbounded };
    Status status = Status::optimal;
    Vec x;
    double objective = 0.0;
};

/// Maximizes obj'x subject to a x <= b and x >= 0, for b >= 0, with a dense
/// primal simplex tableau. The nonnegative right-hand side makes the slack
/// basis feasible, so no phase-one is needed. Entering and leaving variables
/// follow Bland's smallest-index rule, which precludes cycling on degenerate
/// vertices.
inline LpSolution simplex_maximize(const Matrix& a, const Vec& b, const Vec& obj) {
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    if (b.size() != m || obj.size() != n)
        throw ContractViolation("simplex_maximize: dimension mismatch");
    for (double v : b)
        if (v < 0.0)
            throw ContractViolation("simplex_maximize: requires b >= 0 (slack basis start)");

    constexpr double kEps = 1e-11;
    const std::size_t width = n + m + 1;

    // Tableau rows: [A | I | b]; cost row holds reduced costs and -objective.
    std::vector<Vec> t(m, Vec(width, 0.0));
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j)
            t[i][j] = a(i, j);
        t[i][n + i] = 1.0;
        t[i][width - 1] = b[i];
    }
    Vec cost(width, 0.0);
    for (std::size_t j = 0; j < n; ++j)
        cost[j] = obj[j];

    std::vector<std::size_t> basis(m);
    for (std::size_t i = 0; i < m; ++i)
        basis[i] = n + i;

    const std::size_t max_pivots = 2000 + 200 * (m + n);
    for (std::size_t pivot_count = 0;; ++pivot_count) {
        if (pivot_count > max_pivots)
            throw Error("simplex_maximize: pivot budget exhausted");

        std::size_t entering = width;
        for (std::size_t j = 0; j + 1 < width; ++j) {
            if (cost[j] > kEps) {
                entering = j;
                break;
            }
        }
        if (entering == width)
            break;

        std::size_t leaving_row = m;
        double best_ratio = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < m; ++i) {
            if (t[i][entering] > kEps) {
                const double ratio = t[i][width - 1] / t[i][entering];
                if (ratio < best_ratio - kEps ||
                    (ratio < best_ratio + kEps && (leaving_row == m || basis[i] < basis[leaving_row]))) {
                    best_ratio = ratio;
                    leaving_row = i;
                }
            }
        }
        if (leaving_row == m)
            return {LpSolution::Status::unbounded, {}, std::numeric_limits<double>::infinity()};

        const double pivot = t[leaving_row][entering];
        for (std::size_t j = 0; j < width; ++j)
            t[leaving_row][j] /= pivot;
        for (std::size_t i = 0; i < m; ++i) {
            if (i == leaving_row || t[i][entering] == 0.0)
                continue;
            const double factor = t[i][entering];
            for (std::size_t j = 0; j < width; ++j)
                t[i][j] -= factor * t[leaving_row][j];
        }
        const double cfactor = cost[entering];
        if (cfactor != 0.0)
            for (std::size_t j = 0; j < width; ++j)
                cost[j] -= cfactor * t[leaving_row][j];
        basis[leaving_row] = entering;
    }

    LpSolution out;
    out.status = LpSolution::Status::optimal;
    out.x.assign(n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        if (basis[i] < n)
            out.x[basis[i]] = t[i][width - 1];
    for (double& v : out.x)
        if (v < 0.0 && v >= -1e-11)
            v = 0.0;
    out.objective = -cost[width - 1];
    double check = 0.0;
    for (std::size_t j = 0; j < n; ++j)
        check += obj[j] * out.x[j];
    out.objective = check;
    return out;
}

} // namespace psdp
