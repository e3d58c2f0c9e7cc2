#pragma once

#include "psdp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <vector>

namespace psdp {

using Vec = std::vector<double>;

/// Dense row-major matrix. Sized for the small systems this library targets;
/// no sparse storage, no expression templates.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    /// Construct from nested initializer lists, row by row.
    Matrix(std::initializer_list<std::initializer_list<double>> rows) {
        rows_ = rows.size();
        cols_ = rows_ == 0 ? 0 : rows.begin()->size();
        data_.reserve(rows_ * cols_);
        for (const auto& row : rows) {
            if (row.size() != cols_)
                throw ContractViolation("Matrix initializer rows have unequal lengths");
            data_.insert(data_.end(), row.begin(), row.end());
        }
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i)
            m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    const std::vector<double>& data() const { return data_; }

    bool operator==(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_ && data_ == other.data_;
    }

    bool is_nonnegative() const {
        return std::all_of(data_.begin(), data_.end(), [](double v) { return v >= 0.0; });
    }

    bool all_finite() const {
        return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
    }

    /// y = A x
    Vec multiply(const Vec& x) const {
        if (x.size() != cols_)
            throw ContractViolation("Matrix::multiply: dimension mismatch");
        Vec y(rows_, 0.0);
        for (std::size_t i = 0; i < rows_; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < cols_; ++j)
                s += data_[i * cols_ + j] * x[j];
            y[i] = s;
        }
        return y;
    }

    /// y = A' x
    Vec transpose_multiply(const Vec& x) const {
        if (x.size() != rows_)
            throw ContractViolation("Matrix::transpose_multiply: dimension mismatch");
        Vec y(cols_, 0.0);
        for (std::size_t j = 0; j < cols_; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < rows_; ++i)
                s += data_[i * cols_ + j] * x[i];
            y[j] = s;
        }
        return y;
    }

    Matrix multiply(const Matrix& other) const {
        if (cols_ != other.rows_)
            throw ContractViolation("Matrix::multiply: dimension mismatch");
        Matrix out(rows_, other.cols_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t k = 0; k < cols_; ++k) {
                const double a = data_[i * cols_ + k];
                if (a == 0.0)
                    continue;
                for (std::size_t j = 0; j < other.cols_; ++j)
                    out(i, j) += a * other(k, j);
            }
        return out;
    }

    Matrix transposed() const {
        Matrix out(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j)
                out(j, i) = data_[i * cols_ + j];
        return out;
    }

    Matrix scaled(double s) const {
        Matrix out = *this;
        for (double& v : out.data_)
            v *= s;
        return out;
    }

    Matrix plus(const Matrix& other) const {
        if (rows_ != other.rows_ || cols_ != other.cols_)
            throw ContractViolation("Matrix::plus: dimension mismatch");
        Matrix out = *this;
        for (std::size_t k = 0; k < data_.size(); ++k)
            out.data_[k] += other.data_[k];
        return out;
    }

    double max_row_sum() const {
        double m = 0.0;
        for (std::size_t i = 0; i < rows_; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < cols_; ++j)
                s += std::abs(data_[i * cols_ + j]);
            m = std::max(m, s);
        }
        return m;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline double inf_norm(const Vec& v) {
    double m = 0.0;
    for (double x : v)
        m = std::max(m, std::abs(x));
    return m;
}

inline double max_abs_diff(const Vec& a, const Vec& b) {
    if (a.size() != b.size())
        throw ContractViolation("max_abs_diff: dimension mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline bool entrywise_leq(const Vec& a, const Vec& b, double slack = 0.0) {
    if (a.size() != b.size())
        throw ContractViolation("entrywise_leq: dimension mismatch");
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] > b[i] + slack)
            return false;
    return true;
}

/// Solves A x = b by LU factorization with partial pivoting. A is consumed
/// by value. Throws on (numerically) singular A.
inline Vec lu_solve(Matrix a, Vec b) {
    const std::size_t n = a.rows();
    if (a.cols() != n || b.size() != n)
        throw ContractViolation("lu_solve: matrix must be square and match b");

    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i)
        perm[i] = i;

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t pivot = k;
        double best = std::abs(a(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            const double v = std::abs(a(i, k));
            if (v > best) {
                best = v;
                pivot = i;
            }
        }
        if (best == 0.0)
            throw ContractViolation("lu_solve: singular matrix");
        if (pivot != k) {
            for (std::size_t j = 0; j < n; ++j)
                std::swap(a(k, j), a(pivot, j));
            std::swap(b[k], b[pivot]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const double factor = a(i, k) / a(k, k);
            a(i, k) = factor;
            for (std::size_t j = k + 1; j < n; ++j)
                a(i, j) -= factor * a(k, j);
            b[i] -= factor * b[k];
        }
    }

    Vec x(n, 0.0);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t j = ii + 1; j < n; ++j)
            s -= a(ii, j) * x[j];
        x[ii] = s / a(ii, ii);
    }
    return x;
}

} // namespace psdp
