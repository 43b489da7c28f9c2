#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "zorb/errors.hpp"

namespace zorb {

/// Dense 2-D matrix of doubles, row-major storage. Data follows the
/// column-per-sample convention throughout the library: an input batch is
/// d_in x n with one sample per column.
class Matrix {
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    /// Construct from nested initializer list (rows of values).
    Matrix(std::initializer_list<std::initializer_list<double>> init) {
        rows_ = init.size();
        cols_ = rows_ ? init.begin()->size() : 0;
        data_.reserve(rows_ * cols_);
        for (const auto& row : init) {
            if (row.size() != cols_) throw DimError("Matrix: ragged initializer list");
            data_.insert(data_.end(), row.begin(), row.end());
        }
    }

    static Matrix identity(std::size_t n) {
        Matrix I(n, n);
        for (std::size_t i = 0; i < n; ++i) I(i, i) = 1.0;
        return I;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    double* row_ptr(std::size_t r) { return data_.data() + r * cols_; }
    const double* row_ptr(std::size_t r) const { return data_.data() + r * cols_; }

    bool is_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    std::string shape_str() const {
        return std::to_string(rows_) + "x" + std::to_string(cols_);
    }

    Matrix& operator+=(const Matrix& o) {
        require_same_shape(o, "+=");
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }

    Matrix& operator-=(const Matrix& o) {
        require_same_shape(o, "-=");
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
        return *this;
    }

    Matrix& operator*=(double s) {
        for (double& v : data_) v *= s;
        return *this;
    }

    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

private:
    void require_same_shape(const Matrix& o, const char* op) const {
        if (!same_shape(o))
            throw DimError(std::string("Matrix ") + op + ": shape mismatch " + shape_str() +
                           " vs " + o.shape_str());
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
inline Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
inline Matrix operator*(Matrix a, double s) { return a *= s; }
inline Matrix operator*(double s, Matrix a) { return a *= s; }

/// C = A * B. Loop order keeps the inner traversal contiguous.
inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
        throw DimError("matmul: " + a.shape_str() + " * " + b.shape_str());
    Matrix c(a.rows(), b.cols());
    const std::size_t n = a.cols(), p = b.cols();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* ci = c.row_ptr(i);
        const double* ai = a.row_ptr(i);
        for (std::size_t k = 0; k < n; ++k) {
            const double aik = ai[k];
            if (aik == 0.0) continue;
            const double* bk = b.row_ptr(k);
            for (std::size_t j = 0; j < p; ++j) ci[j] += aik * bk[j];
        }
    }
    return c;
}

inline Matrix operator*(const Matrix& a, const Matrix& b) { return matmul(a, b); }

inline Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

/// Append a row of ones below a d x n matrix, yielding (d+1) x n.
/// This is the bias-augmentation used in every layer solve.
inline Matrix hstack_ones(const Matrix& x) {
    Matrix y(x.rows() + 1, x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) y(i, j) = x(i, j);
    for (std::size_t j = 0; j < x.cols(); ++j) y(x.rows(), j) = 1.0;
    return y;
}

/// Column vector broadcast: out(i,j) = a(i,j) + b(i,0).
inline Matrix add_col_broadcast(const Matrix& a, const Matrix& b) {
    if (b.cols() != 1 || b.rows() != a.rows())
        throw DimError("add_col_broadcast: " + a.shape_str() + " + " + b.shape_str());
    Matrix c = a;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double bi = b(i, 0);
        double* ci = c.row_ptr(i);
        for (std::size_t j = 0; j < a.cols(); ++j) ci[j] += bi;
    }
    return c;
}

inline double frobenius_norm(const Matrix& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* p = a.row_ptr(i);
        for (std::size_t j = 0; j < a.cols(); ++j) s += p[j] * p[j];
    }
    return std::sqrt(s);
}

inline double max_abs(const Matrix& a) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* p = a.row_ptr(i);
        for (std::size_t j = 0; j < a.cols(); ++j) m = std::max(m, std::abs(p[j]));
    }
    return m;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b))
        throw DimError("max_abs_diff: shape mismatch " + a.shape_str() + " vs " + b.shape_str());
    double m = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
    return m;
}

} // namespace zorb
