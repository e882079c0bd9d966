#pragma once

// Small dense linear algebra for the dimensions this library targets (n <= 10).

#include "isohull/errors.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace isohull {

using Vector = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b)
{
    assert(a.size() == b.size());
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

/// Row-major dense matrix.
class Matrix
{
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n)
    {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            m(i, i) = 1.0;
        }
        return m;
    }

    static Matrix scaled_identity(std::size_t n, double s)
    {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            m(i, i) = s;
        }
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

    std::span<const double> data() const noexcept { return data_; }

    Matrix transposed() const
    {
        Matrix t(cols_, rows_);
        for (std::size_t r = 0; r < rows_; ++r) {
            for (std::size_t c = 0; c < cols_; ++c) {
                t(c, r) = (*this)(r, c);
            }
        }
        return t;
    }

    double trace() const
    {
        double s = 0.0;
        for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) {
            s += (*this)(i, i);
        }
        return s;
    }

    Matrix& operator*=(double s)
    {
        for (auto& v : data_) {
            v *= s;
        }
        return *this;
    }

    Matrix& operator+=(const Matrix& o)
    {
        assert(rows_ == o.rows_ && cols_ == o.cols_);
        for (std::size_t i = 0; i < data_.size(); ++i) {
            data_[i] += o.data_[i];
        }
        return *this;
    }

    friend Matrix operator*(const Matrix& a, const Matrix& b)
    {
        assert(a.cols_ == b.rows_);
        Matrix p(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i) {
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const double aik = a(i, k);
                for (std::size_t j = 0; j < b.cols_; ++j) {
                    p(i, j) += aik * b(k, j);
                }
            }
        }
        return p;
    }

    friend Matrix operator*(double s, Matrix m) { return m *= s; }

    Vector apply(std::span<const double> x) const
    {
        assert(x.size() == cols_);
        Vector y(rows_, 0.0);
        for (std::size_t r = 0; r < rows_; ++r) {
            y[r] = dot(row(r), x);
        }
        return y;
    }

    /// Largest |a_ij - a_ji|.
    double asymmetry() const
    {
        double worst = 0.0;
        for (std::size_t i = 0; i < rows_; ++i) {
            for (std::size_t j = i + 1; j < cols_; ++j) {
                worst = std::max(worst, std::abs((*this)(i, j) - (*this)(j, i)));
            }
        }
        return worst;
    }

    double max_abs_diff(const Matrix& o) const
    {
        assert(rows_ == o.rows_ && cols_ == o.cols_);
        double worst = 0.0;
        for (std::size_t i = 0; i < data_.size(); ++i) {
            worst = std::max(worst, std::abs(data_[i] - o.data_[i]));
        }
        return worst;
    }

    double max_abs() const
    {
        double worst = 0.0;
        for (double v : data_) {
            worst = std::max(worst, std::abs(v));
        }
        return worst;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Solves A x = b in place by Gaussian elimination with partial pivoting on a
/// row-major n x n buffer. Returns false when a pivot falls below min_pivot.
inline bool solve_in_place(std::span<double> a, std::span<double> b, std::size_t n, double min_pivot = 1e-14)
{
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        double best = std::abs(a[col * n + col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double v = std::abs(a[r * n + col]);
            if (v > best) {
                best = v;
                piv = r;
            }
        }
        if (best < min_pivot) {
            return false;
        }
        if (piv != col) {
            for (std::size_t c = col; c < n; ++c) {
                std::swap(a[piv * n + c], a[col * n + c]);
            }
            std::swap(b[piv], b[col]);
        }
        const double inv = 1.0 / a[col * n + col];
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r * n + col] * inv;
            if (f == 0.0) {
                continue;
            }
            for (std::size_t c = col + 1; c < n; ++c) {
                a[r * n + c] -= f * a[col * n + c];
            }
            b[r] -= f * b[col];
        }
    }
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t c = i + 1; c < n; ++c) {
            s -= a[i * n + c] * b[c];
        }
        b[i] = s / a[i * n + i];
    }
    return true;
}

/// Determinant by LU with partial pivoting.
inline double determinant(Matrix m)
{
    const std::size_t n = m.rows();
    assert(n == m.cols());
    double det = 1.0;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(m(r, col)) > std::abs(m(piv, col))) {
                piv = r;
            }
        }
        if (m(piv, col) == 0.0) {
            return 0.0;
        }
        if (piv != col) {
            for (std::size_t c = 0; c < n; ++c) {
                std::swap(m(piv, c), m(col, c));
            }
            det = -det;
        }
        det *= m(col, col);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = m(r, col) / m(col, col);
            for (std::size_t c = col + 1; c < n; ++c) {
                m(r, c) -= f * m(col, c);
            }
        }
    }
    return det;
}

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
/// Throws degenerate_error("not SPD") when a pivot is <= min_pivot or the
/// input is asymmetric beyond sym_tol.
inline Matrix cholesky(const Matrix& a, double min_pivot = 1e-14, double sym_tol = 1e-10)
{
    const std::size_t n = a.rows();
    if (n != a.cols()) {
        throw domain_error("cholesky: matrix is not square");
    }
    if (a.asymmetry() > sym_tol) {
        throw degenerate_error("not SPD: matrix is not symmetric");
    }
    Matrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) {
            d -= l(j, k) * l(j, k);
        }
        if (!(d > min_pivot)) {
            throw degenerate_error("not SPD: pivot " + std::to_string(j) + " is " + std::to_string(d));
        }
        l(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) {
                s -= l(i, k) * l(j, k);
            }
            l(i, j) = s / l(j, j);
        }
    }
    return l;
}

struct SymmetricEigen
{
    Vector values;
    Matrix vectors; // columns are eigenvectors
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Sweeps until the
/// off-diagonal Frobenius norm is below tol times the matrix scale.
inline SymmetricEigen jacobi_eigen(Matrix a, double tol = 1e-12, int max_sweeps = 100)
{
    const std::size_t n = a.rows();
    Matrix v = Matrix::identity(n);
    const double scale = std::max(a.max_abs(), 1e-300);
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                off += a(p, q) * a(p, q);
            }
        }
        if (std::sqrt(off) <= tol * scale) {
            break;
        }
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) {
                    continue;
                }
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    SymmetricEigen out{Vector(n), std::move(v)};
    for (std::size_t i = 0; i < n; ++i) {
        out.values[i] = a(i, i);
    }
    return out;
}

/// Symmetric inverse square root S^{-1/2} of an SPD matrix.
inline Matrix inverse_sqrt_spd(const Matrix& s)
{
    const auto eig = jacobi_eigen(s);
    const std::size_t n = s.rows();
    Matrix out(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        if (!(eig.values[k] > 0.0)) {
            throw degenerate_error("not SPD: eigenvalue " + std::to_string(eig.values[k]));
        }
        const double w = 1.0 / std::sqrt(eig.values[k]);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                out(i, j) += w * eig.vectors(i, k) * eig.vectors(j, k);
            }
        }
    }
    return out;
}

} // namespace isohull
