#include "vpo/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vpo {

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

Matrix Matrix::operator*(const Matrix& rhs) const {
    assert(cols_ == rhs.rows_);
    Matrix out(rows_, rhs.cols_);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t k = 0; k < cols_; ++k) {
            const double a = (*this)(i, k);
            if (a == 0.0) continue;
            for (std::size_t j = 0; j < rhs.cols_; ++j) out(i, j) += a * rhs(k, j);
        }
    }
    return out;
}

Matrix Matrix::operator+(const Matrix& rhs) const {
    assert(rows_ == rhs.rows_ && cols_ == rhs.cols_);
    Matrix out = *this;
    for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] += rhs.data_[i];
    return out;
}

Matrix Matrix::operator-(const Matrix& rhs) const {
    assert(rows_ == rhs.rows_ && cols_ == rhs.cols_);
    Matrix out = *this;
    for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] -= rhs.data_[i];
    return out;
}

Vec Matrix::operator*(const Vec& v) const {
    assert(v.size() == cols_);
    Vec out(rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < cols_; ++j) s += (*this)(i, j) * v[j];
        out[i] = s;
    }
    return out;
}

Vec Matrix::transposed_times(const Vec& v) const {
    assert(v.size() == rows_);
    Vec out(cols_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
        const double a = v[i];
        if (a == 0.0) continue;
        for (std::size_t j = 0; j < cols_; ++j) out[j] += a * (*this)(i, j);
    }
    return out;
}

double Matrix::min_entry() const {
    double m = data_.empty() ? 0.0 : data_[0];
    for (double x : data_) m = std::min(m, x);
    return m;
}

double Matrix::max_abs() const {
    double m = 0.0;
    for (double x : data_) m = std::max(m, std::fabs(x));
    return m;
}

Vec solve_upper_triangular(const Matrix& U, const Vec& b) {
    const std::size_t n = U.rows();
    assert(U.cols() == n && b.size() == n);
    Vec x(b);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = x[ii];
        for (std::size_t j = ii + 1; j < n; ++j) s -= U(ii, j) * x[j];
        const double d = U(ii, ii);
        if (d == 0.0) throw std::runtime_error("singular triangular system");
        x[ii] = s / d;
    }
    return x;
}

Matrix invert_upper_triangular(const Matrix& U) {
    const std::size_t n = U.rows();
    Matrix inv(n, n);
    Vec e(n, 0.0);
    for (std::size_t c = 0; c < n; ++c) {
        std::fill(e.begin(), e.end(), 0.0);
        e[c] = 1.0;
        Vec col = solve_upper_triangular(U, e);
        for (std::size_t r = 0; r < n; ++r) inv(r, c) = col[r];
    }
    return inv;
}

void symmetric_eigen(Matrix a, Vec& values, Matrix& vectors, int max_sweeps) {
    const std::size_t n = a.rows();
    assert(a.cols() == n);
    vectors = Matrix::identity(n);
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::fabs(apq) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = vectors(k, p), vkq = vectors(k, q);
                    vectors(k, p) = c * vkp - s * vkq;
                    vectors(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    // Sort ascending, permuting eigenvector columns alongside.
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
    values.assign(n, 0.0);
    Matrix sorted(n, n);
    for (std::size_t c = 0; c < n; ++c) {
        values[c] = a(idx[c], idx[c]);
        for (std::size_t r = 0; r < n; ++r) sorted(r, c) = vectors(r, idx[c]);
    }
    vectors = sorted;
}

Vec symmetric_eigenvalues(Matrix a, int max_sweeps) {
    Vec values;
    Matrix vectors;
    symmetric_eigen(std::move(a), values, vectors, max_sweeps);
    return values;
}

double max_abs_diff(const Vec& a, const Vec& b) {
    assert(a.size() == b.size());
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

}  // namespace vpo
