#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace vpo {

using Vec = std::vector<double>;

// Dense row-major matrix. Feeders of interest have at most a few hundred
// nodes, so dense storage and O(n^3) products are the simplest correct choice.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
    static Matrix diag(const Vec& d) {
        Matrix m(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) {
        assert(i < rows_ && j < cols_);
        return data_[i * cols_ + j];
    }
    double operator()(std::size_t i, std::size_t j) const {
        assert(i < rows_ && j < cols_);
        return data_[i * cols_ + j];
    }

    Matrix transposed() const;
    Matrix operator*(const Matrix& rhs) const;
    Matrix operator+(const Matrix& rhs) const;
    Matrix operator-(const Matrix& rhs) const;
    Vec operator*(const Vec& v) const;

    // y = A^T x without materializing the transpose.
    Vec transposed_times(const Vec& v) const;

    double min_entry() const;
    double max_abs() const;

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

// Solves U x = b for upper-triangular U with nonzero diagonal.
Vec solve_upper_triangular(const Matrix& U, const Vec& b);

// Inverse of an upper-triangular matrix via back substitution per column.
Matrix invert_upper_triangular(const Matrix& U);

// Eigenvalues of a small symmetric matrix (cyclic Jacobi), ascending order.
Vec symmetric_eigenvalues(Matrix a, int max_sweeps = 64);

// Full symmetric eigendecomposition; eigenvectors returned as the columns of
// `vectors`, paired with ascending eigenvalues.
void symmetric_eigen(Matrix a, Vec& values, Matrix& vectors, int max_sweeps = 64);

inline double dot(const Vec& a, const Vec& b) {
    assert(a.size() == b.size());
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double max_abs_diff(const Vec& a, const Vec& b);

}  // namespace vpo
