#pragma once

#include <cstddef>
#include <vector>

namespace mcdemod {

// Dense row-major square matrix. Demodulation bases are tiny (n <= 8), so the
// solver below favours robustness over asymptotics.
struct Matrix {
    std::size_t n = 0;
    std::vector<double> a;  // row-major, n*n entries

    Matrix() = default;
    explicit Matrix(std::size_t dim) : n(dim), a(dim * dim, 0.0) {}

    double& at(std::size_t i, std::size_t j) { return a[i * n + j]; }
    double at(std::size_t i, std::size_t j) const { return a[i * n + j]; }

    static Matrix identity(std::size_t dim);
    Matrix transposed() const;
};

// Gaussian elimination with partial pivoting. Returns false (and leaves x
// unspecified) when a pivot degenerates below tiny * max|A|.
bool solve_inplace(Matrix A, std::vector<double> b, std::vector<double>& x);

// Singular values in decreasing order, via one-sided Jacobi orthogonalization.
// Accurate enough at these sizes without forming A^T A explicitly.
std::vector<double> singular_values(const Matrix& A);

// sigma_max / sigma_min; +infinity when the matrix is numerically singular.
double condition_number(const Matrix& A);

}  // namespace mcdemod
