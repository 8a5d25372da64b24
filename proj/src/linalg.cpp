#include "mcdemod/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace mcdemod {

Matrix Matrix::identity(std::size_t dim) {
    Matrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) m.at(i, i) = 1.0;
    return m;
}

Matrix Matrix::transposed() const {
    Matrix m(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m.at(j, i) = at(i, j);
    return m;
}

bool solve_inplace(Matrix A, std::vector<double> b, std::vector<double>& x) {
    const std::size_t n = A.n;
    if (b.size() != n) throw std::invalid_argument("solve: dimension mismatch");

    double scale = 0.0;
    for (double v : A.a) scale = std::max(scale, std::abs(v));
    const double tiny = 1e-300 + 1e-14 * scale;

    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        double best = std::abs(A.at(perm[col], col));
        for (std::size_t r = col + 1; r < n; ++r) {
            const double v = std::abs(A.at(perm[r], col));
            if (v > best) { best = v; piv = r; }
        }
        if (best <= tiny) return false;
        std::swap(perm[col], perm[piv]);

        const double d = A.at(perm[col], col);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = A.at(perm[r], col) / d;
            if (f == 0.0) continue;
            A.at(perm[r], col) = 0.0;
            for (std::size_t c = col + 1; c < n; ++c) A.at(perm[r], c) -= f * A.at(perm[col], c);
            b[perm[r]] -= f * b[perm[col]];
        }
    }

    x.assign(n, 0.0);
    for (std::size_t ri = n; ri-- > 0;) {
        double acc = b[perm[ri]];
        for (std::size_t c = ri + 1; c < n; ++c) acc -= A.at(perm[ri], c) * x[c];
        x[ri] = acc / A.at(perm[ri], ri);
        if (!std::isfinite(x[ri])) return false;
    }
    return true;
}

std::vector<double> singular_values(const Matrix& A) {
    const std::size_t n = A.n;
    // Columns of U start as columns of A; plane rotations orthogonalize them.
    std::vector<double> U = A.a;
    auto col_dot = [&](std::size_t p, std::size_t q) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += U[i * n + p] * U[i * n + q];
        return s;
    };

    const int max_sweeps = 60;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double app = col_dot(p, p);
                const double aqq = col_dot(q, q);
                const double apq = col_dot(p, q);
                off = std::max(off, std::abs(apq) / (std::sqrt(app * aqq) + 1e-300));
                if (std::abs(apq) <= 1e-30 * (app + aqq)) continue;
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t i = 0; i < n; ++i) {
                    const double up = U[i * n + p];
                    const double uq = U[i * n + q];
                    U[i * n + p] = c * up - s * uq;
                    U[i * n + q] = s * up + c * uq;
                }
            }
        }
        if (off < 1e-15) break;
    }

    std::vector<double> sv(n);
    for (std::size_t p = 0; p < n; ++p) sv[p] = std::sqrt(std::max(0.0, col_dot(p, p)));
    std::sort(sv.begin(), sv.end(), std::greater<double>());
    return sv;
}

double condition_number(const Matrix& A) {
    const auto sv = singular_values(A);
    if (sv.empty()) throw std::invalid_argument("condition_number: empty matrix");
    const double lo = sv.back();
    if (lo <= 0.0 || !std::isfinite(lo))
        return std::numeric_limits<double>::infinity();
    return sv.front() / lo;
}

}  // namespace mcdemod
