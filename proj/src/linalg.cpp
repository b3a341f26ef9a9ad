#include "pfdet/linalg.hpp"

#include "pfdet/errors.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace pfdet {

LuFactorization LuFactorization::compute(const Matrix& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("LU: matrix must be square");
    const int n = a.rows();

    LuFactorization f;
    f.lu = a;
    f.perm.resize(n);
    for (int i = 0; i < n; ++i) f.perm[i] = i;

    for (int k = 0; k < n; ++k) {
        int pivot_row = k;
        double pivot_mag = std::fabs(f.lu(k, k));
        for (int i = k + 1; i < n; ++i) {
            const double mag = std::fabs(f.lu(i, k));
            if (mag > pivot_mag) {
                pivot_mag = mag;
                pivot_row = i;
            }
        }
        if (pivot_mag == 0.0) {
            f.singular = true;
            f.log_abs_det = -std::numeric_limits<double>::infinity();
            return f;
        }
        if (pivot_row != k) {
            for (int j = 0; j < n; ++j) std::swap(f.lu(k, j), f.lu(pivot_row, j));
            std::swap(f.perm[k], f.perm[pivot_row]);
        }
        f.log_abs_det += std::log(std::fabs(f.lu(k, k)));
        const double inv_pivot = 1.0 / f.lu(k, k);
        for (int i = k + 1; i < n; ++i) {
            const double l = f.lu(i, k) * inv_pivot;
            f.lu(i, k) = l;
            for (int j = k + 1; j < n; ++j) f.lu(i, j) -= l * f.lu(k, j);
        }
    }
    return f;
}

std::vector<double> LuFactorization::solve(const std::vector<double>& b) const {
    if (singular) throw singular_matrix_error("LU solve: matrix is singular");
    const int n = lu.rows();
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = b[perm[i]];
    for (int i = 1; i < n; ++i) {
        double s = x[i];
        for (int j = 0; j < i; ++j) s -= lu(i, j) * x[j];
        x[i] = s;
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = x[i];
        for (int j = i + 1; j < n; ++j) s -= lu(i, j) * x[j];
        x[i] = s / lu(i, i);
    }
    return x;
}

Matrix LuFactorization::inverse() const {
    if (singular) throw singular_matrix_error("inverse: matrix is singular");
    const int n = lu.rows();
    Matrix inv(n, n);
    std::vector<double> e(n, 0.0);
    for (int j = 0; j < n; ++j) {
        e[j] = 1.0;
        const std::vector<double> col = solve(e);
        e[j] = 0.0;
        for (int i = 0; i < n; ++i) inv(i, j) = col[i];
    }
    return inv;
}

double log_abs_det(const Matrix& a) { return LuFactorization::compute(a).log_abs_det; }

double rcond(const Matrix& a) {
    const LuFactorization f = LuFactorization::compute(a);
    if (f.singular) return 0.0;
    const double na = a.norm1();
    const double ni = f.inverse().norm1();
    if (na == 0.0 || ni == 0.0) return 0.0;
    return 1.0 / (na * ni);
}

} // namespace pfdet
