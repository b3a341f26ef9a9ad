#pragma once

#include "pfdet/matrix.hpp"

#include <vector>

namespace pfdet {

// LU factorization with partial pivoting of a square matrix. log|det| is
// accumulated from the log-magnitudes of the pivots, never from the raw
// determinant, so it cannot overflow or underflow for well-sized problems.
struct LuFactorization {
    Matrix lu;             // packed L (unit diagonal) over U
    std::vector<int> perm; // row permutation applied during pivoting
    bool singular = false; // an exactly zero pivot was hit
    double log_abs_det = 0.0;

    static LuFactorization compute(const Matrix& a);

    // Solve A x = b for one right-hand side (b has a single column).
    std::vector<double> solve(const std::vector<double>& b) const;

    Matrix inverse() const; // throws singular_matrix_error when singular
};

double log_abs_det(const Matrix& a); // -inf for exactly singular input

// Reciprocal condition number in the 1-norm, 1 / (|A|_1 |A^-1|_1).
// Returns 0 for singular input. Matrices here are small enough that the
// explicit inverse is the cheapest honest estimate.
double rcond(const Matrix& a);

} // namespace pfdet
