#pragma once

#include "pfdet/matrix.hpp"

namespace pfdet::kernels {

// The three hot loops of the likelihood evaluation, each in a serial
// reference version and an OpenMP version. Every output element is
// accumulated in the same fixed index order in both backends, and partial
// sums are combined in row order, so the two backends produce bitwise
// identical results for any thread count. The serial versions are kept as
// the oracle the parallel ones are tested against.

namespace serial {
// s = b * y
void unmix(const Matrix& b, const Matrix& y, Matrix& s);
// sum of |s_ij| over all entries (per-row sums combined in row order)
double l1_sum(const Matrix& s);
// g = sign(s) * y^T, elementwise sign with sign(0) = 0
void sign_cross(const Matrix& s, const Matrix& y, Matrix& g);
} // namespace serial

namespace parallel {
void unmix(const Matrix& b, const Matrix& y, Matrix& s);
double l1_sum(const Matrix& s);
void sign_cross(const Matrix& s, const Matrix& y, Matrix& g);
} // namespace parallel

// Backend toggle for the dispatching entry points below. Parallel by
// default; results do not depend on the choice.
void set_parallel(bool enabled);
bool parallel_enabled();

void unmix(const Matrix& b, const Matrix& y, Matrix& s);
double l1_sum(const Matrix& s);
void sign_cross(const Matrix& s, const Matrix& y, Matrix& g);

Matrix unmixed(const Matrix& b, const Matrix& y); // convenience, allocates s

} // namespace pfdet::kernels
