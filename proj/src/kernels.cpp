#include "pfdet/kernels.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace pfdet::kernels {

namespace {

std::atomic<bool> g_parallel{true};

inline double sign_of(double x) { return (x > 0.0) - (x < 0.0); }

inline void check_unmix_shapes(const Matrix& b, const Matrix& y, const Matrix& s) {
    if (b.cols() != y.rows()) throw std::invalid_argument("unmix: b.cols() != y.rows()");
    if (s.rows() != b.rows() || s.cols() != y.cols())
        throw std::invalid_argument("unmix: output shape mismatch");
}

inline void check_cross_shapes(const Matrix& s, const Matrix& y, const Matrix& g) {
    if (s.cols() != y.cols()) throw std::invalid_argument("sign_cross: column counts differ");
    if (g.rows() != s.rows() || g.cols() != y.rows())
        throw std::invalid_argument("sign_cross: output shape mismatch");
}

// One output row of s = b * y, accumulated over k in ascending order.
inline void unmix_row(const Matrix& b, const Matrix& y, Matrix& s, int i) {
    const int t_len = y.cols();
    double* si = s.row(i);
    for (int t = 0; t < t_len; ++t) si[t] = 0.0;
    for (int k = 0; k < b.cols(); ++k) {
        const double bik = b(i, k);
        const double* yk = y.row(k);
        for (int t = 0; t < t_len; ++t) si[t] += bik * yk[t];
    }
}

inline double l1_row(const Matrix& s, int i) {
    const double* si = s.row(i);
    double acc = 0.0;
    for (int t = 0; t < s.cols(); ++t) acc += std::fabs(si[t]);
    return acc;
}

inline void sign_cross_row(const Matrix& s, const Matrix& y, Matrix& g, int i,
                           std::vector<double>& sign_buf) {
    const double* si = s.row(i);
    const int t_len = s.cols();
    sign_buf.resize(t_len);
    for (int t = 0; t < t_len; ++t) sign_buf[t] = sign_of(si[t]);
    for (int j = 0; j < y.rows(); ++j) {
        const double* yj = y.row(j);
        double acc = 0.0;
        for (int t = 0; t < t_len; ++t) acc += sign_buf[t] * yj[t];
        g(i, j) = acc;
    }
}

} // namespace

namespace serial {

void unmix(const Matrix& b, const Matrix& y, Matrix& s) {
    check_unmix_shapes(b, y, s);
    for (int i = 0; i < b.rows(); ++i) unmix_row(b, y, s, i);
}

double l1_sum(const Matrix& s) {
    double total = 0.0;
    for (int i = 0; i < s.rows(); ++i) total += l1_row(s, i);
    return total;
}

void sign_cross(const Matrix& s, const Matrix& y, Matrix& g) {
    check_cross_shapes(s, y, g);
    std::vector<double> sign_buf;
    for (int i = 0; i < s.rows(); ++i) sign_cross_row(s, y, g, i, sign_buf);
}

} // namespace serial

namespace parallel {

void unmix(const Matrix& b, const Matrix& y, Matrix& s) {
    check_unmix_shapes(b, y, s);
    const int rows = b.rows();
#pragma omp parallel for schedule(static)
    for (int i = 0; i < rows; ++i) unmix_row(b, y, s, i);
}

double l1_sum(const Matrix& s) {
    const int rows = s.rows();
    std::vector<double> row_sums(rows);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < rows; ++i) row_sums[i] = l1_row(s, i);
    double total = 0.0;
    for (int i = 0; i < rows; ++i) total += row_sums[i];
    return total;
}

void sign_cross(const Matrix& s, const Matrix& y, Matrix& g) {
    check_cross_shapes(s, y, g);
    const int rows = s.rows();
#pragma omp parallel
    {
        std::vector<double> sign_buf;
#pragma omp for schedule(static)
        for (int i = 0; i < rows; ++i) sign_cross_row(s, y, g, i, sign_buf);
    }
}

} // namespace parallel

void set_parallel(bool enabled) { g_parallel.store(enabled); }
bool parallel_enabled() { return g_parallel.load(); }

void unmix(const Matrix& b, const Matrix& y, Matrix& s) {
    if (g_parallel.load())
        parallel::unmix(b, y, s);
    else
        serial::unmix(b, y, s);
}

double l1_sum(const Matrix& s) {
    return g_parallel.load() ? parallel::l1_sum(s) : serial::l1_sum(s);
}

void sign_cross(const Matrix& s, const Matrix& y, Matrix& g) {
    if (g_parallel.load())
        parallel::sign_cross(s, y, g);
    else
        serial::sign_cross(s, y, g);
}

Matrix unmixed(const Matrix& b, const Matrix& y) {
    Matrix s(b.rows(), y.cols());
    unmix(b, y, s);
    return s;
}

} // namespace pfdet::kernels
