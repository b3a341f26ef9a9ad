#include "pfdet/likelihood.hpp"

#include "pfdet/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace pfdet {

namespace {

const double kSqrt2 = std::sqrt(2.0);
const double kLogSqrt2 = 0.5 * std::log(2.0);

void check_shapes(const Matrix& b, const Matrix& y) {
    if (b.rows() != b.cols()) throw std::invalid_argument("unmixing matrix must be square");
    if (b.cols() != y.rows())
        throw std::invalid_argument("unmixing matrix and received block dimensions differ");
}

// log|det B| with the singularity guard applied.
double guarded_log_abs_det(const LuFactorization& f) {
    if (f.singular || f.log_abs_det < std::log(kMinAbsDet))
        throw singular_matrix_error("|det B| below 1e-300; objective is -inf");
    return f.log_abs_det;
}

} // namespace

LogDensity unit_laplacian_log_density() {
    return LogDensity{"laplacian-unit",
                      [](double x) { return -kSqrt2 * std::fabs(x) - kLogSqrt2; }};
}

double log_likelihood_laplacian(const Matrix& b, const Matrix& y) {
    check_shapes(b, y);
    const double log_det = guarded_log_abs_det(LuFactorization::compute(b));
    const Matrix s = kernels::unmixed(b, y);
    return y.cols() * log_det - kSqrt2 * kernels::l1_sum(s);
}

double log_likelihood_generic(const Matrix& b, const Matrix& y, const LogDensity& density) {
    check_shapes(b, y);
    const double log_det = guarded_log_abs_det(LuFactorization::compute(b));
    const Matrix s = kernels::unmixed(b, y);
    // Row-wise accumulation, combined in row order, matching the kernels.
    double total = 0.0;
    for (int i = 0; i < s.rows(); ++i) {
        const double* si = s.row(i);
        double row = 0.0;
        for (int t = 0; t < s.cols(); ++t) row += density.log_f(si[t]);
        total += row;
    }
    return y.cols() * log_det + total;
}

Matrix gradient_laplacian(const Matrix& b, const Matrix& y) {
    check_shapes(b, y);
    const LuFactorization f = LuFactorization::compute(b);
    guarded_log_abs_det(f);
    const Matrix inv_t = f.inverse().transposed();
    const Matrix s = kernels::unmixed(b, y);
    Matrix data_term(b.rows(), b.cols());
    kernels::sign_cross(s, y, data_term);
    Matrix grad = inv_t;
    grad *= static_cast<double>(y.cols());
    data_term *= kSqrt2;
    grad -= data_term;
    return grad;
}

ObjectiveAndGradient laplacian_objective_and_gradient(const Matrix& b, const Matrix& y) {
    check_shapes(b, y);
    const LuFactorization f = LuFactorization::compute(b);
    const double log_det = guarded_log_abs_det(f);
    const Matrix s = kernels::unmixed(b, y);
    const double t_len = static_cast<double>(y.cols());

    ObjectiveAndGradient out{t_len * log_det - kSqrt2 * kernels::l1_sum(s), Matrix()};
    Matrix data_term(b.rows(), b.cols());
    kernels::sign_cross(s, y, data_term);
    out.gradient = f.inverse().transposed();
    out.gradient *= t_len;
    data_term *= kSqrt2;
    out.gradient -= data_term;
    return out;
}

} // namespace pfdet
