#pragma once

#include "pfdet/errors.hpp"
#include "pfdet/kernels.hpp"
#include "pfdet/matrix.hpp"

#include <cmath>
#include <functional>
#include <string>
#include <utility>

namespace pfdet {

// The unmixing matrix is a plain square matrix; the estimate of the channel
// inverse up to signed permutation and scale.
using UnmixingMatrix = Matrix;

// Evaluation refuses |det B| below this magnitude; callers see a typed error
// instead of +-inf arithmetic.
inline constexpr double kMinAbsDet = 1e-300;

// Scalar log-density together with an identifier for reports.
struct LogDensity {
    std::string name;
    std::function<double(double)> log_f;
};

// log f(x) = -sqrt(2)|x| - log sqrt(2), the zero-mean unit-variance Laplacian.
LogDensity unit_laplacian_log_density();

// T log|det B| - sqrt(2) sum_{kt} |(BY)_kt|. The additive density constant is
// omitted; it does not move the argmax.
double log_likelihood_laplacian(const Matrix& b, const Matrix& y);

// T log|det B| + sum_{kt} density((BY)_kt). With the true unit-Laplacian
// log-density this equals log_likelihood_laplacian minus K T log sqrt(2).
double log_likelihood_generic(const Matrix& b, const Matrix& y, const LogDensity& density);

// Analytic ascent gradient of the Laplacian objective:
// T (B^-1)^T - sqrt(2) sign(BY) Y^T, with sign(0) = 0.
Matrix gradient_laplacian(const Matrix& b, const Matrix& y);

// Objective and gradient sharing one factorization and one unmixed block.
struct ObjectiveAndGradient {
    double value;
    Matrix gradient;
};
ObjectiveAndGradient laplacian_objective_and_gradient(const Matrix& b, const Matrix& y);

// Central finite differences of any objective(B, Y), entry by entry.
template <typename Objective>
Matrix finite_difference_gradient(const Matrix& b, const Matrix& y, Objective&& objective,
                                  double h) {
    if (!(h > 0.0)) throw std::invalid_argument("finite_difference_gradient: h must be positive");
    Matrix grad(b.rows(), b.cols());
    Matrix probe = b;
    for (int i = 0; i < b.rows(); ++i) {
        for (int j = 0; j < b.cols(); ++j) {
            const double saved = probe(i, j);
            probe(i, j) = saved + h;
            const double up = objective(probe, y);
            probe(i, j) = saved - h;
            const double down = objective(probe, y);
            probe(i, j) = saved;
            grad(i, j) = (up - down) / (2.0 * h);
        }
    }
    return grad;
}

} // namespace pfdet
