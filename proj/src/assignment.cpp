#include "pfdet/assignment.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace pfdet {

namespace detail {

std::vector<int> hungarian_min(const Matrix& cost) {
    if (cost.rows() != cost.cols()) throw std::invalid_argument("assignment: matrix must be square");
    const int n = cost.rows();
    const double inf = std::numeric_limits<double>::infinity();

    // 1-based potentials; p[j] is the row matched to column j.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);

    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            int j1 = 0;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<int> pi(n, -1);
    for (int j = 1; j <= n; ++j)
        if (p[j] != 0) pi[p[j] - 1] = j - 1;
    return pi;
}

} // namespace detail

namespace {

constexpr double kTieTolerance = 1e-9;

// Optimal value of assigning rows [first_row..K) to the listed columns.
double best_value_of_tail(const Matrix& weights, int first_row, const std::vector<int>& cols) {
    const int m = static_cast<int>(cols.size());
    if (m == 0) return 0.0;
    Matrix sub(m, m);
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c) sub(r, c) = -weights(first_row + r, cols[c]);
    const std::vector<int> pi = detail::hungarian_min(sub);
    double value = 0.0;
    for (int r = 0; r < m; ++r) value += weights(first_row + r, cols[pi[r]]);
    return value;
}

} // namespace

double assignment_value(const Matrix& weights, const std::vector<int>& pi) {
    double value = 0.0;
    for (int i = 0; i < weights.rows(); ++i) value += weights(i, pi[i]);
    return value;
}

std::vector<int> match_rows_to_cols(const Matrix& weights) {
    if (weights.rows() != weights.cols())
        throw std::invalid_argument("assignment: matrix must be square");
    const int n = weights.rows();

    std::vector<int> remaining(n);
    for (int j = 0; j < n; ++j) remaining[j] = j;
    double target = best_value_of_tail(weights, 0, remaining);

    // Fix rows in order, taking for each the smallest column that still
    // admits an optimal completion. This pins the tie-break exactly.
    std::vector<int> pi(n, -1);
    for (int i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < remaining.size(); ++c) {
            const int j = remaining[c];
            std::vector<int> rest = remaining;
            rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(c));
            const double value = weights(i, j) + best_value_of_tail(weights, i + 1, rest);
            if (value >= target - kTieTolerance) {
                pi[i] = j;
                remaining = std::move(rest);
                target = value - weights(i, j);
                break;
            }
        }
        if (pi[i] < 0) throw std::logic_error("assignment: no completion found");
    }
    return pi;
}

} // namespace pfdet
