#include "pfdet/detector.hpp"

#include "pfdet/assignment.hpp"
#include "pfdet/errors.hpp"
#include "pfdet/kernels.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace pfdet {

Matrix recover_symbols(const Matrix& b_hat, const Matrix& y) {
    if (b_hat.cols() != y.rows())
        throw std::invalid_argument("recover_symbols: dimension mismatch");
    return kernels::unmixed(b_hat, y);
}

Matrix correlation_matrix(const Matrix& x, const Matrix& x_hat) {
    if (x.rows() != x_hat.rows() || x.cols() != x_hat.cols())
        throw std::invalid_argument("correlation_matrix: blocks must share shape");
    const int k = x.rows();

    auto row_norms = [](const Matrix& m, const char* label) {
        std::vector<double> norms(m.rows());
        for (int i = 0; i < m.rows(); ++i) {
            const double* ri = m.row(i);
            double s = 0.0;
            for (int t = 0; t < m.cols(); ++t) s += ri[t] * ri[t];
            if (s == 0.0)
                throw std::invalid_argument(std::string("correlation_matrix: row ") +
                                            std::to_string(i) + " of " + label + " has zero norm");
            norms[i] = std::sqrt(s);
        }
        return norms;
    };
    const std::vector<double> nx = row_norms(x, "X");
    const std::vector<double> nxh = row_norms(x_hat, "X_hat");

    Matrix rho = matmul_abt(x, x_hat);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) rho(i, j) /= nx[i] * nxh[j];
    return rho;
}

PermutationMatch match_permutation(const Matrix& rho) {
    if (rho.rows() != rho.cols())
        throw std::invalid_argument("match_permutation: matrix must be square");
    const int k = rho.rows();
    Matrix abs_rho(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) abs_rho(i, j) = std::fabs(rho(i, j));

    PermutationMatch m;
    m.permutation = match_rows_to_cols(abs_rho);
    m.signs.resize(k);
    m.matched_correlations.resize(k);
    for (int i = 0; i < k; ++i) {
        const double r = rho(i, m.permutation[i]);
        m.signs[i] = r >= 0.0 ? 1 : -1;
        m.matched_correlations[i] = std::fabs(r);
    }
    return m;
}

DetectionResult detect(const ReceivedBlock& y, const OptimizerConfig& config,
                       const SymbolBlock* truth, Rng& rng) {
    OptimizationResult opt = run_optimization(y.entries, config, rng);
    DetectionResult result;
    result.b_hat = std::move(opt.b_hat);
    result.trajectory = std::move(opt.trajectory);
    result.restarts = opt.restarts;
    result.x_hat = recover_symbols(result.b_hat, y.entries);
    if (truth != nullptr) {
        result.rho = correlation_matrix(truth->entries, result.x_hat);
        result.match = match_permutation(*result.rho);
    }
    return result;
}

nlohmann::json DetectionResult::to_json() const {
    nlohmann::json j;
    auto matrix_to_json = [](const Matrix& m) {
        nlohmann::json rows = nlohmann::json::array();
        for (int i = 0; i < m.rows(); ++i) {
            nlohmann::json row = nlohmann::json::array();
            for (int c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
            rows.push_back(std::move(row));
        }
        return rows;
    };
    j["b_hat"] = matrix_to_json(b_hat);
    j["restarts"] = restarts;
    if (match.has_value()) {
        j["permutation"] = match->permutation;
        j["signs"] = match->signs;
        j["matched_correlations"] = match->matched_correlations;
        double lo = 1.0, hi = 0.0, sum = 0.0;
        for (double r : match->matched_correlations) {
            lo = std::min(lo, r);
            hi = std::max(hi, r);
            sum += r;
        }
        const double count = static_cast<double>(match->matched_correlations.size());
        j["summary"] = {{"min_matched", lo}, {"mean_matched", sum / count}, {"max_matched", hi}};
    }
    return j;
}

void write_abs_rho_csv(std::ostream& out, const Matrix& rho) {
    char cell[64];
    for (int i = 0; i < rho.rows(); ++i) {
        for (int j = 0; j < rho.cols(); ++j) {
            std::snprintf(cell, sizeof(cell), "%.17g", std::fabs(rho(i, j)));
            if (j) out << ',';
            out << cell;
        }
        out << '\n';
    }
}

} // namespace pfdet
