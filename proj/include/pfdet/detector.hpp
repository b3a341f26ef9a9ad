#pragma once

#include "pfdet/matrix.hpp"
#include "pfdet/optimizer.hpp"
#include "pfdet/rng.hpp"
#include "pfdet/signal_model.hpp"

#include <optional>
#include <ostream>
#include <vector>

#include <json.hpp>

namespace pfdet {

// x_hat = b_hat * y.
Matrix recover_symbols(const Matrix& b_hat, const Matrix& y);

// Uncentered correlation coefficients between true and estimated streams:
// rho_ij = <x_i, x_hat_j> / (|x_i| |x_hat_j|), rows of the two blocks.
// The rows are not mean-centered; sources are zero-mean by construction.
Matrix correlation_matrix(const Matrix& x, const Matrix& x_hat);

struct PermutationMatch {
    std::vector<int> permutation;             // true row i -> estimated row pi[i]
    std::vector<int> signs;                   // sign of rho at the match, +-1
    std::vector<double> matched_correlations; // |rho_{i, pi[i]}|
};

// Resolves the permutation/sign ambiguity: the permutation maximizing
// sum_i |rho_{i, pi(i)}| over all permutations, ties toward the
// lexicographically smallest permutation.
PermutationMatch match_permutation(const Matrix& rho);

struct DetectionResult {
    Matrix b_hat;
    Matrix x_hat;
    Trajectory trajectory;
    int restarts = 0;
    // Present only when ground truth was supplied.
    std::optional<Matrix> rho;
    std::optional<PermutationMatch> match;

    nlohmann::json to_json() const;
};

// End-to-end pilot-free detection: estimate the unmixing matrix from the
// received block alone, recover the streams, and (in simulation mode, with
// ground truth supplied) score them against the true symbols.
DetectionResult detect(const ReceivedBlock& y, const OptimizerConfig& config,
                       const SymbolBlock* truth, Rng& rng);

// |rho| as plain CSV, row-major, no header; one line per true user.
void write_abs_rho_csv(std::ostream& out, const Matrix& rho);

} // namespace pfdet
