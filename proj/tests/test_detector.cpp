#include "pfdet/detector.hpp"

#include "pfdet/assignment.hpp"
#include "pfdet/linalg.hpp"
#include "pfdet/rng.hpp"

#include <algorithm>
#include <cmath>
#include <doctest.h>
#include <numeric>
#include <vector>

using namespace pfdet;

namespace {

Matrix random_matrix(int rows, int cols, Rng& rng) {
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = rng.normal();
    return m;
}

// Exhaustive assignment oracle over all K! permutations; ties keep the first
// (lexicographically smallest) permutation.
std::vector<int> brute_force_match(const Matrix& rho) {
    const int k = rho.rows();
    std::vector<int> perm(k), best(k);
    std::iota(perm.begin(), perm.end(), 0);
    best = perm;
    double best_value = -1e300;
    do {
        double value = 0.0;
        for (int i = 0; i < k; ++i) value += std::fabs(rho(i, perm[i]));
        if (value > best_value + 1e-15) {
            best_value = value;
            best = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

} // namespace

TEST_CASE("recover_symbols inverts the channel exactly in noiseless mode") {
    ScenarioConfig sc;
    sc.num_antennas = 4;
    sc.cell_user_counts = {4};
    sc.coherence_block = 32;
    sc.attenuation_range = {0.5, 1.5};
    sc.seed = 10;
    const ScenarioInstance inst = generate_scenario(sc);

    const Matrix b_true = LuFactorization::compute(inst.channel.entries).inverse();
    const Matrix x_hat = recover_symbols(b_true, inst.received.entries);
    for (int i = 0; i < 4; ++i)
        for (int t = 0; t < 32; ++t)
            CHECK(x_hat(i, t) == doctest::Approx(inst.symbols.entries(i, t)).epsilon(1e-9));

    // Identity unmixing returns the received block itself.
    CHECK(recover_symbols(Matrix::identity(4), inst.received.entries) == inst.received.entries);
}

TEST_CASE("a signed permutation of the inverse permutes and flips the rows") {
    ScenarioConfig sc;
    sc.num_antennas = 3;
    sc.cell_user_counts = {3};
    sc.coherence_block = 24;
    sc.attenuation_range = {0.5, 1.5};
    sc.seed = 12;
    const ScenarioInstance inst = generate_scenario(sc);

    Matrix p(3, 3);
    p(0, 2) = 1.0;
    p(1, 0) = -1.0;
    p(2, 1) = 1.0;
    const Matrix b_true = LuFactorization::compute(inst.channel.entries).inverse();
    const Matrix x_hat = recover_symbols(matmul(p, b_true), inst.received.entries);
    const Matrix expected = matmul(p, inst.symbols.entries);
    for (int i = 0; i < 3; ++i)
        for (int t = 0; t < 24; ++t)
            CHECK(x_hat(i, t) == doctest::Approx(expected(i, t)).epsilon(1e-9));
}

TEST_CASE("self-correlation has a unit diagonal and cosine off-diagonals") {
    Rng rng(14);
    const Matrix x = random_matrix(3, 64, rng);
    const Matrix rho = correlation_matrix(x, x);
    for (int i = 0; i < 3; ++i) CHECK(rho(i, i) == doctest::Approx(1.0).epsilon(1e-12));
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double dot = 0.0, ni = 0.0, nj = 0.0;
            for (int t = 0; t < 64; ++t) {
                dot += x(i, t) * x(j, t);
                ni += x(i, t) * x(i, t);
                nj += x(j, t) * x(j, t);
            }
            CHECK(rho(i, j) == doctest::Approx(dot / std::sqrt(ni * nj)).epsilon(1e-12));
        }
    }

    Matrix negated = x;
    negated *= -1.0;
    const Matrix rho_neg = correlation_matrix(x, negated);
    for (int i = 0; i < 3; ++i) CHECK(rho_neg(i, i) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("cyclically shifted rows produce the cyclic permutation match") {
    Rng rng(15);
    const int k = 4, t = 512;
    const Matrix x = random_matrix(k, t, rng);
    Matrix shifted(k, t);
    for (int i = 0; i < k; ++i)
        for (int c = 0; c < t; ++c) shifted(i, c) = x((i + 1) % k, c);
    // Row j of the estimate equals row (j+1) mod k of the truth, so the match
    // sends true row i to estimated row (i-1) mod k.
    const Matrix rho = correlation_matrix(x, shifted);
    const PermutationMatch m = match_permutation(rho);
    for (int i = 0; i < k; ++i) {
        CHECK(m.permutation[i] == (i + k - 1) % k);
        CHECK(m.matched_correlations[i] == doctest::Approx(1.0).epsilon(1e-12));
    }
    // Off-diagonal entries are sampling noise of order 1/sqrt(T).
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            if (j != m.permutation[i]) CHECK(std::fabs(rho(i, j)) < 0.2);
}

TEST_CASE("zero-norm rows are rejected with the row named") {
    Matrix x(2, 8, 1.0);
    Matrix x_hat(2, 8, 1.0);
    for (int t = 0; t < 8; ++t) x_hat(1, t) = 0.0;
    CHECK_THROWS_WITH_AS((void)correlation_matrix(x, x_hat),
                         "correlation_matrix: row 1 of X_hat has zero norm",
                         std::invalid_argument);
}

TEST_CASE("correlation entries satisfy the Cauchy-Schwarz bound") {
    Rng rng(16);
    for (int rep = 0; rep < 20; ++rep) {
        const Matrix x = random_matrix(5, 40, rng);
        const Matrix x_hat = random_matrix(5, 40, rng);
        const Matrix rho = correlation_matrix(x, x_hat);
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j) CHECK(std::fabs(rho(i, j)) <= 1.0 + 1e-12);
    }
}

TEST_CASE("identity and antidiagonal correlation matrices") {
    const PermutationMatch id = match_permutation(Matrix::identity(5));
    for (int i = 0; i < 5; ++i) {
        CHECK(id.permutation[i] == i);
        CHECK(id.signs[i] == 1);
        CHECK(id.matched_correlations[i] == doctest::Approx(1.0));
    }

    Matrix anti(4, 4);
    for (int i = 0; i < 4; ++i) anti(i, 3 - i) = -1.0;
    const PermutationMatch rev = match_permutation(anti);
    for (int i = 0; i < 4; ++i) {
        CHECK(rev.permutation[i] == 3 - i);
        CHECK(rev.signs[i] == -1);
        CHECK(rev.matched_correlations[i] == doctest::Approx(1.0));
    }
}

TEST_CASE("three-user example agrees with the exhaustive oracle") {
    Matrix rho(3, 3);
    rho(0, 0) = 0.9; rho(0, 1) = 0.2; rho(0, 2) = 0.1;
    rho(1, 0) = 0.3; rho(1, 1) = 0.8; rho(1, 2) = 0.2;
    rho(2, 0) = 0.1; rho(2, 1) = 0.1; rho(2, 2) = 0.7;
    const std::vector<int> oracle = brute_force_match(rho);
    const PermutationMatch m = match_permutation(rho);
    CHECK(m.permutation == oracle);
    CHECK(m.permutation == std::vector<int>{0, 1, 2});
    CHECK(m.matched_correlations[0] + m.matched_correlations[1] + m.matched_correlations[2] ==
          doctest::Approx(2.4).epsilon(1e-12));
}

TEST_CASE("assignment equals brute force on random instances") {
    Rng rng(18);
    for (int rep = 0; rep < 60; ++rep) {
        const int k = 2 + static_cast<int>(rng.next_u64() % 5);
        Matrix rho(k, k);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) rho(i, j) = rng.uniform(-1.0, 1.0);
        const PermutationMatch m = match_permutation(rho);
        CHECK(m.permutation == brute_force_match(rho));
    }
}

TEST_CASE("recovered correlations ignore a positive rescale of the estimate") {
    ScenarioConfig sc;
    sc.num_antennas = 3;
    sc.cell_user_counts = {3};
    sc.coherence_block = 64;
    sc.attenuation_range = {0.5, 1.5};
    sc.seed = 19;
    const ScenarioInstance inst = generate_scenario(sc);
    Rng rng(20);
    const Matrix b = random_matrix(3, 3, rng);

    const Matrix x1 = recover_symbols(b, inst.received.entries);
    const Matrix x2 = recover_symbols(3.7 * b, inst.received.entries);
    const PermutationMatch m1 = match_permutation(correlation_matrix(inst.symbols.entries, x1));
    const PermutationMatch m2 = match_permutation(correlation_matrix(inst.symbols.entries, x2));
    CHECK(m1.permutation == m2.permutation);
    for (int i = 0; i < 3; ++i)
        CHECK(m1.matched_correlations[i] ==
              doctest::Approx(m2.matched_correlations[i]).epsilon(1e-12));
}

TEST_CASE("signed permutations of the estimate only relabel the match") {
    ScenarioConfig sc;
    sc.num_antennas = 3;
    sc.cell_user_counts = {3};
    sc.coherence_block = 256;
    sc.attenuation_range = {0.5, 1.5};
    sc.seed = 23;
    const ScenarioInstance inst = generate_scenario(sc);
    const Matrix b_true = LuFactorization::compute(inst.channel.entries).inverse();

    Matrix p(3, 3);
    p(0, 1) = -1.0;
    p(1, 2) = 1.0;
    p(2, 0) = 1.0;

    const Matrix x_base = recover_symbols(b_true, inst.received.entries);
    const Matrix x_perm = recover_symbols(matmul(p, b_true), inst.received.entries);
    const PermutationMatch base = match_permutation(correlation_matrix(inst.symbols.entries, x_base));
    const PermutationMatch perm = match_permutation(correlation_matrix(inst.symbols.entries, x_perm));

    // Row r of P*B equals +-row q of B where p(r, q) is the nonzero entry;
    // composing with the base match must reproduce the observed one.
    std::vector<int> row_from(3);
    std::vector<int> flip(3);
    for (int r = 0; r < 3; ++r)
        for (int q = 0; q < 3; ++q)
            if (p(r, q) != 0.0) {
                row_from[r] = q;
                flip[r] = p(r, q) < 0 ? -1 : 1;
            }
    for (int i = 0; i < 3; ++i) {
        int expected_col = -1;
        for (int r = 0; r < 3; ++r)
            if (row_from[r] == base.permutation[i]) expected_col = r;
        CHECK(perm.permutation[i] == expected_col);
        CHECK(perm.signs[i] == base.signs[i] * flip[perm.permutation[i]]);
        CHECK(perm.matched_correlations[i] ==
              doctest::Approx(base.matched_correlations[i]).epsilon(1e-9));
    }
}

TEST_CASE("detect fills truth-dependent fields only when truth is given") {
    ScenarioConfig sc;
    sc.num_antennas = 2;
    sc.cell_user_counts = {2};
    sc.coherence_block = 128;
    sc.attenuation_range = {0.5, 1.5};
    sc.seed = 29;
    const ScenarioInstance inst = generate_scenario(sc);

    OptimizerConfig cfg;
    cfg.total_iterations = 200;

    Rng r1(7);
    const DetectionResult blind = detect(inst.received, cfg, nullptr, r1);
    CHECK(!blind.rho.has_value());
    CHECK(!blind.match.has_value());
    CHECK(blind.b_hat.rows() == 2);
    CHECK(blind.x_hat.rows() == 2);
    CHECK(blind.x_hat.cols() == 128);

    Rng r2(7);
    const DetectionResult scored = detect(inst.received, cfg, &inst.symbols, r2);
    CHECK(scored.rho.has_value());
    REQUIRE(scored.match.has_value());
    CHECK(scored.b_hat == blind.b_hat);
    CHECK(scored.match->permutation.size() == 2);

    const nlohmann::json j = scored.to_json();
    CHECK(j.contains("b_hat"));
    CHECK(j.contains("permutation"));
    CHECK(j.contains("summary"));
}
