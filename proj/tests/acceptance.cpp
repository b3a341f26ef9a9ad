// Acceptance suite: one line per criterion, nonzero exit when any fails.
// Thresholds are fixed here, not command-line tunable.

#include "pfdet/assignment.hpp"
#include "pfdet/detector.hpp"
#include "pfdet/harness.hpp"
#include "pfdet/likelihood.hpp"
#include "pfdet/linalg.hpp"
#include "pfdet/optimizer.hpp"
#include "pfdet/signal_model.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

using namespace pfdet;
namespace fs = std::filesystem;

namespace {

struct Criterion {
    std::string name;
    std::function<bool(std::string&)> run;
};

Matrix random_matrix(int rows, int cols, Rng& rng) {
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = rng.normal();
    return m;
}

ScenarioConfig uplink16(int coherence_block, std::uint64_t seed) {
    ScenarioConfig c;
    c.num_antennas = 16;
    c.cell_user_counts = {16};
    c.coherence_block = coherence_block;
    c.attenuation_range = {0.1, 1.9};
    c.snr = std::nullopt;
    c.seed = seed;
    return c;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::map<std::string, std::string> snapshot_dir(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir))
        if (entry.is_regular_file())
            files[fs::relative(entry.path(), dir).string()] = slurp(entry.path());
    return files;
}

// 1. Analytic gradient against central finite differences.
bool gradient_oracle(std::string& detail) {
    const auto start = std::chrono::steady_clock::now();
    const GradientCheckReport report = run_gradient_check(4, 16, 20, 1, 1e-5, 1e-5);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    char buf[128];
    std::snprintf(buf, sizeof(buf), "max rel error %.3g, %.3f s", report.max_rel_error, seconds);
    detail = buf;
    return report.passed && seconds < 1.0;
}

// 2. 16 users, T = 2048, noiseless: every stream recovered with matched
//    correlation >= 0.9 on at least 8 of 10 seeds.
bool long_block_reproduction(std::string& detail) {
    const auto start = std::chrono::steady_clock::now();
    int good_seeds = 0;
    double worst = 1.0;
    for (int seed = 0; seed < 10; ++seed) {
        const ScenarioConfig sc = uplink16(2048, 7000 + seed);
        const ScenarioInstance inst = generate_scenario(sc);
        Rng opt_rng(derive_seed(sc.seed, kStreamOptimizer));
        const DetectionResult det = detect(inst.received, OptimizerConfig{}, &inst.symbols, opt_rng);

        std::vector<int> seen(16, 0);
        for (int p : det.match->permutation) seen[p] += 1;
        const bool valid_perm = std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; });
        const double lo = *std::min_element(det.match->matched_correlations.begin(),
                                            det.match->matched_correlations.end());
        worst = std::min(worst, lo);
        good_seeds += valid_perm && lo >= 0.9;
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%d/10 seeds with all matched >= 0.9 (worst %.4f), %.1f s",
                  good_seeds, worst, seconds);
    detail = buf;
    return good_seeds >= 8;
}

// 3. Paired-seed sweep: longer coherence blocks perform at least as well.
bool block_length_ordering(std::string& detail) {
    ExperimentConfig base;
    base.scenario = uplink16(512, 4242);
    base.trials = 10;
    base.output_dir = fs::temp_directory_path() / "pfdet_acceptance" / "sweep";
    base.emit = {Emit::summary_json};
    fs::remove_all(base.output_dir);

    const auto summaries = run_sweep(base, {512, 2048});
    const double mean_short = summaries[0].mean_matched;
    const double mean_long = summaries[1].mean_matched;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "mean matched %.4f @ T=512 vs %.4f @ T=2048", mean_short,
                  mean_long);
    detail = buf;
    fs::remove_all(base.output_dir);
    return mean_long >= mean_short;
}

// 4. Step diagnostics shrink over the run and avg <= max throughout.
bool step_trend(std::string& detail) {
    const ScenarioConfig sc = uplink16(2048, 7000);
    const ScenarioInstance inst = generate_scenario(sc);
    Rng opt_rng(derive_seed(sc.seed, kStreamOptimizer));
    const OptimizationResult res = run_optimization(inst.received.entries, OptimizerConfig{}, opt_rng);

    const auto& records = res.trajectory.records;
    if (records.size() < 20) {
        detail = "trajectory too short";
        return false;
    }
    bool ordered = true;
    for (const TrajectoryRecord& r : records) ordered = ordered && r.avg_step <= r.max_step;

    std::vector<double> head, tail;
    for (std::size_t i = 0; i < 10; ++i) head.push_back(records[i].avg_step);
    for (std::size_t i = records.size() - 10; i < records.size(); ++i)
        tail.push_back(records[i].avg_step);
    const double m_head = median(head);
    const double m_tail = median(tail);
    char buf[160];
    std::snprintf(buf, sizeof(buf), "median avg_step first/last 10 records: %.3g / %.3g%s", m_head,
                  m_tail, ordered ? "" : ", avg > max somewhere");
    detail = buf;
    return ordered && m_tail <= 0.5 * m_head;
}

// 5. Likelihood identities at 1e-9.
bool likelihood_invariances(std::string& detail) {
    Rng rng(99);
    double worst = 0.0;
    const LogDensity density = unit_laplacian_log_density();

    for (int rep = 0; rep < 100; ++rep) {
        const int k = 2 + static_cast<int>(rng.next_u64() % 5);
        const int t = 16 + static_cast<int>(rng.next_u64() % 48);
        const Matrix b = random_matrix(k, k, rng);
        const Matrix y = random_matrix(k, t, rng);

        // Signed permutation.
        std::vector<int> perm(k);
        std::iota(perm.begin(), perm.end(), 0);
        for (int i = k - 1; i > 0; --i)
            std::swap(perm[i], perm[rng.next_u64() % static_cast<std::uint64_t>(i + 1)]);
        Matrix p(k, k);
        for (int i = 0; i < k; ++i) p(i, perm[i]) = rng.uniform01() < 0.5 ? -1.0 : 1.0;
        const double base = log_likelihood_laplacian(b, y);
        worst = std::max(worst, std::fabs(log_likelihood_laplacian(matmul(p, b), y) - base));

        // Additivity over a column split.
        const int t1 = 1 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(t - 1));
        Matrix y1(k, t1), y2(k, t - t1);
        for (int i = 0; i < k; ++i) {
            for (int c = 0; c < t1; ++c) y1(i, c) = y(i, c);
            for (int c = t1; c < t; ++c) y2(i, c - t1) = y(i, c);
        }
        worst = std::max(worst, std::fabs(log_likelihood_laplacian(b, y1) +
                                          log_likelihood_laplacian(b, y2) - base));

        // Generic path differs by the dropped constant K T log sqrt(2).
        const double offset = k * t * 0.5 * std::log(2.0);
        worst = std::max(worst,
                         std::fabs(log_likelihood_generic(b, y, density) - (base - offset)));
    }
    char buf[96];
    std::snprintf(buf, sizeof(buf), "worst deviation %.3g", worst);
    detail = buf;
    return worst <= 1e-9;
}

// 6. Two users, T = 5000: the optimizer reaches the true-inverse objective
//    and near-perfect correlations on at least 9 of 10 seeds.
bool small_instance_oracle(std::string& detail) {
    int good = 0;
    double worst_gap = 0.0, worst_corr = 1.0;
    for (int seed = 0; seed < 10; ++seed) {
        ScenarioConfig sc;
        sc.num_antennas = 2;
        sc.cell_user_counts = {2};
        sc.coherence_block = 5000;
        sc.attenuation_range = {0.1, 1.9};
        sc.snr = std::nullopt;
        sc.seed = 5000 + seed;
        const ScenarioInstance inst = generate_scenario(sc);

        Rng opt_rng(derive_seed(sc.seed, kStreamOptimizer));
        const DetectionResult det = detect(inst.received, OptimizerConfig{}, &inst.symbols, opt_rng);

        const Matrix b_true = LuFactorization::compute(inst.channel.entries).inverse();
        const double reference = log_likelihood_laplacian(b_true, inst.received.entries);
        const double achieved = log_likelihood_laplacian(det.b_hat, inst.received.entries);
        const double lo = std::min(det.match->matched_correlations[0],
                                   det.match->matched_correlations[1]);
        worst_gap = std::max(worst_gap, reference - achieved);
        worst_corr = std::min(worst_corr, lo);
        good += achieved >= reference - 1e-3 * 5000 && lo >= 0.99;
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%d/10 seeds (worst objective gap %.3g, worst matched %.5f)",
                  good, worst_gap, worst_corr);
    detail = buf;
    return good >= 9;
}

// 7. Assignment equals exhaustive enumeration.
bool assignment_brute_force(std::string& detail) {
    Rng rng(123);
    int agreements = 0;
    const int total = 200;
    for (int rep = 0; rep < total; ++rep) {
        const int k = 2 + static_cast<int>(rng.next_u64() % 5);
        Matrix rho(k, k);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) rho(i, j) = rng.uniform(-1.0, 1.0);

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

        agreements += match_permutation(rho).permutation == best;
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%d/%d exact matches", agreements, total);
    detail = buf;
    return agreements == total;
}

// 8. Sampler moments and byte-identical artifacts under a fixed master seed.
bool sampler_and_determinism(std::string& detail) {
    Rng rng(314159);
    const int n = 1000000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = sample_laplacian(rng);
        sum += x;
        sum_sq += x * x;
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    const bool moments_ok = std::fabs(mean) < 0.005 && std::fabs(var - 1.0) < 0.01;

    ExperimentConfig cfg;
    cfg.scenario.num_antennas = 8;
    cfg.scenario.cell_user_counts = {4, 4};
    cfg.scenario.coherence_block = 256;
    cfg.scenario.attenuation_range = {0.1, 1.9};
    cfg.scenario.snr = std::nullopt;
    cfg.scenario.seed = 8888;
    cfg.trials = 2;
    cfg.output_dir = fs::temp_directory_path() / "pfdet_acceptance" / "determinism";
    fs::remove_all(cfg.output_dir);

    run_experiment(cfg);
    const auto first = snapshot_dir(cfg.output_dir);
    fs::remove_all(cfg.output_dir);
    run_experiment(cfg);
    const auto second = snapshot_dir(cfg.output_dir);
    fs::remove_all(cfg.output_dir);

    const bool identical = first == second && !first.empty();
    char buf[160];
    std::snprintf(buf, sizeof(buf), "mean %.4g, var %.6g, %zu artifacts %s", mean, var,
                  first.size(), identical ? "byte-identical" : "DIFFER");
    detail = buf;
    return moments_ok && identical;
}

} // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {"gradient oracle (K=4, T=16, 20 instances, rel err <= 1e-5, < 1 s)", gradient_oracle},
        {"16-user T=2048 reproduction (all matched >= 0.9 on >= 8/10 seeds)", long_block_reproduction},
        {"paired sweep ordering (mean matched at T=2048 >= T=512, 10 trials)", block_length_ordering},
        {"step trend (last-10 median avg_step <= 0.5 x first-10, avg <= max)", step_trend},
        {"likelihood invariances (signed perm, additivity, constant offset, 1e-9)", likelihood_invariances},
        {"small-instance oracle (K=2, T=5000, >= 9/10 seeds)", small_instance_oracle},
        {"assignment equals brute force (200 random K in 2..6)", assignment_brute_force},
        {"sampler moments and byte-identical artifacts", sampler_and_determinism},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        std::string detail;
        bool ok = false;
        try {
            ok = criteria[i].run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        std::printf("[%s] criterion %zu: %s: %s\n", ok ? "PASS" : "FAIL", i + 1,
                    criteria[i].name.c_str(), detail.c_str());
        std::fflush(stdout);
        failures += !ok;
    }
    std::printf("%zu/%zu acceptance criteria passed\n", criteria.size() - failures,
                criteria.size());
    return failures == 0 ? 0 : 1;
}
