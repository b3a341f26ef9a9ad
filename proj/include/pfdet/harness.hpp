#pragma once

#include "pfdet/detector.hpp"
#include "pfdet/matrix.hpp"
#include "pfdet/optimizer.hpp"
#include "pfdet/signal_model.hpp"

#include <filesystem>
#include <functional>
#include <istream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

namespace pfdet {

enum class Emit { rho_csv, trajectory_csv, summary_json };

std::string to_string(Emit e);
Emit emit_from_string(const std::string& s);

struct ExperimentConfig {
    ScenarioConfig scenario;
    OptimizerConfig optimizer;
    int trials = 1;
    std::filesystem::path output_dir = "out";
    std::set<Emit> emit{Emit::rho_csv, Emit::trajectory_csv, Emit::summary_json};

    void validate() const;
    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig load(const std::filesystem::path& file);
    nlohmann::json to_json() const;
};

struct TrialResult {
    int trial = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error; // failure reason when !ok
    std::vector<double> matched_correlations;
    std::vector<int> permutation;
    std::vector<int> signs;
    double final_objective = 0.0;
    int restarts = 0;
    double wall_seconds = 0.0; // reported on stdout, never serialized
};

struct ExperimentSummary {
    ExperimentConfig config;
    std::vector<TrialResult> trials;
    int failed_trials = 0;
    double min_matched = 0.0;
    double mean_matched = 0.0;
    double max_matched = 0.0;
    std::vector<double> per_cell_mean_matched;
    double total_wall_seconds = 0.0;

    // Deterministic artifact: excludes wall-clock fields.
    nlohmann::json to_json() const;
};

// Runs all trials (possibly across threads; each trial owns its rng
// substreams and files), writes the requested artifacts under
// config.output_dir, and reduces the summary in trial order.
ExperimentSummary run_experiment(const ExperimentConfig& config);

struct SweepPoint {
    int coherence_block = 0;
    double mean_matched = 0.0;
    double min_matched = 0.0;
};

// run_experiment per T with paired trial seeds; per-T artifacts go to
// output_dir/T<value>/ and a combined CSV "T,mean_matched,min_matched" to
// output_dir/sweep.csv.
std::vector<ExperimentSummary> run_sweep(const ExperimentConfig& base,
                                         const std::vector<int>& coherence_blocks);

struct GradientCheckReport {
    int instances = 0;
    double max_rel_error = 0.0;
    std::vector<double> rel_errors;
    bool passed = true;
};

using GradientFn = std::function<Matrix(const Matrix&, const Matrix&)>;

// Draws random (B, Y) pairs away from the |.| kink (min |(BY)_kt| > 1e-3),
// compares the analytic gradient against central finite differences, and
// reports the worst relative Frobenius error. gradient_fn exists so tests
// can verify a corrupted gradient is caught.
GradientCheckReport run_gradient_check(int num_users, int coherence_block, int instances,
                                       std::uint64_t seed, double h = 1e-5, double tol = 1e-5,
                                       const GradientFn& gradient_fn = {});

// Parses a headerless numeric CSV back into a matrix (shape checks in tests).
Matrix read_csv_matrix(std::istream& in);

} // namespace pfdet
