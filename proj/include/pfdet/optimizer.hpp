#pragma once

#include "pfdet/matrix.hpp"
#include "pfdet/rng.hpp"

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace pfdet {

enum class Method { adam, sgd };

std::string to_string(Method m);
Method method_from_string(const std::string& s);

// All knobs of the ascent loop. The defaults converge for the 16-user
// scenarios in a few seconds and every one of them can be overridden.
struct OptimizerConfig {
    Method method = Method::adam;
    double learning_rate = 1e-2;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    // Adam's per-entry travel is bounded by the learning rate, and weakly
    // attenuated users need unmixing entries of order 1/sqrt(attenuation);
    // the iteration budget covers that travel with margin.
    int total_iterations = 12000;
    int record_every = 10;                 // iterations per recorded step
    std::optional<int> minibatch_size;     // nullopt = full batch
    std::optional<double> init_scale;      // nullopt = 1/sqrt(K)

    double init_scale_for(int num_users) const;
    void validate() const;

    static OptimizerConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

// One recorded step: entrywise |delta B| statistics between consecutive
// recorded matrices, plus the current full-batch objective.
struct TrajectoryRecord {
    int step = 0;      // 1-based record index
    int iteration = 0; // iteration count at the record
    double avg_step = 0.0;
    double max_step = 0.0;
    double objective = 0.0;
};

struct Trajectory {
    std::vector<TrajectoryRecord> records;
};

// CSV with header step,iteration,avg_step,max_step,objective.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

// Gaussian initialization with the given entry standard deviation,
// regenerated (at most 100 times) while the determinant guard trips.
Matrix init_unmixing(int num_users, double scale, Rng& rng);

// Adam moment accumulators; iteration counts from zero.
struct AdamState {
    Matrix m;
    Matrix v;
    int t = 0;

    static AdamState zero(int rows, int cols);
};

// One bias-corrected Adam ascent step: b += lr * m_hat / (sqrt(v_hat) + eps).
void adam_update(Matrix& b, const Matrix& grad, AdamState& state, const OptimizerConfig& config);

// Plain gradient ascent: b += lr * grad.
void sgd_update(Matrix& b, const Matrix& grad, const OptimizerConfig& config);

struct OptimizationResult {
    Matrix b_hat;
    Trajectory trajectory;
    int restarts = 0;
};

// Maximizes the Laplacian log-likelihood over the unmixing matrix from a
// random initialization. Singular excursions trigger a re-initialization
// (at most 3 restarts) before the trial fails.
OptimizationResult run_optimization(const Matrix& y, const OptimizerConfig& config, Rng& rng);

} // namespace pfdet
