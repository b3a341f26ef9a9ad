#include "pfdet/optimizer.hpp"

#include "pfdet/errors.hpp"
#include "pfdet/likelihood.hpp"
#include "pfdet/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <stdexcept>

namespace pfdet {

namespace {

constexpr int kMaxInitRetries = 100;
constexpr int kMaxRestarts = 3;
const double kSqrt2 = std::sqrt(2.0);

void check_finite(const Matrix& grad) {
    for (int i = 0; i < grad.rows(); ++i)
        for (int j = 0; j < grad.cols(); ++j)
            if (!std::isfinite(grad(i, j)))
                throw optimization_error("non-finite gradient entry at (" + std::to_string(i) +
                                         "," + std::to_string(j) + ")");
}

// Minibatch of distinct columns by partial Fisher-Yates over column indices.
std::vector<int> sample_columns(int t_len, int count, Rng& rng) {
    std::vector<int> idx(t_len);
    for (int t = 0; t < t_len; ++t) idx[t] = t;
    for (int i = 0; i < count; ++i) {
        const int j = i + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(t_len - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(count);
    return idx;
}

// Gradient estimate from a column subsample, scaled to the full block:
// T (B^-1)^T - sqrt(2) (T/m) sign(B Y_mb) Y_mb^T.
Matrix minibatch_gradient(const Matrix& b, const Matrix& y, const std::vector<int>& cols) {
    Matrix y_mb(y.rows(), static_cast<int>(cols.size()));
    for (int k = 0; k < y.rows(); ++k) {
        const double* src = y.row(k);
        double* dst = y_mb.row(k);
        for (std::size_t c = 0; c < cols.size(); ++c) dst[c] = src[cols[c]];
    }
    const LuFactorization f = LuFactorization::compute(b);
    if (f.singular || f.log_abs_det < std::log(kMinAbsDet))
        throw singular_matrix_error("|det B| below 1e-300; objective is -inf");

    const Matrix s = kernels::unmixed(b, y_mb);
    Matrix data_term(b.rows(), b.cols());
    kernels::sign_cross(s, y_mb, data_term);

    const double t_len = static_cast<double>(y.cols());
    Matrix grad = f.inverse().transposed();
    grad *= t_len;
    data_term *= kSqrt2 * t_len / static_cast<double>(cols.size());
    grad -= data_term;
    return grad;
}

} // namespace

std::string to_string(Method m) { return m == Method::adam ? "adam" : "sgd"; }

Method method_from_string(const std::string& s) {
    if (s == "adam") return Method::adam;
    if (s == "sgd") return Method::sgd;
    throw config_error("optimizer: unknown method \"" + s + "\"");
}

double OptimizerConfig::init_scale_for(int num_users) const {
    return init_scale.value_or(1.0 / std::sqrt(static_cast<double>(num_users)));
}

void OptimizerConfig::validate() const {
    if (!(learning_rate > 0.0)) throw config_error("optimizer: learning_rate must be positive");
    if (adam_beta1 < 0.0 || adam_beta1 >= 1.0) throw config_error("optimizer: adam_beta1 must be in [0, 1)");
    if (adam_beta2 < 0.0 || adam_beta2 >= 1.0) throw config_error("optimizer: adam_beta2 must be in [0, 1)");
    if (!(adam_epsilon > 0.0)) throw config_error("optimizer: adam_epsilon must be positive");
    if (total_iterations < 0) throw config_error("optimizer: total_iterations must be nonnegative");
    if (record_every < 1) throw config_error("optimizer: record_every must be at least 1");
    if (minibatch_size.has_value() && *minibatch_size < 1)
        throw config_error("optimizer: minibatch_size must be positive or \"full\"");
    if (init_scale.has_value() && !(*init_scale > 0.0))
        throw config_error("optimizer: init_scale must be positive");
}

OptimizerConfig OptimizerConfig::from_json(const nlohmann::json& j) {
    static const std::set<std::string> keys{
        "method",       "learning_rate",    "adam_beta1", "adam_beta2",    "adam_epsilon",
        "total_iterations", "record_every", "minibatch_size", "init_scale"};
    if (!j.is_object()) throw config_error("optimizer: expected a JSON object");
    for (const auto& item : j.items())
        if (!keys.count(item.key()))
            throw config_error("optimizer: unknown key \"" + item.key() + "\"");

    OptimizerConfig c;
    try {
        if (j.contains("method")) c.method = method_from_string(j.at("method").get<std::string>());
        if (j.contains("learning_rate")) c.learning_rate = j.at("learning_rate").get<double>();
        if (j.contains("adam_beta1")) c.adam_beta1 = j.at("adam_beta1").get<double>();
        if (j.contains("adam_beta2")) c.adam_beta2 = j.at("adam_beta2").get<double>();
        if (j.contains("adam_epsilon")) c.adam_epsilon = j.at("adam_epsilon").get<double>();
        if (j.contains("total_iterations")) c.total_iterations = j.at("total_iterations").get<int>();
        if (j.contains("record_every")) c.record_every = j.at("record_every").get<int>();
        if (j.contains("minibatch_size")) {
            const auto& mb = j.at("minibatch_size");
            if (mb.is_string()) {
                if (mb.get<std::string>() != "full")
                    throw config_error("optimizer: minibatch_size must be a number or \"full\"");
                c.minibatch_size = std::nullopt;
            } else {
                c.minibatch_size = mb.get<int>();
            }
        }
        if (j.contains("init_scale")) c.init_scale = j.at("init_scale").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("optimizer: ") + e.what());
    }
    c.validate();
    return c;
}

nlohmann::json OptimizerConfig::to_json() const {
    nlohmann::json j;
    j["method"] = to_string(method);
    j["learning_rate"] = learning_rate;
    j["adam_beta1"] = adam_beta1;
    j["adam_beta2"] = adam_beta2;
    j["adam_epsilon"] = adam_epsilon;
    j["total_iterations"] = total_iterations;
    j["record_every"] = record_every;
    if (minibatch_size.has_value())
        j["minibatch_size"] = *minibatch_size;
    else
        j["minibatch_size"] = "full";
    if (init_scale.has_value()) j["init_scale"] = *init_scale;
    return j;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
    out << "step,iteration,avg_step,max_step,objective\n";
    char line[256];
    for (const TrajectoryRecord& r : trajectory.records) {
        std::snprintf(line, sizeof(line), "%d,%d,%.17g,%.17g,%.17g\n", r.step, r.iteration,
                      r.avg_step, r.max_step, r.objective);
        out << line;
    }
}

Matrix init_unmixing(int num_users, double scale, Rng& rng) {
    if (num_users < 1) throw std::invalid_argument("init_unmixing: K must be at least 1");
    if (!(scale > 0.0)) throw std::invalid_argument("init_unmixing: scale must be positive");
    for (int attempt = 0; attempt < kMaxInitRetries; ++attempt) {
        Matrix b(num_users, num_users);
        for (int i = 0; i < num_users; ++i)
            for (int j = 0; j < num_users; ++j) b(i, j) = scale * rng.normal();
        const LuFactorization f = LuFactorization::compute(b);
        if (!f.singular && f.log_abs_det >= std::log(kMinAbsDet)) return b;
    }
    throw generation_error("init_unmixing: no invertible initialization after " +
                           std::to_string(kMaxInitRetries) + " draws");
}

AdamState AdamState::zero(int rows, int cols) { return AdamState{Matrix(rows, cols), Matrix(rows, cols), 0}; }

void adam_update(Matrix& b, const Matrix& grad, AdamState& state, const OptimizerConfig& config) {
    if (!b.same_shape(grad) || !b.same_shape(state.m) || !b.same_shape(state.v))
        throw std::invalid_argument("adam_update: shape mismatch");
    check_finite(grad);
    state.t += 1;
    const double b1 = config.adam_beta1;
    const double b2 = config.adam_beta2;
    const double m_corr = 1.0 - std::pow(b1, state.t);
    const double v_corr = 1.0 - std::pow(b2, state.t);
    for (int i = 0; i < b.rows(); ++i) {
        for (int j = 0; j < b.cols(); ++j) {
            const double g = grad(i, j);
            state.m(i, j) = b1 * state.m(i, j) + (1.0 - b1) * g;
            state.v(i, j) = b2 * state.v(i, j) + (1.0 - b2) * g * g;
            const double m_hat = state.m(i, j) / m_corr;
            const double v_hat = state.v(i, j) / v_corr;
            b(i, j) += config.learning_rate * m_hat / (std::sqrt(v_hat) + config.adam_epsilon);
        }
    }
}

void sgd_update(Matrix& b, const Matrix& grad, const OptimizerConfig& config) {
    if (!b.same_shape(grad)) throw std::invalid_argument("sgd_update: shape mismatch");
    check_finite(grad);
    for (int i = 0; i < b.rows(); ++i)
        for (int j = 0; j < b.cols(); ++j) b(i, j) += config.learning_rate * grad(i, j);
}

OptimizationResult run_optimization(const Matrix& y, const OptimizerConfig& config, Rng& rng) {
    config.validate();
    if (y.rows() < 1 || y.cols() < 1) throw std::invalid_argument("run_optimization: empty block");
    const int num_users = y.rows();
    const int t_len = y.cols();
    const double scale = config.init_scale_for(num_users);
    const bool full_batch = !config.minibatch_size.has_value() || *config.minibatch_size >= t_len;
    const int batch = full_batch ? t_len : *config.minibatch_size;

    for (int attempt = 0; attempt <= kMaxRestarts; ++attempt) {
        Matrix b = init_unmixing(num_users, scale, rng);
        Matrix prev_recorded = b;
        AdamState state = AdamState::zero(num_users, num_users);
        Trajectory trajectory;
        try {
            for (int iter = 1; iter <= config.total_iterations; ++iter) {
                Matrix grad;
                if (full_batch) {
                    grad = laplacian_objective_and_gradient(b, y).gradient;
                } else {
                    grad = minibatch_gradient(b, y, sample_columns(t_len, batch, rng));
                }
                if (config.method == Method::adam)
                    adam_update(b, grad, state, config);
                else
                    sgd_update(b, grad, config);

                if (iter % config.record_every == 0) {
                    TrajectoryRecord rec;
                    rec.step = static_cast<int>(trajectory.records.size()) + 1;
                    rec.iteration = iter;
                    double sum = 0.0, peak = 0.0;
                    for (int i = 0; i < num_users; ++i) {
                        for (int j = 0; j < num_users; ++j) {
                            const double d = std::fabs(b(i, j) - prev_recorded(i, j));
                            sum += d;
                            peak = std::max(peak, d);
                        }
                    }
                    rec.avg_step = sum / (static_cast<double>(num_users) * num_users);
                    rec.max_step = peak;
                    rec.objective = log_likelihood_laplacian(b, y);
                    trajectory.records.push_back(rec);
                    prev_recorded = b;
                }
            }
            return OptimizationResult{std::move(b), std::move(trajectory), attempt};
        } catch (const singular_matrix_error&) {
            // restart from a fresh initialization
        }
    }
    throw optimization_error("run_optimization: singular unmixing matrix after " +
                             std::to_string(kMaxRestarts) + " restarts");
}

} // namespace pfdet
