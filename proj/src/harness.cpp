#include "pfdet/harness.hpp"

#include "pfdet/errors.hpp"
#include "pfdet/likelihood.hpp"
#include "pfdet/linalg.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace pfdet {

namespace {

namespace fs = std::filesystem;

std::string trial_tag(int trial) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "trial%03d", trial);
    return buf;
}

void write_text_file(const fs::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open " + path.string() + " for writing");
    out << contents;
    if (!out) throw io_error("failed writing " + path.string());
}

double now_seconds() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

} // namespace

std::string to_string(Emit e) {
    switch (e) {
    case Emit::rho_csv: return "rho_csv";
    case Emit::trajectory_csv: return "trajectory_csv";
    default: return "summary_json";
    }
}

Emit emit_from_string(const std::string& s) {
    if (s == "rho_csv") return Emit::rho_csv;
    if (s == "trajectory_csv") return Emit::trajectory_csv;
    if (s == "summary_json") return Emit::summary_json;
    throw config_error("experiment: unknown emit kind \"" + s + "\"");
}

void ExperimentConfig::validate() const {
    scenario.validate();
    optimizer.validate();
    if (trials < 1) throw config_error("experiment: trials must be at least 1");
    if (output_dir.empty()) throw config_error("experiment: output_dir must be non-empty");
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    static const std::set<std::string> keys{"scenario", "optimizer", "trials", "output_dir",
                                            "emit"};
    if (!j.is_object()) throw config_error("experiment: expected a JSON object");
    for (const auto& item : j.items())
        if (!keys.count(item.key()))
            throw config_error("experiment: unknown key \"" + item.key() + "\"");
    if (!j.contains("scenario")) throw config_error("experiment: missing key \"scenario\"");

    ExperimentConfig c;
    c.scenario = ScenarioConfig::from_json(j.at("scenario"));
    if (j.contains("optimizer")) c.optimizer = OptimizerConfig::from_json(j.at("optimizer"));
    try {
        if (j.contains("trials")) c.trials = j.at("trials").get<int>();
        if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
        if (j.contains("emit")) {
            c.emit.clear();
            for (const auto& item : j.at("emit")) c.emit.insert(emit_from_string(item.get<std::string>()));
        }
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("experiment: ") + e.what());
    }
    c.validate();
    return c;
}

ExperimentConfig ExperimentConfig::load(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw io_error("cannot open config file " + file.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw config_error("config file " + file.string() + ": " + e.what());
    }
    return from_json(j);
}

nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json j;
    j["scenario"] = scenario.to_json();
    j["optimizer"] = optimizer.to_json();
    j["trials"] = trials;
    j["output_dir"] = output_dir.string();
    nlohmann::json emits = nlohmann::json::array();
    for (Emit e : emit) emits.push_back(to_string(e));
    j["emit"] = emits;
    return j;
}

nlohmann::json ExperimentSummary::to_json() const {
    nlohmann::json j;
    j["config"] = config.to_json();
    nlohmann::json results = nlohmann::json::array();
    for (const TrialResult& t : trials) {
        nlohmann::json r;
        r["trial"] = t.trial;
        r["seed"] = t.seed;
        r["status"] = t.ok ? "ok" : "failed";
        if (t.ok) {
            r["matched_correlations"] = t.matched_correlations;
            r["permutation"] = t.permutation;
            r["signs"] = t.signs;
            r["final_objective"] = t.final_objective;
            r["restarts"] = t.restarts;
        } else {
            r["error"] = t.error;
        }
        results.push_back(std::move(r));
    }
    j["results"] = results;
    j["failed_trials"] = failed_trials;
    j["aggregate"] = {{"min_matched", min_matched},
                      {"mean_matched", mean_matched},
                      {"max_matched", max_matched},
                      {"per_cell_mean_matched", per_cell_mean_matched}};
    return j;
}

ExperimentSummary run_experiment(const ExperimentConfig& config) {
    config.validate();
    const double t_start = now_seconds();

    std::error_code ec;
    fs::create_directories(config.output_dir, ec);
    if (ec) throw io_error("cannot create output directory " + config.output_dir.string());

    const int trials = config.trials;
    std::vector<TrialResult> results(trials);
    std::vector<std::string> io_failures(trials);

#pragma omp parallel for schedule(dynamic)
    for (int trial = 0; trial < trials; ++trial) {
        TrialResult& r = results[trial];
        r.trial = trial;
        r.seed = derive_seed(config.scenario.seed, kStreamTrialBase + static_cast<std::uint64_t>(trial));
        const double trial_start = now_seconds();
        try {
            ScenarioConfig scenario = config.scenario;
            scenario.seed = r.seed;
            const ScenarioInstance inst = generate_scenario(scenario);
            Rng opt_rng(derive_seed(scenario.seed, kStreamOptimizer));
            const DetectionResult det =
                detect(inst.received, config.optimizer, &inst.symbols, opt_rng);

            r.ok = true;
            r.matched_correlations = det.match->matched_correlations;
            r.permutation = det.match->permutation;
            r.signs = det.match->signs;
            r.restarts = det.restarts;
            r.final_objective = det.trajectory.records.empty()
                                    ? log_likelihood_laplacian(det.b_hat, inst.received.entries)
                                    : det.trajectory.records.back().objective;

            const std::string tag = trial_tag(trial);
            if (config.emit.count(Emit::rho_csv)) {
                std::ostringstream os;
                write_abs_rho_csv(os, *det.rho);
                write_text_file(config.output_dir / (tag + "_rho.csv"), os.str());
            }
            if (config.emit.count(Emit::trajectory_csv)) {
                std::ostringstream os;
                write_trajectory_csv(os, det.trajectory);
                write_text_file(config.output_dir / (tag + "_trajectory.csv"), os.str());
            }
        } catch (const io_error& e) {
            io_failures[trial] = e.what();
        } catch (const std::exception& e) {
            r.ok = false;
            r.error = e.what();
        }
        r.wall_seconds = now_seconds() - trial_start;
    }

    for (const std::string& failure : io_failures)
        if (!failure.empty()) throw io_error(failure);

    ExperimentSummary summary;
    summary.config = config;
    summary.trials = std::move(results);

    // Aggregates over successful trials only; failures are counted.
    double sum = 0.0;
    std::size_t count = 0;
    summary.min_matched = 1.0;
    summary.max_matched = 0.0;
    const int num_cells = static_cast<int>(config.scenario.cell_user_counts.size());
    std::vector<double> cell_sum(num_cells, 0.0);
    std::vector<std::size_t> cell_count(num_cells, 0);
    std::vector<int> cell_of_row(config.scenario.total_users());
    {
        int row = 0;
        for (int cell = 0; cell < num_cells; ++cell)
            for (int k = 0; k < config.scenario.cell_user_counts[cell]; ++k)
                cell_of_row[row++] = cell;
    }
    for (const TrialResult& t : summary.trials) {
        if (!t.ok) {
            summary.failed_trials += 1;
            continue;
        }
        for (std::size_t i = 0; i < t.matched_correlations.size(); ++i) {
            const double r = t.matched_correlations[i];
            sum += r;
            ++count;
            summary.min_matched = std::min(summary.min_matched, r);
            summary.max_matched = std::max(summary.max_matched, r);
            cell_sum[cell_of_row[i]] += r;
            cell_count[cell_of_row[i]] += 1;
        }
    }
    summary.mean_matched = count ? sum / static_cast<double>(count) : 0.0;
    if (count == 0) summary.min_matched = 0.0;
    summary.per_cell_mean_matched.resize(num_cells, 0.0);
    for (int cell = 0; cell < num_cells; ++cell)
        if (cell_count[cell])
            summary.per_cell_mean_matched[cell] =
                cell_sum[cell] / static_cast<double>(cell_count[cell]);

    if (config.emit.count(Emit::summary_json)) {
        write_text_file(config.output_dir / "summary.json", summary.to_json().dump(2) + "\n");
    }
    summary.total_wall_seconds = now_seconds() - t_start;
    return summary;
}

std::vector<ExperimentSummary> run_sweep(const ExperimentConfig& base,
                                         const std::vector<int>& coherence_blocks) {
    if (coherence_blocks.empty()) throw config_error("sweep: need at least one T value");
    const int users = base.scenario.total_users();
    for (int t_len : coherence_blocks)
        if (t_len <= 2 * users)
            throw config_error("sweep: T = " + std::to_string(t_len) +
                               " violates the long coherence block requirement T > 2K = " +
                               std::to_string(2 * users));

    std::error_code ec;
    fs::create_directories(base.output_dir, ec);
    if (ec) throw io_error("cannot create output directory " + base.output_dir.string());

    std::vector<ExperimentSummary> summaries;
    std::vector<SweepPoint> points;
    for (int t_len : coherence_blocks) {
        ExperimentConfig cfg = base;
        cfg.scenario.coherence_block = t_len;
        cfg.output_dir = base.output_dir / ("T" + std::to_string(t_len));
        summaries.push_back(run_experiment(cfg));
        const ExperimentSummary& s = summaries.back();
        points.push_back({t_len, s.mean_matched, s.min_matched});
    }

    std::ostringstream os;
    os << "T,mean_matched,min_matched\n";
    char line[128];
    for (const SweepPoint& p : points) {
        std::snprintf(line, sizeof(line), "%d,%.17g,%.17g\n", p.coherence_block, p.mean_matched,
                      p.min_matched);
        os << line;
    }
    write_text_file(base.output_dir / "sweep.csv", os.str());
    return summaries;
}

GradientCheckReport run_gradient_check(int num_users, int coherence_block, int instances,
                                       std::uint64_t seed, double h, double tol,
                                       const GradientFn& gradient_fn) {
    if (num_users < 1 || coherence_block < 1 || instances < 0)
        throw config_error("grad-check: K, T must be positive and instances nonnegative");
    const GradientFn grad = gradient_fn ? gradient_fn : GradientFn(gradient_laplacian);

    GradientCheckReport report;
    report.instances = instances;
    Rng rng(derive_seed(seed, kStreamOptimizer));

    constexpr double kSmoothPoint = 1e-3;
    constexpr int kMaxResamples = 10000;

    for (int inst = 0; inst < instances; ++inst) {
        Matrix b(num_users, num_users), y(num_users, coherence_block);
        bool smooth = false;
        for (int tries = 0; tries < kMaxResamples && !smooth; ++tries) {
            for (int i = 0; i < num_users; ++i)
                for (int j = 0; j < num_users; ++j) b(i, j) = rng.normal();
            for (int i = 0; i < num_users; ++i)
                for (int t = 0; t < coherence_block; ++t) y(i, t) = rng.normal();
            const Matrix s = kernels::unmixed(b, y);
            double min_abs = std::numeric_limits<double>::infinity();
            for (int i = 0; i < s.rows(); ++i)
                for (int t = 0; t < s.cols(); ++t) min_abs = std::min(min_abs, std::fabs(s(i, t)));
            smooth = min_abs > kSmoothPoint && !LuFactorization::compute(b).singular;
        }
        if (!smooth) throw generation_error("grad-check: could not find a smooth point");

        const Matrix analytic = grad(b, y);
        const Matrix numeric = finite_difference_gradient(
            b, y, [](const Matrix& bb, const Matrix& yy) { return log_likelihood_laplacian(bb, yy); },
            h);
        const double rel = (analytic - numeric).frobenius_norm() / analytic.frobenius_norm();
        report.rel_errors.push_back(rel);
        report.max_rel_error = std::max(report.max_rel_error, rel);
    }
    report.passed = report.max_rel_error <= tol;
    return report;
}

Matrix read_csv_matrix(std::istream& in) {
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (!rows.empty() && rows.front().size() != row.size())
            throw io_error("csv: ragged rows");
        rows.push_back(std::move(row));
    }
    Matrix m(static_cast<int>(rows.size()), rows.empty() ? 0 : static_cast<int>(rows.front().size()));
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
    return m;
}

} // namespace pfdet
