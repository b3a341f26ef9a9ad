#include "pfdet/signal_model.hpp"

#include "pfdet/errors.hpp"
#include "pfdet/linalg.hpp"

#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

namespace pfdet {

namespace {

constexpr double kMinRcond = 1e-12;
constexpr int kMaxChannelRetries = 100;

void reject_unknown_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
    if (!j.is_object()) throw config_error(where + ": expected a JSON object");
    for (const auto& item : j.items()) {
        if (!allowed.count(item.key()))
            throw config_error(where + ": unknown key \"" + item.key() + "\"");
    }
}

void require_key(const nlohmann::json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) throw config_error(where + ": missing key \"" + key + "\"");
}

} // namespace

int ScenarioConfig::total_users() const {
    return std::accumulate(cell_user_counts.begin(), cell_user_counts.end(), 0);
}

void ScenarioConfig::validate() const {
    if (num_antennas <= 0) throw config_error("num_antennas must be positive");
    if (cell_user_counts.empty()) throw config_error("cell_user_counts must be non-empty");
    for (int k : cell_user_counts)
        if (k <= 0) throw config_error("cell_user_counts entries must be positive");
    const int users = total_users();
    if (num_antennas != users)
        throw config_error("num_antennas (" + std::to_string(num_antennas) +
                           ") must equal the total user count (" + std::to_string(users) + ")");
    if (coherence_block <= 2 * users)
        throw config_error("coherence_block (" + std::to_string(coherence_block) +
                           ") must exceed 2K = " + std::to_string(2 * users));
    if (!(attenuation_range.first > 0.0))
        throw config_error("attenuation_range.low must be positive");
    if (!(attenuation_range.first <= attenuation_range.second))
        throw config_error("attenuation_range.low must not exceed attenuation_range.high");
    if (snr.has_value() && !(*snr >= 0.0)) throw config_error("snr must be nonnegative");
}

ScenarioConfig ScenarioConfig::from_json(const nlohmann::json& j) {
    static const std::set<std::string> keys{"num_antennas",      "cell_user_counts",
                                            "coherence_block",   "attenuation_range",
                                            "snr",               "seed"};
    reject_unknown_keys(j, keys, "scenario");
    for (const auto& key : keys) require_key(j, key, "scenario");

    ScenarioConfig c;
    try {
        c.num_antennas = j.at("num_antennas").get<int>();
        c.cell_user_counts = j.at("cell_user_counts").get<std::vector<int>>();
        c.coherence_block = j.at("coherence_block").get<int>();
        const auto& range = j.at("attenuation_range");
        if (!range.is_array() || range.size() != 2)
            throw config_error("scenario: attenuation_range must be a [low, high] pair");
        c.attenuation_range = {range[0].get<double>(), range[1].get<double>()};
        const auto& snr = j.at("snr");
        if (snr.is_string()) {
            if (snr.get<std::string>() != "noiseless")
                throw config_error("scenario: snr must be a number or \"noiseless\"");
            c.snr = std::nullopt;
        } else {
            c.snr = snr.get<double>();
        }
        c.seed = j.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("scenario: ") + e.what());
    }
    c.validate();
    return c;
}

nlohmann::json ScenarioConfig::to_json() const {
    nlohmann::json j;
    j["num_antennas"] = num_antennas;
    j["cell_user_counts"] = cell_user_counts;
    j["coherence_block"] = coherence_block;
    j["attenuation_range"] = {attenuation_range.first, attenuation_range.second};
    if (snr.has_value())
        j["snr"] = *snr;
    else
        j["snr"] = "noiseless";
    j["seed"] = seed;
    return j;
}

double laplacian_from_uniform(double u) {
    const double sign = (u > 0.0) - (u < 0.0);
    return -(1.0 / std::sqrt(2.0)) * sign * std::log(1.0 - 2.0 * std::fabs(u));
}

double sample_laplacian(Rng& rng) { return laplacian_from_uniform(rng.uniform_symmetric()); }

ChannelMatrix generate_channel(const ScenarioConfig& config, Rng& rng) {
    config.validate();
    const int n = config.num_antennas;
    const int users = config.total_users();

    for (int attempt = 0; attempt < kMaxChannelRetries; ++attempt) {
        ChannelMatrix h;
        h.per_user_variance.resize(users);
        for (int k = 0; k < users; ++k)
            h.per_user_variance[k] =
                rng.uniform(config.attenuation_range.first, config.attenuation_range.second);
        h.entries = Matrix(n, users);
        for (int k = 0; k < users; ++k) {
            const double std_dev = std::sqrt(h.per_user_variance[k]);
            for (int i = 0; i < n; ++i) h.entries(i, k) = std_dev * rng.normal();
        }
        if (rcond(h.entries) > kMinRcond) return h;
    }
    throw generation_error("generate_channel: no well-conditioned channel after " +
                           std::to_string(kMaxChannelRetries) + " draws");
}

SymbolBlock generate_symbols(const ScenarioConfig& config, Rng& rng) {
    config.validate();
    const int users = config.total_users();
    const int t_len = config.coherence_block;
    const double scale = config.noiseless() ? 1.0 : std::sqrt(*config.snr);

    SymbolBlock x;
    x.entries = Matrix(users, t_len);
    for (int t = 0; t < t_len; ++t)
        for (int k = 0; k < users; ++k) x.entries(k, t) = scale * sample_laplacian(rng);

    x.cell_of_row.resize(users);
    int row = 0;
    for (std::size_t cell = 0; cell < config.cell_user_counts.size(); ++cell)
        for (int k = 0; k < config.cell_user_counts[cell]; ++k) x.cell_of_row[row++] = static_cast<int>(cell);
    return x;
}

ReceivedBlock synthesize_received(const ChannelMatrix& h, const SymbolBlock& x,
                                  const ScenarioConfig& config, Rng& rng) {
    if (h.entries.cols() != x.entries.rows())
        throw std::invalid_argument("synthesize_received: channel/symbol dimensions differ");
    ReceivedBlock y;
    y.entries = matmul(h.entries, x.entries);
    if (!config.noiseless()) {
        for (int t = 0; t < y.entries.cols(); ++t)
            for (int i = 0; i < y.entries.rows(); ++i) y.entries(i, t) += rng.normal();
    }
    return y;
}

ScenarioInstance generate_scenario(const ScenarioConfig& config) {
    config.validate();
    ScenarioInstance inst;
    Rng channel_rng(derive_seed(config.seed, kStreamChannel));
    Rng symbol_rng(derive_seed(config.seed, kStreamSymbols));
    Rng noise_rng(derive_seed(config.seed, kStreamNoise));
    inst.channel = generate_channel(config, channel_rng);
    inst.symbols = generate_symbols(config, symbol_rng);
    inst.received = synthesize_received(inst.channel, inst.symbols, config, noise_rng);
    return inst;
}

} // namespace pfdet
