#pragma once

#include "pfdet/matrix.hpp"
#include "pfdet/rng.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace pfdet {

// Full description of one synthetic uplink scenario: an n-antenna receiver,
// K users split across cells, a block of T channel uses over which the
// channel stays fixed, per-user attenuation range and transmit SNR.
struct ScenarioConfig {
    int num_antennas = 0;
    std::vector<int> cell_user_counts;
    int coherence_block = 0;
    std::pair<double, double> attenuation_range{0.0, 0.0};
    std::optional<double> snr; // linear scale; nullopt = noiseless mode
    std::uint64_t seed = 0;

    int total_users() const;
    bool noiseless() const { return !snr.has_value(); }

    // Throws config_error on any violated invariant:
    // num_antennas == total users, coherence_block > 2K, valid attenuation range.
    void validate() const;

    // Strict schema: exactly these field names, unknown keys rejected.
    static ScenarioConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

struct ChannelMatrix {
    Matrix entries;                       // n x K
    std::vector<double> per_user_variance; // attenuation drawn per user
};

struct SymbolBlock {
    Matrix entries;            // K x T
    std::vector<int> cell_of_row; // 0-based cell index per user row
};

struct ReceivedBlock {
    Matrix entries; // n x T
};

// Unit-variance zero-mean Laplacian by inverse CDF: u uniform on (-1/2, 1/2)
// maps to -(1/sqrt 2) sign(u) ln(1 - 2|u|).
double laplacian_from_uniform(double u);
double sample_laplacian(Rng& rng);

// Channel columns are i.i.d. Gaussian with a per-user variance drawn
// uniformly from the attenuation range. Regenerates (at most 100 times) when
// the reciprocal condition number is not above 1e-12; running out of retries
// means the configuration itself is degenerate.
ChannelMatrix generate_channel(const ScenarioConfig& config, Rng& rng);

// K x T i.i.d. Laplacian entries scaled by sqrt(snr) (1 in noiseless mode).
// Entries are drawn column by column so two blocks with the same seed and
// different T share their leading columns.
SymbolBlock generate_symbols(const ScenarioConfig& config, Rng& rng);

// y = h x + z with unit-variance Gaussian noise; noiseless mode omits z.
ReceivedBlock synthesize_received(const ChannelMatrix& h, const SymbolBlock& x,
                                  const ScenarioConfig& config, Rng& rng);

// One fully generated trial: channel, symbols and received block, each drawn
// from its own substream of config.seed.
struct ScenarioInstance {
    ChannelMatrix channel;
    SymbolBlock symbols;
    ReceivedBlock received;
};

ScenarioInstance generate_scenario(const ScenarioConfig& config);

} // namespace pfdet
