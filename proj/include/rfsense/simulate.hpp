#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rfsense/core.hpp"

#include <nlohmann/json_fwd.hpp>

namespace rfsense {

inline constexpr double kDefaultNoiseSigmaDb = 1.5;
inline constexpr std::int64_t kDefaultSamplePeriodMs = 250;
inline constexpr double kDefaultPathLossExponent = 2.0;   // free space
inline constexpr double kIndoorPathLossExponent = 3.0;    // indoor preset
inline constexpr double kDefaultHumanLossDb = 12.0;
inline constexpr double kDefaultWallLossDb = 10.0;

/// Log-distance path loss: calibrated level at a reference distance plus a
/// configurable decay exponent.
struct PathLossModel {
    RssiDbm rssi_at_d0{0.0};
    double d0_m = 1.0;
    double exponent_n = kDefaultPathLossExponent;
};

/// One obstruction occupying [start_ms, end_ms) and removing
/// insertion_loss_db from every sample inside the interval.
struct ObstructionEvent {
    std::int64_t start_ms = 0;
    std::int64_t end_ms = 0;
    double insertion_loss_db = kDefaultHumanLossDb;
    std::string label;
};

/// Permanent obstacle such as a wall, always subtracted from the link.
struct StaticLoss {
    std::string label;
    double loss_db = kDefaultWallLossDb;
};

/// Declarative description of one AP/receiver link and its obstruction
/// schedule. Identical scenario + seed always reproduces the same trace.
struct Scenario {
    Bssid bssid;
    double distance_m = 0.0;
    PathLossModel path_loss;
    std::vector<StaticLoss> static_losses_db;
    std::vector<ObstructionEvent> obstructions;  // intervals may overlap; losses add
    double noise_sigma_db = kDefaultNoiseSigmaDb;
    std::int64_t sample_period_ms = kDefaultSamplePeriodMs;
    std::int64_t duration_ms = 0;
    std::uint64_t seed = 0;

    /// Human-readable descriptions of every violated invariant; empty when valid.
    std::vector<std::string> violations() const;
};

/// RSSI predicted at distance d_m: rssi_at_d0 - 10 n log10(d/d0) minus the
/// summed static losses. Throws DomainError when d_m < d0_m.
RssiDbm expected_rssi(const PathLossModel& model, double d_m, double static_losses_db);

/// Generates one sample per sample_period_ms over duration_ms. Each sample is
/// the expected level minus the insertion losses active at its timestamp plus
/// seeded Gaussian noise, rounded to 0.01 dB (the trace file resolution).
/// Throws ValidationError listing every violated scenario invariant.
std::vector<RssiSample> simulate(const Scenario& scenario);

/// Ids of the bundled demonstration scenarios.
const std::vector<std::string>& fixture_ids();

/// Returns a bundled scenario by id; throws ValidationError listing the valid
/// ids for anything else.
Scenario fixture_scenario(std::string_view name);

/// Scenario JSON (snake_case keys mirroring the struct, unknown keys
/// rejected).
Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const Scenario& s);
Scenario load_scenario(const std::string& path);

/// Path-loss model JSON (also embedded in scenarios and used standalone by
/// the mapping CLI).
PathLossModel path_loss_from_json(const nlohmann::json& j);
nlohmann::json path_loss_to_json(const PathLossModel& m);
PathLossModel load_path_loss(const std::string& path);

}  // namespace rfsense
