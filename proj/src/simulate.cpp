#include "rfsense/simulate.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

namespace rfsense {

namespace {

using nlohmann::json;

constexpr double kPi = 3.14159265358979323846;

// Seeded Box-Muller generator. std::normal_distribution is implementation
// defined, so traces would not be reproducible across standard libraries.
class GaussianRng {
public:
    explicit GaussianRng(std::uint64_t seed) : engine_(seed) {}

    double next(double sigma) {
        if (has_spare_) {
            has_spare_ = false;
            return spare_ * sigma;
        }
        const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1p-53;  // (0,1]
        const double u2 = static_cast<double>(engine_() >> 11) * 0x1p-53;          // [0,1)
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * kPi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a) * sigma;
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Traces carry RSSI at 0.01 dB resolution; quantizing here keeps simulated
// samples identical through a write/read round trip.
double quantize(double rssi) { return std::round(rssi * 100.0) / 100.0; }

void check_known_keys(const json& j, std::initializer_list<const char*> allowed,
                      const std::string& context) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : allowed) {
            if (it.key() == k) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw ParseError("unknown key \"" + it.key() + "\" in " + context);
        }
    }
}

double number_field(const json& j, const char* key, const std::string& context) {
    if (!j.contains(key)) {
        throw ParseError("missing key \"" + std::string(key) + "\" in " + context);
    }
    if (!j.at(key).is_number()) {
        throw ParseError("key \"" + std::string(key) + "\" in " + context +
                         " must be a number");
    }
    return j.at(key).get<double>();
}

double number_or(const json& j, const char* key, double fallback,
                 const std::string& context) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) {
        throw ParseError("key \"" + std::string(key) + "\" in " + context +
                         " must be a number");
    }
    return j.at(key).get<double>();
}

std::int64_t integer_field(const json& j, const char* key, const std::string& context) {
    if (!j.contains(key)) {
        throw ParseError("missing key \"" + std::string(key) + "\" in " + context);
    }
    if (!j.at(key).is_number_integer()) {
        throw ParseError("key \"" + std::string(key) + "\" in " + context +
                         " must be an integer");
    }
    return j.at(key).get<std::int64_t>();
}

json parse_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
    return j;
}

Scenario make_fixture(const char* bssid, double distance_m, double baseline_dbm,
                      double wall_db, std::vector<ObstructionEvent> obstructions,
                      std::int64_t duration_ms) {
    Scenario s;
    s.bssid = Bssid::parse(bssid);
    s.distance_m = distance_m;
    s.path_loss.d0_m = 1.0;
    s.path_loss.exponent_n = kDefaultPathLossExponent;
    // Calibrate the reference level so the clear plateau sits exactly at the
    // demonstrated baseline once path loss and wall loss are taken out.
    const double path_db =
        10.0 * s.path_loss.exponent_n * std::log10(distance_m / s.path_loss.d0_m);
    s.path_loss.rssi_at_d0 = RssiDbm{baseline_dbm + path_db + wall_db};
    if (wall_db > 0.0) {
        s.static_losses_db.push_back({"concrete-wall", wall_db});
    }
    s.obstructions = std::move(obstructions);
    s.noise_sigma_db = kDefaultNoiseSigmaDb;
    s.sample_period_ms = kDefaultSamplePeriodMs;
    s.duration_ms = duration_ms;
    s.seed = 0;
    return s;
}

}  // namespace

std::vector<std::string> Scenario::violations() const {
    std::vector<std::string> v;
    if (!std::isfinite(distance_m) || distance_m <= 0.0) {
        v.push_back("distance_m must be positive");
    }
    if (!std::isfinite(path_loss.d0_m) || path_loss.d0_m <= 0.0) {
        v.push_back("path_loss.d0_m must be positive");
    }
    if (!(path_loss.exponent_n >= 1.5 && path_loss.exponent_n <= 6.0)) {
        v.push_back("path_loss.exponent_n must lie in [1.5, 6.0]");
    }
    if (std::isfinite(distance_m) && std::isfinite(path_loss.d0_m) &&
        path_loss.d0_m > 0.0 && distance_m < path_loss.d0_m) {
        v.push_back("distance_m must be at least the reference distance d0_m");
    }
    for (std::size_t i = 0; i < static_losses_db.size(); ++i) {
        const auto& loss = static_losses_db[i];
        if (!std::isfinite(loss.loss_db) || loss.loss_db < 0.0) {
            v.push_back("static_losses_db[" + std::to_string(i) +
                        "] loss_db must be >= 0");
        }
    }
    for (std::size_t i = 0; i < obstructions.size(); ++i) {
        const auto& o = obstructions[i];
        if (o.start_ms >= o.end_ms) {
            v.push_back("obstructions[" + std::to_string(i) +
                        "] must have start_ms < end_ms");
        }
        if (!std::isfinite(o.insertion_loss_db) || o.insertion_loss_db < 0.0) {
            v.push_back("obstructions[" + std::to_string(i) +
                        "] insertion_loss_db must be >= 0");
        }
    }
    if (!std::isfinite(noise_sigma_db) || noise_sigma_db < 0.0) {
        v.push_back("noise_sigma_db must be >= 0");
    }
    if (sample_period_ms <= 0) {
        v.push_back("sample_period_ms must be positive");
    }
    if (duration_ms < sample_period_ms) {
        v.push_back("duration_ms must be at least one sample period");
    }
    return v;
}

RssiDbm expected_rssi(const PathLossModel& model, double d_m, double static_losses_db) {
    if (!std::isfinite(d_m) || d_m < model.d0_m) {
        throw DomainError("distance " + std::to_string(d_m) +
                          " m is inside the model reference distance " +
                          std::to_string(model.d0_m) + " m");
    }
    const double path_db = 10.0 * model.exponent_n * std::log10(d_m / model.d0_m);
    return RssiDbm{model.rssi_at_d0.value - path_db - static_losses_db};
}

std::vector<RssiSample> simulate(const Scenario& scenario) {
    const auto violations = scenario.violations();
    if (!violations.empty()) {
        std::ostringstream msg;
        msg << "invalid scenario:";
        for (const auto& v : violations) msg << "\n  - " << v;
        throw ValidationError(msg.str());
    }

    double static_total = 0.0;
    for (const auto& loss : scenario.static_losses_db) static_total += loss.loss_db;
    const double clear_level =
        expected_rssi(scenario.path_loss, scenario.distance_m, static_total).value;

    GaussianRng rng(scenario.seed);
    const std::int64_t count = scenario.duration_ms / scenario.sample_period_ms;
    std::vector<RssiSample> trace;
    trace.reserve(static_cast<std::size_t>(count));
    for (std::int64_t k = 0; k < count; ++k) {
        const std::int64_t t = k * scenario.sample_period_ms;
        double level = clear_level;
        for (const auto& o : scenario.obstructions) {
            if (t >= o.start_ms && t < o.end_ms) level -= o.insertion_loss_db;
        }
        if (scenario.noise_sigma_db > 0.0) {
            level += rng.next(scenario.noise_sigma_db);
        }
        trace.push_back(RssiSample{t, scenario.bssid, RssiDbm{quantize(level)}, {}});
    }
    return trace;
}

const std::vector<std::string>& fixture_ids() {
    static const std::vector<std::string> ids = {
        "fig5_los_2p5m",  "fig6_los_5p3m", "fig7_two_people",
        "fig8_fast_crossing", "fig9_wall",     "fig10_wall_repeated",
    };
    return ids;
}

Scenario fixture_scenario(std::string_view name) {
    // Clear-air LOS link at 2.5 m; one person blocks the path for 15 s.
    if (name == "fig5_los_2p5m") {
        return make_fixture("02:00:00:00:00:05", 2.5, -50.0, 0.0,
                            {{20000, 35000, 15.0, "human"}}, 90000);
    }
    // Longer 5.3 m LOS link, same single sustained crossing.
    if (name == "fig6_los_5p3m") {
        return make_fixture("02:00:00:00:00:06", 5.3, -52.0, 0.0,
                            {{20000, 35000, 12.0, "human"}}, 90000);
    }
    // Two different people cross one after the other; their bodies absorb
    // different amounts, so the two plateaus differ.
    if (name == "fig7_two_people") {
        return make_fixture("02:00:00:00:00:07", 5.3, -53.0, 0.0,
                            {{20000, 32000, 9.0, "person-a"},
                             {48000, 60000, 11.0, "person-b"}},
                            120000);
    }
    // A fast walk through the beam: the dip spans a single 250 ms sample.
    if (name == "fig8_fast_crossing") {
        return make_fixture("02:00:00:00:00:08", 2.5, -50.0, 0.0,
                            {{30000, 30250, 11.0, "fast-crossing"}}, 90000);
    }
    // Link through a concrete wall; one walk on each side of the wall. The
    // AP-side pass removes much more signal than the receiver-side pass.
    if (name == "fig9_wall") {
        return make_fixture("02:00:00:00:00:09", 4.0, -55.0, 10.0,
                            {{20000, 26000, 5.0, "human-receiver-side"},
                             {45000, 51000, 15.0, "human-ap-side"}},
                            120000);
    }
    // Same wall geometry, four brisk crossings alternating sides.
    if (name == "fig10_wall_repeated") {
        return make_fixture("02:00:00:00:00:0a", 4.0, -51.0, 10.0,
                            {{20000, 22000, 10.0, "human-receiver-side"},
                             {35000, 37000, 19.0, "human-ap-side"},
                             {50000, 52000, 10.0, "human-receiver-side"},
                             {65000, 67000, 19.0, "human-ap-side"}},
                            120000);
    }
    std::ostringstream msg;
    msg << "unknown fixture \"" << name << "\"; valid ids:";
    for (const auto& id : fixture_ids()) msg << " " << id;
    throw ValidationError(msg.str());
}

PathLossModel path_loss_from_json(const json& j) {
    if (!j.is_object()) throw ParseError("path loss model must be a JSON object");
    check_known_keys(j, {"rssi_at_d0", "d0_m", "exponent_n"}, "path loss model");
    PathLossModel m;
    m.rssi_at_d0 = RssiDbm{number_field(j, "rssi_at_d0", "path loss model")};
    m.d0_m = number_or(j, "d0_m", 1.0, "path loss model");
    m.exponent_n = number_or(j, "exponent_n", kDefaultPathLossExponent, "path loss model");
    return m;
}

json path_loss_to_json(const PathLossModel& m) {
    return json{{"rssi_at_d0", m.rssi_at_d0.value},
                {"d0_m", m.d0_m},
                {"exponent_n", m.exponent_n}};
}

PathLossModel load_path_loss(const std::string& path) {
    return path_loss_from_json(parse_json_file(path));
}

Scenario scenario_from_json(const json& j) {
    if (!j.is_object()) throw ParseError("scenario must be a JSON object");
    check_known_keys(j,
                     {"bssid", "distance_m", "path_loss", "static_losses_db",
                      "obstructions", "noise_sigma_db", "sample_period_ms",
                      "duration_ms", "seed"},
                     "scenario");
    Scenario s;
    if (!j.contains("bssid") || !j.at("bssid").is_string()) {
        throw ParseError("scenario requires a string \"bssid\"");
    }
    s.bssid = Bssid::parse(j.at("bssid").get<std::string>());
    s.distance_m = number_field(j, "distance_m", "scenario");
    if (!j.contains("path_loss")) {
        throw ParseError("missing key \"path_loss\" in scenario");
    }
    s.path_loss = path_loss_from_json(j.at("path_loss"));
    if (j.contains("static_losses_db")) {
        if (!j.at("static_losses_db").is_array()) {
            throw ParseError("scenario \"static_losses_db\" must be an array");
        }
        for (const auto& item : j.at("static_losses_db")) {
            check_known_keys(item, {"label", "loss_db"}, "static loss");
            StaticLoss loss;
            loss.label = item.value("label", std::string{});
            loss.loss_db = number_or(item, "loss_db", kDefaultWallLossDb, "static loss");
            s.static_losses_db.push_back(std::move(loss));
        }
    }
    if (j.contains("obstructions")) {
        if (!j.at("obstructions").is_array()) {
            throw ParseError("scenario \"obstructions\" must be an array");
        }
        for (const auto& item : j.at("obstructions")) {
            check_known_keys(item, {"start_ms", "end_ms", "insertion_loss_db", "label"},
                             "obstruction");
            ObstructionEvent o;
            o.start_ms = integer_field(item, "start_ms", "obstruction");
            o.end_ms = integer_field(item, "end_ms", "obstruction");
            o.insertion_loss_db =
                number_or(item, "insertion_loss_db", kDefaultHumanLossDb, "obstruction");
            o.label = item.value("label", std::string{});
            s.obstructions.push_back(std::move(o));
        }
    }
    s.noise_sigma_db = number_or(j, "noise_sigma_db", kDefaultNoiseSigmaDb, "scenario");
    if (j.contains("sample_period_ms")) {
        s.sample_period_ms = integer_field(j, "sample_period_ms", "scenario");
    }
    s.duration_ms = integer_field(j, "duration_ms", "scenario");
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_integer()) {
            throw ParseError("key \"seed\" in scenario must be an integer");
        }
        s.seed = j.at("seed").get<std::uint64_t>();
    }
    return s;
}

json scenario_to_json(const Scenario& s) {
    json stat = json::array();
    for (const auto& loss : s.static_losses_db) {
        stat.push_back({{"label", loss.label}, {"loss_db", loss.loss_db}});
    }
    json obs = json::array();
    for (const auto& o : s.obstructions) {
        obs.push_back({{"start_ms", o.start_ms},
                       {"end_ms", o.end_ms},
                       {"insertion_loss_db", o.insertion_loss_db},
                       {"label", o.label}});
    }
    return json{{"bssid", s.bssid.to_string()},
                {"distance_m", s.distance_m},
                {"path_loss", path_loss_to_json(s.path_loss)},
                {"static_losses_db", std::move(stat)},
                {"obstructions", std::move(obs)},
                {"noise_sigma_db", s.noise_sigma_db},
                {"sample_period_ms", s.sample_period_ms},
                {"duration_ms", s.duration_ms},
                {"seed", s.seed}};
}

Scenario load_scenario(const std::string& path) {
    return scenario_from_json(parse_json_file(path));
}

}  // namespace rfsense
