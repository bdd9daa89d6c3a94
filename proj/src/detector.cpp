#include "rfsense/detector.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <utility>

#include <nlohmann/json.hpp>

#include "rfsense/stats.hpp"

namespace rfsense {

namespace {

using nlohmann::json;

std::string format_db(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    if (buf[0] == '-' && std::strtod(buf, nullptr) == 0.0) {
        return buf + 1;  // never print "-0.00"
    }
    return buf;
}

// The event's magnitude comes from the samples that cleared the opening
// threshold, so the hysteresis band cannot dilute it and drop_db can never
// fall below sustained_threshold_db.
std::optional<MotionEvent> finalize(const OpenEvent& open, std::int64_t end_ms,
                                    const DetectorConfig& config) {
    const bool sustained =
        open.span_samples >= static_cast<std::size_t>(config.min_sustained_samples);
    const bool momentary_single =
        open.marked_drops_db.size() == 1 &&
        open.max_drop_db >= config.momentary_threshold_db;
    if (!sustained && !momentary_single) {
        return std::nullopt;  // too short to qualify either way
    }
    MotionEvent e;
    e.bssid = open.bssid;
    e.start_ms = open.start_ms;
    e.end_ms = end_ms;
    e.baseline_at_start_dbm = open.baseline_at_start_dbm;
    e.drop_db = median(open.marked_drops_db);
    e.min_rssi_dbm = open.baseline_at_start_dbm - e.drop_db;
    e.kind = sustained ? EventKind::sustained : EventKind::momentary;
    e.side = classify_side(e.drop_db, config);
    return e;
}

}  // namespace

std::string_view to_string(EventKind kind) {
    return kind == EventKind::momentary ? "momentary" : "sustained";
}

std::string_view to_string(Side side) {
    switch (side) {
        case Side::near_ap: return "near_ap";
        case Side::near_receiver: return "near_receiver";
        default: return "unknown";
    }
}

EventKind event_kind_from_string(std::string_view text) {
    if (text == "momentary") return EventKind::momentary;
    if (text == "sustained") return EventKind::sustained;
    throw ParseError("unknown event kind \"" + std::string(text) +
                     "\"; expected momentary or sustained");
}

Side side_from_string(std::string_view text) {
    if (text == "near_ap") return Side::near_ap;
    if (text == "near_receiver") return Side::near_receiver;
    if (text == "unknown") return Side::unknown;
    throw ParseError("unknown side \"" + std::string(text) +
                     "\"; expected near_ap, near_receiver or unknown");
}

std::vector<std::string> DetectorConfig::violations() const {
    std::vector<std::string> v;
    const bool finite = std::isfinite(sustained_threshold_db) &&
                        std::isfinite(release_margin_db) &&
                        std::isfinite(momentary_threshold_db) &&
                        std::isfinite(side_boundary_db);
    if (!finite) {
        v.push_back("thresholds must be finite");
        return v;
    }
    if (release_margin_db < 0.0) {
        v.push_back("release_margin_db must be >= 0");
    }
    if (!(sustained_threshold_db > release_margin_db)) {
        v.push_back("sustained_threshold_db must exceed release_margin_db");
    }
    if (momentary_threshold_db < sustained_threshold_db) {
        v.push_back("momentary_threshold_db must be >= sustained_threshold_db");
    }
    if (!(side_boundary_db > sustained_threshold_db)) {
        v.push_back("side_boundary_db must exceed sustained_threshold_db");
    }
    if (min_sustained_samples < 1) {
        v.push_back("min_sustained_samples must be >= 1");
    }
    return v;
}

void DetectorConfig::validate() const {
    const auto v = violations();
    if (v.empty()) return;
    std::ostringstream msg;
    msg << "invalid detector config:";
    for (const auto& item : v) msg << "\n  - " << item;
    throw ValidationError(msg.str());
}

Side classify_side(double drop_db, const DetectorConfig& config) {
    return drop_db >= config.side_boundary_db ? Side::near_ap : Side::near_receiver;
}

DetectorState DetectorState::armed() {
    DetectorState s;
    s.phase = DetectorPhase::clear;
    return s;
}

IngestResult ingest(const DetectorState& state, const Baseline& baseline,
                    const RssiSample& sample, const DetectorConfig& config) {
    if (state.phase == DetectorPhase::calibrating) {
        throw CalibrationError("detector is not armed: baseline calibration incomplete");
    }
    if (baseline.last_timestamp_ms != std::numeric_limits<std::int64_t>::min() &&
        sample.timestamp_ms <= baseline.last_timestamp_ms) {
        throw SequencingError("sample timestamp " + std::to_string(sample.timestamp_ms) +
                              " ms does not advance past " +
                              std::to_string(baseline.last_timestamp_ms) + " ms");
    }

    IngestResult result{state, baseline, std::nullopt};
    DetectorState& st = result.state;
    Baseline& bl = result.baseline;
    const double drop = bl.level_dbm - sample.rssi.value;

    if (st.phase == DetectorPhase::clear) {
        if (drop >= config.sustained_threshold_db) {
            if (st.consecutive_below == 0) {
                st.candidate_start_ms = sample.timestamp_ms;
                st.candidate_drops_db.clear();
            }
            ++st.consecutive_below;
            st.candidate_drops_db.push_back(drop);
            if (drop >= config.momentary_threshold_db ||
                st.consecutive_below >= config.min_sustained_samples) {
                OpenEvent open;
                open.bssid = sample.bssid;
                open.start_ms = st.candidate_start_ms;
                open.baseline_at_start_dbm = bl.level_dbm;
                open.span_samples = static_cast<std::size_t>(st.consecutive_below);
                open.marked_drops_db = std::move(st.candidate_drops_db);
                open.max_drop_db =
                    *std::max_element(open.marked_drops_db.begin(), open.marked_drops_db.end());
                st.open_event = std::move(open);
                st.phase = DetectorPhase::obstructed;
                st.consecutive_below = 0;
                st.candidate_drops_db = {};
                bl.frozen = true;  // hold the reference for the event's lifetime
            }
        } else {
            st.consecutive_below = 0;
            st.candidate_drops_db.clear();
        }
    } else {  // obstructed
        OpenEvent& open = *st.open_event;
        if (drop < config.sustained_threshold_db - config.release_margin_db) {
            // This sample is the closing trigger: it ends the event and is
            // the first one to feed the baseline again.
            result.event = finalize(open, sample.timestamp_ms, config);
            st.open_event.reset();
            st.phase = DetectorPhase::clear;
            bl.frozen = false;
        } else {
            ++open.span_samples;
            if (drop >= config.sustained_threshold_db) {
                open.marked_drops_db.push_back(drop);
                open.max_drop_db = std::max(open.max_drop_db, drop);
            }
        }
    }

    bl = update(bl, sample);
    return result;
}

IngestResult flush(const DetectorState& state, const Baseline& baseline,
                   const DetectorConfig& config) {
    IngestResult result{state, baseline, std::nullopt};
    result.state.consecutive_below = 0;
    result.state.candidate_drops_db.clear();
    if (state.phase != DetectorPhase::obstructed) {
        return result;
    }
    result.event = finalize(*state.open_event, baseline.last_timestamp_ms, config);
    result.state.open_event.reset();
    result.state.phase = DetectorPhase::clear;
    result.baseline.frozen = false;
    return result;
}

Detector::Detector(DetectorConfig config, std::size_t baseline_window,
                   std::size_t min_calibration)
    : config_(config), baseline_window_(baseline_window), min_calibration_(min_calibration) {
    config_.validate();
    if (baseline_window_ < 3) {
        throw ValidationError("baseline window must be at least 3 samples");
    }
    if (min_calibration_ < 3) {
        throw ValidationError("calibration minimum must be at least 3 samples");
    }
}

std::optional<MotionEvent> Detector::push(const RssiSample& sample) {
    if (bssid_.has_value()) {
        if (sample.bssid != *bssid_) {
            throw ValidationError("detector is bound to bssid " + bssid_->to_string() +
                                  " but received a sample for " + sample.bssid.to_string());
        }
    } else {
        bssid_ = sample.bssid;
    }

    if (!baseline_.has_value()) {
        if (!warmup_.empty() && sample.timestamp_ms <= warmup_.back().timestamp_ms) {
            throw SequencingError("sample timestamp " + std::to_string(sample.timestamp_ms) +
                                  " ms does not advance past " +
                                  std::to_string(warmup_.back().timestamp_ms) + " ms");
        }
        warmup_.push_back(sample);
        if (warmup_.size() >= min_calibration_) {
            baseline_ = calibrate(warmup_, warmup_.size(), baseline_window_);
            warmup_.clear();
            warmup_.shrink_to_fit();
            state_ = DetectorState::armed();
        }
        return std::nullopt;
    }

    IngestResult result = ingest(state_, *baseline_, sample, config_);
    state_ = std::move(result.state);
    baseline_ = std::move(result.baseline);
    return result.event;
}

std::optional<MotionEvent> Detector::finish() {
    if (!baseline_.has_value()) {
        return std::nullopt;  // stream ended before the baseline armed
    }
    IngestResult result = flush(state_, *baseline_, config_);
    state_ = std::move(result.state);
    baseline_ = std::move(result.baseline);
    return result.event;
}

std::vector<MotionEvent> detect_trace(std::span<const RssiSample> samples,
                                      const DetectorConfig& config,
                                      std::size_t baseline_window,
                                      std::size_t min_calibration,
                                      std::vector<PlotRow>* plot_rows) {
    struct Stream {
        Detector detector;
        std::vector<std::size_t> warmup_rows;
        std::size_t sample_count = 0;
    };

    std::map<Bssid, Stream> streams;
    std::vector<MotionEvent> events;
    if (plot_rows != nullptr) {
        plot_rows->assign(samples.size(), PlotRow{});
    }

    for (std::size_t i = 0; i < samples.size(); ++i) {
        const RssiSample& s = samples[i];
        auto it = streams.find(s.bssid);
        if (it == streams.end()) {
            it = streams
                     .emplace(s.bssid,
                              Stream{Detector(config, baseline_window, min_calibration), {}, 0})
                     .first;
        }
        Stream& stream = it->second;
        ++stream.sample_count;

        const bool was_armed = stream.detector.armed();
        if (auto event = stream.detector.push(s)) {
            events.push_back(std::move(*event));
        }

        if (plot_rows == nullptr) continue;
        if (!was_armed) {
            stream.warmup_rows.push_back(i);
            if (stream.detector.armed()) {
                // Backfill the calibration stretch with the level it armed at.
                const double level = stream.detector.baseline()->level_dbm;
                for (std::size_t row : stream.warmup_rows) {
                    (*plot_rows)[row] = PlotRow{samples[row].timestamp_ms,
                                                samples[row].rssi.value, level, false};
                }
                stream.warmup_rows.clear();
            }
        } else {
            (*plot_rows)[i] =
                PlotRow{s.timestamp_ms, s.rssi.value, stream.detector.baseline()->level_dbm,
                        stream.detector.state().phase == DetectorPhase::obstructed};
        }
    }

    for (auto& [bssid, stream] : streams) {
        if (!stream.detector.armed()) {
            throw CalibrationError("bssid " + bssid.to_string() + " has only " +
                                   std::to_string(stream.sample_count) +
                                   " samples; calibration needs " +
                                   std::to_string(min_calibration));
        }
        if (auto event = stream.detector.finish()) {
            events.push_back(std::move(*event));
        }
    }

    std::sort(events.begin(), events.end(), [](const MotionEvent& a, const MotionEvent& b) {
        if (a.start_ms != b.start_ms) return a.start_ms < b.start_ms;
        if (a.bssid != b.bssid) return a.bssid < b.bssid;
        return a.end_ms < b.end_ms;
    });
    return events;
}

void DetectOptions::validate() const {
    config.validate();
    if (baseline_window < 3) {
        throw ValidationError("baseline_window must be at least 3 samples");
    }
    if (min_calibration < 3) {
        throw ValidationError("min_calibration_samples must be at least 3");
    }
    if (min_calibration > baseline_window) {
        throw ValidationError("min_calibration_samples must not exceed baseline_window");
    }
}

DetectOptions detect_options_from_json(const json& j) {
    if (!j.is_object()) {
        throw ParseError("detector config must be a JSON object");
    }
    static constexpr const char* kKeys[] = {
        "sustained_threshold_db", "release_margin_db",  "momentary_threshold_db",
        "min_sustained_samples",  "side_boundary_db",   "baseline_window",
        "min_calibration_samples",
    };
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : kKeys) {
            if (it.key() == k) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw ParseError("unknown key \"" + it.key() + "\" in detector config");
        }
    }

    DetectOptions opts;
    auto number = [&j](const char* key, double fallback) {
        if (!j.contains(key)) return fallback;
        if (!j.at(key).is_number()) {
            throw ParseError("key \"" + std::string(key) +
                             "\" in detector config must be a number");
        }
        return j.at(key).get<double>();
    };
    auto integer = [&j](const char* key, std::int64_t fallback) {
        if (!j.contains(key)) return fallback;
        if (!j.at(key).is_number_integer()) {
            throw ParseError("key \"" + std::string(key) +
                             "\" in detector config must be an integer");
        }
        return j.at(key).get<std::int64_t>();
    };

    opts.config.sustained_threshold_db =
        number("sustained_threshold_db", opts.config.sustained_threshold_db);
    opts.config.release_margin_db = number("release_margin_db", opts.config.release_margin_db);
    opts.config.momentary_threshold_db =
        number("momentary_threshold_db", opts.config.momentary_threshold_db);
    const std::int64_t min_sustained =
        integer("min_sustained_samples", opts.config.min_sustained_samples);
    if (min_sustained < 1 || min_sustained > 1'000'000) {
        throw ValidationError("min_sustained_samples out of range");
    }
    opts.config.min_sustained_samples = static_cast<int>(min_sustained);
    opts.config.side_boundary_db = number("side_boundary_db", opts.config.side_boundary_db);
    const std::int64_t window =
        integer("baseline_window", static_cast<std::int64_t>(opts.baseline_window));
    const std::int64_t min_cal =
        integer("min_calibration_samples", static_cast<std::int64_t>(opts.min_calibration));
    if (window < 0 || min_cal < 0) {
        throw ValidationError("baseline sizes must be positive");
    }
    opts.baseline_window = static_cast<std::size_t>(window);
    opts.min_calibration = static_cast<std::size_t>(min_cal);
    opts.validate();
    return opts;
}

DetectOptions load_detect_options(const std::string& path) {
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
    return detect_options_from_json(j);
}

std::string event_to_jsonl(const MotionEvent& e) {
    std::ostringstream out;
    out << "{\"bssid\":\"" << e.bssid.to_string() << "\""
        << ",\"start_ms\":" << e.start_ms << ",\"end_ms\":" << e.end_ms
        << ",\"min_rssi_dbm\":" << format_db(e.min_rssi_dbm)
        << ",\"baseline_at_start_dbm\":" << format_db(e.baseline_at_start_dbm)
        << ",\"drop_db\":" << format_db(e.drop_db) << ",\"kind\":\"" << to_string(e.kind)
        << "\",\"side\":\"" << to_string(e.side) << "\"}";
    return out.str();
}

void write_events(std::ostream& out, std::span<const MotionEvent> events) {
    for (const auto& e : events) {
        out << event_to_jsonl(e) << '\n';
    }
    if (!out) {
        throw IoError("failed writing event stream");
    }
}

void write_events_file(const std::string& path, std::span<const MotionEvent> events) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open " + path + " for writing");
    }
    write_events(out, events);
    out.flush();
    if (!out) {
        throw IoError("failed writing " + path);
    }
}

std::vector<MotionEvent> read_events(std::istream& in) {
    std::vector<MotionEvent> events;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
        }
        static constexpr const char* kKeys[] = {
            "bssid",   "start_ms", "end_ms", "min_rssi_dbm", "baseline_at_start_dbm",
            "drop_db", "kind",     "side",
        };
        for (const char* key : kKeys) {
            if (!j.contains(key)) {
                throw ParseError("line " + std::to_string(line_no) + ": missing key \"" +
                                 key + "\"");
            }
        }
        for (auto it = j.begin(); it != j.end(); ++it) {
            bool known = false;
            for (const char* key : kKeys) {
                if (it.key() == key) {
                    known = true;
                    break;
                }
            }
            if (!known) {
                throw ParseError("line " + std::to_string(line_no) + ": unknown key \"" +
                                 it.key() + "\"");
            }
        }
        try {
            MotionEvent e;
            e.bssid = Bssid::parse(j.at("bssid").get<std::string>());
            e.start_ms = j.at("start_ms").get<std::int64_t>();
            e.end_ms = j.at("end_ms").get<std::int64_t>();
            e.min_rssi_dbm = j.at("min_rssi_dbm").get<double>();
            e.baseline_at_start_dbm = j.at("baseline_at_start_dbm").get<double>();
            e.drop_db = j.at("drop_db").get<double>();
            e.kind = event_kind_from_string(j.at("kind").get<std::string>());
            e.side = side_from_string(j.at("side").get<std::string>());
            events.push_back(std::move(e));
        } catch (const json::exception& ex) {
            throw ParseError("line " + std::to_string(line_no) + ": " + ex.what());
        }
    }
    return events;
}

std::vector<MotionEvent> read_events_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    return read_events(in);
}

void write_plot_csv(std::ostream& out, std::span<const PlotRow> rows) {
    out << "timestamp_ms,rssi_dbm,baseline_dbm,event_open\n";
    for (const auto& row : rows) {
        out << row.timestamp_ms << ',' << format_db(row.rssi_dbm) << ','
            << format_db(row.baseline_dbm) << ',' << (row.event_open ? 1 : 0) << '\n';
    }
    if (!out) {
        throw IoError("failed writing plot data");
    }
}

void write_plot_csv_file(const std::string& path, std::span<const PlotRow> rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open " + path + " for writing");
    }
    write_plot_csv(out, rows);
    out.flush();
    if (!out) {
        throw IoError("failed writing " + path);
    }
}

}  // namespace rfsense
