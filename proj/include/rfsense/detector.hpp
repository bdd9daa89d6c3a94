#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rfsense/baseline.hpp"
#include "rfsense/core.hpp"

#include <nlohmann/json_fwd.hpp>

namespace rfsense {

enum class EventKind { momentary, sustained };

/// Which side of a static obstacle (wall) the mover was on, inferred from
/// drop magnitude alone: passes close to the AP remove more signal.
enum class Side { near_ap, near_receiver, unknown };

enum class DetectorPhase { calibrating, clear, obstructed };

std::string_view to_string(EventKind kind);
std::string_view to_string(Side side);
EventKind event_kind_from_string(std::string_view text);
Side side_from_string(std::string_view text);

/// Thresholds for the hysteresis state machine. All drops are measured
/// downward from the baseline level, in dB.
struct DetectorConfig {
    /// A run of samples at or past this drop opens an event.
    double sustained_threshold_db = 4.0;
    /// Hysteresis: an open event closes only when the drop falls below
    /// sustained_threshold_db - release_margin_db.
    double release_margin_db = 2.0;
    /// A single sample at or past this drop opens an event by itself.
    double momentary_threshold_db = 8.0;
    /// Run length that qualifies as sustained.
    int min_sustained_samples = 3;
    /// Events with at least this drop are classified near_ap.
    double side_boundary_db = 12.0;

    /// Descriptions of every violated invariant; empty when valid.
    std::vector<std::string> violations() const;
    /// Throws ValidationError listing all violations.
    void validate() const;
};

/// near_ap iff drop_db >= side_boundary_db, else near_receiver.
Side classify_side(double drop_db, const DetectorConfig& config);

/// One detected obstruction interval. min_rssi_dbm is a robust estimate of
/// the obstructed level (the median of the in-event samples that cleared the
/// opening threshold), so drop_db = baseline_at_start_dbm - min_rssi_dbm is
/// stable under noise.
struct MotionEvent {
    Bssid bssid;
    std::int64_t start_ms = 0;
    std::int64_t end_ms = 0;
    double min_rssi_dbm = 0.0;
    double baseline_at_start_dbm = 0.0;
    double drop_db = 0.0;
    EventKind kind = EventKind::sustained;
    Side side = Side::unknown;

    friend bool operator==(const MotionEvent&, const MotionEvent&) = default;
};

/// Accumulator for the event currently being observed.
struct OpenEvent {
    Bssid bssid;
    std::int64_t start_ms = 0;
    double baseline_at_start_dbm = 0.0;
    double max_drop_db = 0.0;
    /// Samples seen since start_ms, including hysteresis-band samples that
    /// only keep the event open.
    std::size_t span_samples = 0;
    /// Drops of the samples that cleared sustained_threshold_db.
    std::vector<double> marked_drops_db;
};

/// State carried between ingest calls for one BSSID stream.
struct DetectorState {
    DetectorPhase phase = DetectorPhase::calibrating;
    /// Length of the current candidate run while clear.
    int consecutive_below = 0;
    std::int64_t candidate_start_ms = 0;
    std::vector<double> candidate_drops_db;
    /// Present exactly while phase == obstructed.
    std::optional<OpenEvent> open_event;

    /// State for a stream whose baseline has finished calibrating.
    static DetectorState armed();
};

struct IngestResult {
    DetectorState state;
    Baseline baseline;
    std::optional<MotionEvent> event;
};

/// Advances the state machine by one sample.
///
/// The drop is measured against the baseline as it stood before this sample;
/// the baseline is slid afterwards (a no-op while frozen). Opening freezes
/// the baseline, closing unfreezes it, and the closing sample itself is the
/// first to re-enter the window. The completed event is returned on close;
/// runs shorter than min_sustained_samples are discarded unless they were a
/// single sample past momentary_threshold_db.
///
/// Throws CalibrationError while state.phase == calibrating and
/// SequencingError when the timestamp does not advance. `config` must be
/// valid (see DetectorConfig::validate).
IngestResult ingest(const DetectorState& state, const Baseline& baseline,
                    const RssiSample& sample, const DetectorConfig& config);

/// End-of-stream: closes any open event at the last seen timestamp and
/// unfreezes the baseline. Candidate runs that never opened are dropped.
IngestResult flush(const DetectorState& state, const Baseline& baseline,
                   const DetectorConfig& config);

/// Streaming detector for a single BSSID: buffers the first min_calibration
/// samples, arms the baseline from them, then feeds every further sample
/// through ingest. The baseline window keeps growing up to baseline_window.
class Detector {
public:
    explicit Detector(DetectorConfig config = {},
                      std::size_t baseline_window = kDefaultBaselineWindow,
                      std::size_t min_calibration = kMinCalibrationSamples);

    /// Feeds one sample; returns the completed event when this sample closes
    /// one. Throws ValidationError if samples from a second BSSID appear.
    std::optional<MotionEvent> push(const RssiSample& sample);

    /// Closes any event still open at the last pushed timestamp.
    std::optional<MotionEvent> finish();

    bool armed() const { return baseline_.has_value(); }
    const std::optional<Baseline>& baseline() const { return baseline_; }
    const DetectorState& state() const { return state_; }
    const DetectorConfig& config() const { return config_; }

private:
    DetectorConfig config_;
    std::size_t baseline_window_;
    std::size_t min_calibration_;
    std::vector<RssiSample> warmup_;
    std::optional<Baseline> baseline_;
    DetectorState state_;
    std::optional<Bssid> bssid_;
};

/// One row of plot-friendly detection output, aligned 1:1 with the input
/// trace. Calibration samples carry the level the baseline armed at.
struct PlotRow {
    std::int64_t timestamp_ms = 0;
    double rssi_dbm = 0.0;
    double baseline_dbm = 0.0;
    bool event_open = false;
};

/// Batch driver: partitions samples by BSSID, runs one Detector per BSSID,
/// and returns all events sorted by start_ms (ties by bssid). Samples must
/// arrive in per-BSSID timestamp order. Throws CalibrationError when any
/// BSSID has fewer than min_calibration samples. When plot_rows is non-null
/// it receives one row per input sample, in input order.
std::vector<MotionEvent> detect_trace(std::span<const RssiSample> samples,
                                      const DetectorConfig& config = {},
                                      std::size_t baseline_window = kDefaultBaselineWindow,
                                      std::size_t min_calibration = kMinCalibrationSamples,
                                      std::vector<PlotRow>* plot_rows = nullptr);

/// Detection settings as read from a config file: thresholds plus baseline
/// sizing.
struct DetectOptions {
    DetectorConfig config;
    std::size_t baseline_window = kDefaultBaselineWindow;
    std::size_t min_calibration = kMinCalibrationSamples;

    void validate() const;
};

/// Keys: sustained_threshold_db, release_margin_db, momentary_threshold_db,
/// min_sustained_samples, side_boundary_db, baseline_window,
/// min_calibration_samples. All optional; unknown keys rejected.
DetectOptions detect_options_from_json(const nlohmann::json& j);
DetectOptions load_detect_options(const std::string& path);

/// One event as a JSON line (fixed key order, dB fields with 2 decimals).
std::string event_to_jsonl(const MotionEvent& e);

void write_events(std::ostream& out, std::span<const MotionEvent> events);
void write_events_file(const std::string& path, std::span<const MotionEvent> events);
std::vector<MotionEvent> read_events(std::istream& in);
std::vector<MotionEvent> read_events_file(const std::string& path);

void write_plot_csv(std::ostream& out, std::span<const PlotRow> rows);
void write_plot_csv_file(const std::string& path, std::span<const PlotRow> rows);

}  // namespace rfsense
