#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <vector>

#include "rfsense/core.hpp"
#include "rfsense/detector.hpp"

namespace rfsense {

/// Contract for anything that produces samples: file replay, a scanning
/// daemon, a network feed. Pull-based so backpressure is the caller's call.
class LiveSource {
public:
    virtual ~LiveSource() = default;

    /// The next sample, or nullopt once the stream ends; nothing may follow
    /// end-of-stream. Failures throw an Error carrying the reason.
    virtual std::optional<RssiSample> next() = 0;
};

/// Replays an in-memory trace, e.g. one loaded by read_trace_file.
class ReplaySource final : public LiveSource {
public:
    explicit ReplaySource(std::vector<RssiSample> samples)
        : samples_(std::move(samples)) {}

    std::optional<RssiSample> next() override {
        if (pos_ >= samples_.size()) return std::nullopt;
        return samples_[pos_++];
    }

private:
    std::vector<RssiSample> samples_;
    std::size_t pos_ = 0;
};

/// Wraps another source, enforcing per-BSSID strictly increasing timestamps
/// (SequencingError otherwise) and swallowing anything after end-of-stream.
class SequencedSource final : public LiveSource {
public:
    explicit SequencedSource(LiveSource& inner) : inner_(inner) {}

    std::optional<RssiSample> next() override;

private:
    LiveSource& inner_;
    std::map<Bssid, std::int64_t> last_;
    bool done_ = false;
};

/// Drains a source through one detector per BSSID and returns the events
/// sorted by start_ms (ties by bssid). Throws CalibrationError when a BSSID
/// ends before its baseline armed.
std::vector<MotionEvent> detect_stream(LiveSource& source,
                                       const DetectorConfig& config = {},
                                       std::size_t baseline_window = kDefaultBaselineWindow,
                                       std::size_t min_calibration = kMinCalibrationSamples);

}  // namespace rfsense
