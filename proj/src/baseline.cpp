#include "rfsense/baseline.hpp"

#include <algorithm>
#include <string>

#include "rfsense/stats.hpp"

namespace rfsense {

namespace {

void recompute(Baseline& b) {
    b.level_dbm = median(b.window);
    b.spread_db = scaled_mad(b.window);
    b.window_len = b.window.size();
}

}  // namespace

Baseline calibrate(std::span<const RssiSample> samples, std::size_t window) {
    return calibrate(samples, window, window);
}

Baseline calibrate(std::span<const RssiSample> samples, std::size_t window,
                   std::size_t capacity) {
    if (window < 3) {
        throw CalibrationError("calibration window must be at least 3 samples, got " +
                               std::to_string(window));
    }
    if (samples.size() < window) {
        throw CalibrationError("calibration requires at least " +
                               std::to_string(window) + " samples, got " +
                               std::to_string(samples.size()));
    }
    Baseline b;
    b.capacity = std::max(window, capacity);
    b.window.reserve(b.capacity);
    for (std::size_t i = samples.size() - window; i < samples.size(); ++i) {
        b.window.push_back(samples[i].rssi.value);
    }
    b.last_timestamp_ms = samples.back().timestamp_ms;
    b.frozen = false;
    recompute(b);
    return b;
}

Baseline update(const Baseline& b, const RssiSample& s) {
    if (s.timestamp_ms <= b.last_timestamp_ms) {
        throw SequencingError("baseline update out of order: timestamp " +
                              std::to_string(s.timestamp_ms) + " after " +
                              std::to_string(b.last_timestamp_ms));
    }
    Baseline out = b;
    out.last_timestamp_ms = s.timestamp_ms;
    if (out.frozen) {
        return out;
    }
    out.window.push_back(s.rssi.value);
    if (out.window.size() > out.capacity) {
        out.window.erase(out.window.begin());
    }
    recompute(out);
    return out;
}

}  // namespace rfsense
