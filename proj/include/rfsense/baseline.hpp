#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "rfsense/core.hpp"

namespace rfsense {

/// Sliding window length used when the caller does not pick one: 10 s at the
/// default 250 ms sample period.
inline constexpr std::size_t kDefaultBaselineWindow = 40;

/// Samples required before a detector may arm (3 s at the default period).
inline constexpr std::size_t kMinCalibrationSamples = 12;

/// Robust running estimate of the unobstructed RSSI level for one BSSID.
///
/// level_dbm is the median of the current window, spread_db the median
/// absolute deviation of the same window scaled by 1.4826. While frozen the
/// estimate ignores new samples apart from timestamp bookkeeping — the
/// detector freezes it for the lifetime of an open event so the reference
/// never adapts to an obstructed level.
struct Baseline {
    double level_dbm = 0.0;
    double spread_db = 0.0;
    std::size_t window_len = 0;   // samples currently contributing
    bool frozen = false;

    std::size_t capacity = kDefaultBaselineWindow;  // maximum window length
    std::vector<double> window;                     // most recent at the back
    std::int64_t last_timestamp_ms = std::numeric_limits<std::int64_t>::min();
};

/// Seeds a baseline from the last `window` samples of a single-BSSID batch.
/// The window also becomes the sliding capacity. Throws CalibrationError when
/// fewer than `window` samples are supplied or `window` < 3.
Baseline calibrate(std::span<const RssiSample> samples, std::size_t window);

/// Same, but the sliding window may keep growing up to `capacity` samples as
/// the stream continues (used by the detector: arm early, then widen).
Baseline calibrate(std::span<const RssiSample> samples, std::size_t window,
                   std::size_t capacity);

/// Slides the window by one sample and recomputes level/spread. A frozen
/// baseline passes through unchanged except for timestamp bookkeeping.
/// Throws SequencingError when the timestamp does not advance.
Baseline update(const Baseline& b, const RssiSample& s);

}  // namespace rfsense
