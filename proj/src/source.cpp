#include "rfsense/source.hpp"

#include <algorithm>
#include <string>

namespace rfsense {

std::optional<RssiSample> SequencedSource::next() {
    if (done_) return std::nullopt;
    std::optional<RssiSample> sample = inner_.next();
    if (!sample) {
        done_ = true;
        return std::nullopt;
    }
    auto [it, inserted] = last_.try_emplace(sample->bssid, sample->timestamp_ms);
    if (!inserted) {
        if (sample->timestamp_ms <= it->second) {
            throw SequencingError("source produced timestamp " +
                                  std::to_string(sample->timestamp_ms) + " ms for bssid " +
                                  sample->bssid.to_string() + " after " +
                                  std::to_string(it->second) + " ms");
        }
        it->second = sample->timestamp_ms;
    }
    return sample;
}

std::vector<MotionEvent> detect_stream(LiveSource& source, const DetectorConfig& config,
                                       std::size_t baseline_window,
                                       std::size_t min_calibration) {
    std::map<Bssid, Detector> detectors;
    std::map<Bssid, std::size_t> counts;
    std::vector<MotionEvent> events;

    while (auto sample = source.next()) {
        auto it = detectors.find(sample->bssid);
        if (it == detectors.end()) {
            it = detectors.emplace(sample->bssid,
                                   Detector(config, baseline_window, min_calibration))
                     .first;
        }
        ++counts[sample->bssid];
        if (auto event = it->second.push(*sample)) {
            events.push_back(std::move(*event));
        }
    }

    for (auto& [bssid, detector] : detectors) {
        if (!detector.armed()) {
            throw CalibrationError("bssid " + bssid.to_string() + " has only " +
                                   std::to_string(counts[bssid]) +
                                   " samples; calibration needs " +
                                   std::to_string(min_calibration));
        }
        if (auto event = detector.finish()) {
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

}  // namespace rfsense
